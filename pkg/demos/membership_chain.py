#!/usr/bin/env python3
"""The strict inclusion chain, witnessed numerically on three functionals.

Order the diagnostics by strength for functionals Z = f(W_1) at p = 2:

  union of higher-order classes  <  strong order-(2,2) class  <  order-2 class

* linear: f(x) = x sits in everything.
* thm31 (tail growth e^(x^2/4) x^-a): order-2 seminorms are finite, but the
  squared difference quotients are not even integrable -- it separates the
  order-2 class from the strong order-(2,2) class.
* thm33 (origin cusp sqrt(x)/log(x)^3): strongly differentiable at order
  (2,2) on its shift window, yet its derivative fails every order above 2 --
  it separates the strong class from the higher-order union.
"""

from wienerlab import catalog_build, linear_functional, membership_report, report_to_markdown

CASES = [
    ("linear", linear_functional(), (1.0,)),
    ("thm31 (a=2)", catalog_build("thm31", a=2.0), (1.0,)),
    ("thm33 (eta=1e-4, mu=2e-4)", catalog_build("thm33"), (1.0, -1.0)),
]

reports = {}
for label, f, h_list in CASES:
    rep = membership_report(f, 2.0, deltas=(0.1, 0.5), h_list=h_list)
    reports[label] = rep
    flags = rep.flags
    print(f"{label:28s} order-2: {str(flags['in_base']):8s} "
          f"strong (2,2): {str(flags['ssgd_pp']):8s} "
          f"higher-order union: {flags['in_plus']}")

print()
print("thm31 separates the order-2 class from the strong order-(2,2) class:",
      reports["thm31 (a=2)"].flags["in_base"].value == "yes"
      and reports["thm31 (a=2)"].flags["ssgd_pp"].value == "no")
print("thm33 separates the strong class from the higher-order union:     ",
      reports["thm33 (eta=1e-4, mu=2e-4)"].flags["ssgd_pp"].value == "yes"
      and reports["thm33 (eta=1e-4, mu=2e-4)"].flags["in_plus"].value == "no")

print()
print("Full evidence for the cusp example:")
print()
print(report_to_markdown(reports["thm33 (eta=1e-4, mu=2e-4)"]))
