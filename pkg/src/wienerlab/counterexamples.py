"""The two catalog functionals that separate the membership classes.

Catalog key "thm31" (parameter a > 3/2): f grows like exp(x^2/4) x^-a above
the breakpoint sqrt(2a), glued below it to a bounded C^1 completion.  The
squared functional against the Gaussian weight decays like x^-2a, so Z and
its derivative have finite second moments; but any finite shift eps tilts the
weight by exp(eps x), so every squared difference quotient has a divergent
Gaussian expectation.

Catalog key "thm33" (parameters 0 < eta < mu < 1/e): f is sqrt(x)/log(x)^3 on
(0, mu], zero on the closed negative axis, and a compactly supported smooth
completion above mu.  The derivative behaves like the Bertrand scale
x^(-1/2) |log x|^-3 at the origin: its p-th moment converges exactly at
p = 2, which pins the functional inside the order-2 class but outside every
higher-order one.  The eta parameter is the shift window on which the
uniform-integrability argument operates.

The completions are the artifact's own closed forms (the construction only
requires bounded C^1, respectively smooth compact support, with C^1 gluing);
any conforming choice leaves the membership verdicts unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .functionals import Function1D, ScalarFunctional, linear_functional, zero_piece
from .quadrature import Integrand

QUARTER_LOG_2PI = 0.25 * math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# smooth completions
# ---------------------------------------------------------------------------

def smooth_completion_g(x0: float, v: float, d: float) -> Function1D:
    """Bounded C^1 extension to the left of x0 with g(x0) = v, g'(x0) = d.

    g(x) = v + d (x - x0) exp(-(x - x0)^2); sup|g| <= |v| + |d| (2e)^(-1/2).
    """
    def value(x):
        t = np.asarray(x, dtype=float) - x0
        return v + d * t * np.exp(-t * t)

    def deriv(x):
        t = np.asarray(x, dtype=float) - x0
        return d * (1.0 - 2.0 * t * t) * np.exp(-t * t)

    return Function1D(value=value, deriv=deriv)


def _mollifier_ramp(t):
    """Smooth 0 -> 1 ramp: exp(-1/t) / (exp(-1/t) + exp(-1/(1-t))) on (0, 1)."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    out[t <= 0.0] = 0.0
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def _mollifier_ramp_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    da = a / tm**2
    db = -b / (1.0 - tm) ** 2
    out[mid] = (da * b - a * db) / (a + b) ** 2
    return out


def smooth_completion_G(mu: float, v: float, d: float) -> Function1D:
    """Smooth compactly supported extension above mu with G(mu) = v, G'(mu) = d.

    G(x) = (v + d (x - mu)) chi(x), with chi a mollifier cutoff equal to 1 on
    (0, 1.5 mu] and 0 on [2 mu, inf); support is contained in (0, 2 mu].
    """
    if mu <= 0.0:
        raise ValueError("need mu > 0")
    half = 0.5 * mu

    def chi(x):
        return _mollifier_ramp((2.0 * mu - np.asarray(x, dtype=float)) / half)

    def chi_deriv(x):
        return _mollifier_ramp_deriv((2.0 * mu - np.asarray(x, dtype=float)) / half) * (-1.0 / half)

    def value(x):
        x = np.asarray(x, dtype=float)
        return (v + d * (x - mu)) * chi(x)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        return d * chi(x) + (v + d * (x - mu)) * chi_deriv(x)

    return Function1D(value=value, deriv=deriv)


# ---------------------------------------------------------------------------
# catalog entry "thm31"
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Thm31Params:
    a: float = 2.0

    def __post_init__(self):
        if not self.a > 1.5:
            raise ValueError(f"need a > 3/2, got a={self.a}")

    @property
    def breakpoint(self) -> float:
        return math.sqrt(2.0 * self.a)


def _thm31_right_piece(a: float) -> Function1D:
    """f(x) = exp(x^2/4) x^-a (2 pi)^(1/4) and its closed-form derivative."""
    def value(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            return np.exp(0.25 * x * x) * x ** (-a) * (2.0 * math.pi) ** 0.25

    def deriv(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            return (np.exp(0.25 * x * x) * (0.5 * x ** (1.0 - a) - a * x ** (-a - 1.0))
                    * (2.0 * math.pi) ** 0.25)

    def log_abs(x):
        x = np.asarray(x, dtype=float)
        return 0.25 * x * x - a * np.log(x) + QUARTER_LOG_2PI

    def sign(x):
        return np.ones_like(np.asarray(x, dtype=float))

    def log_abs_deriv(x):
        # f'(x) = exp(x^2/4) x^(-a-1) (x^2/2 - a) (2 pi)^(1/4)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return (0.25 * x * x - (a + 1.0) * np.log(x)
                    + np.log(np.abs(0.5 * x * x - a)) + QUARTER_LOG_2PI)

    def deriv_sign(x):
        x = np.asarray(x, dtype=float)
        return np.sign(0.5 * x * x - a)

    return Function1D(value=value, deriv=deriv, log_abs=log_abs, sign=sign,
                      log_abs_deriv=log_abs_deriv, deriv_sign=deriv_sign)


def build_thm31(params: Thm31Params) -> ScalarFunctional:
    """Gaussian-tail growth functional: finite order-2 seminorms, divergent
    squared difference quotients."""
    a = params.a
    x0 = params.breakpoint
    right = _thm31_right_piece(a)
    v = float(right.value(x0))
    d = float(right.deriv(x0))
    left = smooth_completion_g(x0, v, d)
    return ScalarFunctional(name="thm31", breakpoints=(x0,), pieces=(left, right),
                            params={"a": a})


def squared_quotient_floor_integrand(a: float, eps: float) -> Integrand:
    """Pointwise floor (up to a factor 4) of the squared difference quotient
    of the thm31 functional against the Gaussian weight, on [sqrt(2a), inf).

    With s = eps/2: exp(s^2/2 + s x) |(x+s)^(-a-1) ((x+s)^2/2 - a)|^2.
    Already weighted; integrate it directly over the semi-infinite domain.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    s = 0.5 * eps

    def log_eval(x):
        x = np.asarray(x, dtype=float)
        xs = x + s
        with np.errstate(divide="ignore"):
            log_psi = -(a + 1.0) * np.log(xs) + np.log(np.abs(0.5 * xs * xs - a))
        return np.ones_like(x), 0.5 * s * s + s * x + 2.0 * log_psi + 0.5 * math.log(2 * math.pi)

    return Integrand(log_eval=log_eval, domain=(math.sqrt(2 * a), math.inf),
                     name=f"quotient floor a={a} eps={eps}")


# ---------------------------------------------------------------------------
# catalog entry "thm33"
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Thm33Params:
    eta: float = 1e-4
    mu: float = 2e-4

    def __post_init__(self):
        result = validate_eta_mu(self.eta, self.mu)
        if not result.ok:
            raise ValueError(f"invalid (eta, mu): {result.failed}: {result.message}")


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    failed: Optional[str] = None
    message: str = ""


def _geometric_grid(lo: float, hi: float, n: int = 10_000) -> np.ndarray:
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


def _monotone(values: np.ndarray, increasing: bool) -> bool:
    d = np.diff(values)
    scale = np.maximum(np.abs(values[:-1]), np.abs(values[1:])) + 1e-300
    rel = d / scale
    return bool(np.all(rel >= -1e-12)) if increasing else bool(np.all(rel <= 1e-12))


def validate_eta_mu(eta: float, mu: float) -> ValidationResult:
    """Check the shift-window conditions on a geometric grid of 1e4 points.

    * weight_decreasing: x |log x|^8 increasing, i.e. 1/(x |log x|^8)
      decreasing, on (0, mu+eta); by calculus this forces mu + eta <= e^-8.
      It implies the same for exponents 5..7, which are grid-checked too.
    * entropy_increasing: -(x/log^6 x) log(x/log^6 x) increasing on (0, eta].
    * scale_increasing: x (log x)^-6 increasing on (0, eta].
    """
    if not (0.0 < eta < mu < math.exp(-1.0)):
        return ValidationResult(False, "ordering", "need 0 < eta < mu < 1/e")

    top = mu + eta
    xs = _geometric_grid(top * 1e-12, top)
    lx = np.log(xs)
    for i in (8, 5, 6, 7):
        log_map = -lx - i * np.log(np.abs(lx))  # log of 1/(x |log x|^i)
        if not _monotone(log_map, increasing=False):
            return ValidationResult(
                False, "weight_decreasing",
                f"1/(x |log x|^{i}) is not decreasing on (0, {top:g}); "
                f"requires mu + eta <= e^-8 ~= {math.exp(-8):.4e}")

    xs = _geometric_grid(eta * 1e-12, eta)
    lx = np.log(xs)
    log_y = lx - 6.0 * np.log(np.abs(lx))  # y = x / log^6 x
    entropy = np.exp(log_y) * (-log_y)
    if not _monotone(entropy, increasing=True):
        return ValidationResult(False, "entropy_increasing",
                                f"-(x/log^6 x) log(x/log^6 x) is not increasing on (0, {eta:g}]")
    if not _monotone(log_y, increasing=True):
        return ValidationResult(False, "scale_increasing",
                                f"x (log x)^-6 is not increasing on (0, {eta:g}]")
    return ValidationResult(True)


def _thm33_core_piece() -> Function1D:
    """F(x) = sqrt(x) / log(x)^3 on (0, mu], with logx-parameterized forms.

    F'(x) = 1/(2 sqrt(x) log(x)^3) - 3/(sqrt(x) log(x)^4)
          = (log x - 6) / (2 sqrt(x) log(x)^4).
    """
    def value(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.sqrt(x) / np.log(x) ** 3

    def deriv(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            lx = np.log(x)
            return (lx - 6.0) / (2.0 * np.sqrt(x) * lx ** 4)

    def log_abs(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return 0.5 * np.log(x) - 3.0 * np.log(np.abs(np.log(x)))

    def sign(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.sign(np.log(x)) * np.where(x > 0, 1.0, 0.0)

    def log_abs_deriv(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            lx = np.log(x)
            return np.log(np.abs(lx - 6.0)) - math.log(2.0) - 0.5 * lx - 4.0 * np.log(np.abs(lx))

    def deriv_sign(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.sign(np.log(x) - 6.0)

    def log_abs_logx(lx):
        lx = np.asarray(lx, dtype=float)
        return 0.5 * lx - 3.0 * np.log(np.abs(lx))

    def sign_logx(lx):
        return np.sign(np.asarray(lx, dtype=float))

    def log_abs_deriv_logx(lx):
        lx = np.asarray(lx, dtype=float)
        return np.log(np.abs(lx - 6.0)) - math.log(2.0) - 0.5 * lx - 4.0 * np.log(np.abs(lx))

    def deriv_sign_logx(lx):
        return np.sign(np.asarray(lx, dtype=float) - 6.0)

    return Function1D(value=value, deriv=deriv, log_abs=log_abs, sign=sign,
                      log_abs_deriv=log_abs_deriv, deriv_sign=deriv_sign,
                      log_abs_logx=log_abs_logx, sign_logx=sign_logx,
                      log_abs_deriv_logx=log_abs_deriv_logx, deriv_sign_logx=deriv_sign_logx)


def build_thm33(params: Thm33Params) -> ScalarFunctional:
    """Origin-cusp functional: order-2 seminorms finite, every higher order
    divergent, with uniformly integrable squared quotients on the eta window."""
    mu = params.mu
    core = _thm33_core_piece()
    v = float(core.value(mu))
    d = float(core.deriv(mu))
    tail = smooth_completion_G(mu, v, d)
    return ScalarFunctional(name="thm33", breakpoints=(0.0, mu),
                            pieces=(zero_piece(), core, tail),
                            non_differentiable=frozenset({0.0}),
                            singular_points=frozenset({0.0}),
                            window=params.eta,
                            params={"eta": params.eta, "mu": mu})


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def catalog_build(name: str, **params) -> ScalarFunctional:
    """Build a catalog functional by name: linear, thm31 (a), thm33 (eta, mu)."""
    if name == "linear":
        return linear_functional()
    if name == "thm31":
        return build_thm31(Thm31Params(**params))
    if name == "thm33":
        return build_thm33(Thm33Params(**params))
    raise KeyError(f"unknown catalog functional {name!r}; "
                   "known: linear, thm31, thm33")
