"""Decision procedures on top of the quadrature verdicts.

Everything here renders a limit statement falsifiable at desk scale:

* sobolev_seminorm -- the two Gaussian moments E|Z|^p, E|f'(W_1)|^p behind
  the order-p seminorm.  Scalar functionals Z = f(W_T) are identified with
  the unit-direction gradient, so the gradient norm is |f'(W_T)| and the
  pairing with a direction h is f'(W_T) h(T).
* lq_diffquot_norm / ssgd_test -- L^q norms of difference quotients along a
  shift of size eps, optionally centered at the derivative pairing; the
  order-(p,q) differentiability verdict demands a decreasing tail over the
  eps grid and a final residual below tol_ssgd.
* dvp_uniform_integrability_test -- de la Vallee-Poussin test with
  psi(y) = y |log y|: the sup over the eps window of E[psi(|X_eps|^2)] must
  stay finite, reported piece by piece (below / inside / above the core
  support), with the Bertrand majorants as a cross-check.
* cameron_martin_check / sgd_probability_test -- Monte Carlo sides: the
  shift-versus-reweighting identity and convergence in probability.
* membership_report -- assembles the evidence into the three flags and
  enforces the inclusion chain on its own output.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import quadrature as quad
from .functionals import (CylindricalFunctional, ScalarFunctional,
                          difference_quotient_slog)
from .quadrature import Integrand, IntegralVerdict, Verdict, gauss_log_pdf
from .slog import slog_abs_pow, slog_sub
from .wiener import CameronMartinDirection, TimeGrid, cm_inner, sample_increments

TOL_SSGD = 1e-3


class Flag(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EpsilonGrid:
    """Decreasing shift sizes in (0, 1) standing in for the limit eps -> 0."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals or any(not 0.0 < v < 1.0 for v in vals):
            raise ValueError("eps values must lie in (0, 1)")
        if any(a <= b for a, b in zip(vals, vals[1:])):
            raise ValueError("eps values must be strictly decreasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def default(cls) -> "EpsilonGrid":
        return cls.from_krange(1, 8)

    @classmethod
    def from_krange(cls, k1: int, k2: int) -> "EpsilonGrid":
        if not 1 <= k1 <= k2:
            raise ValueError("need 1 <= k1 <= k2")
        return cls(tuple(2.0 ** (-k) for k in range(k1, k2 + 1)))

    def capped(self, limit: Optional[float]) -> "EpsilonGrid":
        """Intersect with (0, limit); rescale into the window if that empties it."""
        if limit is None or not math.isfinite(limit):
            return self
        kept = tuple(v for v in self.values if v < limit)
        if kept:
            return EpsilonGrid(kept)
        return EpsilonGrid(tuple(limit * 2.0 ** (-k) for k in range(1, len(self.values) + 1)))


@dataclass(frozen=True)
class LqRow:
    quantity: str
    q: Optional[float]
    epsilon: Optional[float]
    verdict: IntegralVerdict

    @property
    def value(self) -> Optional[float]:
        return self.verdict.value

    @property
    def abs_error(self) -> Optional[float]:
        return self.verdict.abs_error


@dataclass(frozen=True)
class LqTable:
    rows: tuple

    def __iter__(self):
        return iter(self.rows)

    def filter(self, quantity: str) -> "LqTable":
        return LqTable(tuple(r for r in self.rows if r.quantity == quantity))

    def values(self):
        return [r.value for r in self.rows]


# ---------------------------------------------------------------------------
# integrand factories for scalar functionals
# ---------------------------------------------------------------------------

def _scalar_cuts(f: ScalarFunctional, shifts=()) -> tuple:
    pts = set(f.breakpoints)
    for s in shifts:
        pts.update(b - s for b in f.breakpoints)
    # fold in the smooth-cutoff shoulders of a compact completion, if any
    if "mu" in f.params:
        mu = f.params["mu"]
        extra = {1.5 * mu, 2.0 * mu}
        pts.update(extra)
        for s in shifts:
            pts.update(b - s for b in extra)
    return tuple(sorted(pts))


def abs_value_pow_integrand(f: ScalarFunctional, p: float) -> Integrand:
    """|f(x)|^p as a log-capable integrand."""
    def log_eval(x):
        _, logabs = slog_abs_pow(f.log_abs(x), p)
        return np.ones_like(np.asarray(x, dtype=float)), logabs

    neglog = None
    if f.has_logx_forms():
        def neglog(u):
            u = np.asarray(u, dtype=float)
            _, logabs = f.slog_value_at_logx(-u)
            return np.ones_like(u), p * np.asarray(logabs, dtype=float)

    return Integrand(log_eval=log_eval, breakpoints=_scalar_cuts(f),
                     singular_points=tuple(f.singular_points), neglog_eval=neglog,
                     name=f"|{f.name}|^{p}")


def abs_deriv_pow_integrand(f: ScalarFunctional, p: float) -> Integrand:
    """|f'(x)|^p as a log-capable integrand."""
    def log_eval(x):
        _, logabs = slog_abs_pow(f.log_abs_deriv(x), p)
        return np.ones_like(np.asarray(x, dtype=float)), logabs

    neglog = None
    if f.has_logx_forms():
        def neglog(u):
            u = np.asarray(u, dtype=float)
            _, logabs = f.slog_deriv_at_logx(-u)
            return np.ones_like(u), p * np.asarray(logabs, dtype=float)

    return Integrand(log_eval=log_eval, breakpoints=_scalar_cuts(f),
                     singular_points=tuple(f.singular_points), neglog_eval=neglog,
                     name=f"|{f.name}'|^{p}")


def _residual_slog(f: ScalarFunctional, x, eps: float, c: float, centered: bool):
    s, l = difference_quotient_slog(f, x, eps, c)
    if centered:
        ds = np.sign(c) * f.deriv_sign(x)
        dl = f.log_abs_deriv(x) + math.log(abs(c)) if c != 0.0 else np.full_like(l, -np.inf)
        s, l = slog_sub(s, l, ds, dl)
    return s, l


def _residual_slog_neglog(f: ScalarFunctional, u, eps: float, c: float, centered: bool):
    """Residual at x = exp(-u), evaluating the f(x) side in log-x form."""
    u = np.asarray(u, dtype=float)
    with np.errstate(under="ignore"):
        x = np.exp(-u)
    s1, l1 = f.value_sign(x + eps * c), f.log_abs(x + eps * c)
    s0, l0 = f.slog_value_at_logx(-u)
    s, l = slog_sub(s1, l1, s0, l0)
    l = l - math.log(eps)
    if centered:
        ds0, dl0 = f.slog_deriv_at_logx(-u)
        if c != 0.0:
            s, l = slog_sub(s, l, np.sign(c) * np.asarray(ds0, dtype=float),
                            np.asarray(dl0, dtype=float) + math.log(abs(c)))
    return s, l


def diffquot_pow_integrand(f: ScalarFunctional, q: float, eps: float, c: float,
                           centered: bool) -> Integrand:
    """|(f(x+eps c) - f(x))/eps - centered * c f'(x)|^q."""
    def log_eval(x):
        s, l = _residual_slog(f, np.asarray(x, dtype=float), eps, c, centered)
        _, logabs = slog_abs_pow(l, q)
        return np.ones_like(np.asarray(x, dtype=float)), logabs

    neglog = None
    if f.has_logx_forms():
        def neglog(u):
            _, l = _residual_slog_neglog(f, u, eps, c, centered)
            _, logabs = slog_abs_pow(l, q)
            return np.ones_like(np.asarray(u, dtype=float)), logabs

    return Integrand(log_eval=log_eval, breakpoints=_scalar_cuts(f, shifts=(eps * c,)),
                     singular_points=tuple(f.singular_points), neglog_eval=neglog,
                     name=f"|X_eps[{f.name}]|^{q} eps={eps:g}")


# ---------------------------------------------------------------------------
# seminorms and L^q quotient norms
# ---------------------------------------------------------------------------

def sobolev_seminorm(f: ScalarFunctional, p: float, *,
                     atol: float = quad.DEFAULT_ATOL, rtol: float = quad.DEFAULT_RTOL,
                     budget: int = quad.DEFAULT_BUDGET):
    """Verdicts for (E|Z|^p, E ||grad Z||_H^p) with Z = f(W_1).

    Under the unit-direction identification the gradient norm is |f'(W_1)|.
    """
    if not p > 1.0:
        raise ValueError("need p > 1")
    value_part = quad.gaussian_expectation(abs_value_pow_integrand(f, p),
                                           atol=atol, rtol=rtol, budget=budget)
    deriv_part = quad.gaussian_expectation(abs_deriv_pow_integrand(f, p),
                                           atol=atol, rtol=rtol, budget=budget)
    return value_part, deriv_part


def lq_diffquot_norm(f: ScalarFunctional, q: float, eps: float, c: float, *,
                     centered: bool = False,
                     atol: float = quad.DEFAULT_ATOL, rtol: float = quad.DEFAULT_RTOL,
                     budget: int = quad.DEFAULT_BUDGET) -> IntegralVerdict:
    """E[ |X_eps - (c f'(W_1) if centered else 0)|^q ] for Z = f(W_1)."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if q <= 0.0:
        raise ValueError("need q > 0")
    g = diffquot_pow_integrand(f, q, eps, c, centered)
    return quad.gaussian_expectation(g, atol=atol, rtol=rtol, budget=budget)


@dataclass(frozen=True)
class SsgdResult:
    q: float
    h_T: float
    table: LqTable
    verdict: Flag
    final_residual: Optional[float]


def _tail_decreasing(vals, span: int = 4) -> bool:
    tail = vals[-span:]
    return all(b <= a * (1.0 + 1e-9) + 1e-300 for a, b in zip(tail, tail[1:]))


def ssgd_test(f: ScalarFunctional, p: float, q: float, h_T: float, grid: EpsilonGrid, *,
              tol_ssgd: float = TOL_SSGD,
              atol: float = quad.DEFAULT_ATOL, rtol: float = quad.DEFAULT_RTOL,
              budget: int = quad.DEFAULT_BUDGET) -> SsgdResult:
    """Does E|X_eps - f'(W_1) h_T|^q -> 0 along the grid?

    Yes needs every row Converged, a nonincreasing tail over the last four
    rows and a final residual below tol_ssgd; any Diverged row (or a plateau
    at or above tol_ssgd) is a No; anything else stays Unknown.
    """
    if not 0.0 < q <= p:
        raise ValueError("need 0 < q <= p")
    grid = grid.capped(f.window / abs(h_T) if f.window and h_T != 0.0 else None)
    rows = []
    for eps in grid.values:
        v = lq_diffquot_norm(f, q, eps, h_T, centered=True,
                             atol=atol, rtol=rtol, budget=budget)
        rows.append(LqRow("diffquot_residual", q, eps, v))
    table = LqTable(tuple(rows))

    if any(r.verdict.diverged for r in rows):
        return SsgdResult(q, h_T, table, Flag.NO, None)
    if any(not r.verdict.converged for r in rows):
        return SsgdResult(q, h_T, table, Flag.UNKNOWN, None)
    # a row within the quadrature's absolute resolution is numerically zero
    floor = max(atol, 0.0)
    vals = [0.0 if abs(r.value) <= max(r.abs_error, floor) else abs(r.value) for r in rows]
    final = vals[-1]
    decreasing = _tail_decreasing(vals)
    if decreasing and final < tol_ssgd:
        return SsgdResult(q, h_T, table, Flag.YES, final)
    if final >= tol_ssgd and not decreasing:
        return SsgdResult(q, h_T, table, Flag.NO, final)
    return SsgdResult(q, h_T, table, Flag.UNKNOWN, final)


# ---------------------------------------------------------------------------
# de la Vallee-Poussin uniform integrability
# ---------------------------------------------------------------------------

def _psi_log(ly):
    """log of psi(y) = y |log y| given ly = log y (psi(0) = psi(1) = 0)."""
    ly = np.asarray(ly, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = ly + np.log(np.abs(ly))
    return np.where(np.isneginf(ly), -np.inf, out)


def _dvp_piece_integrand(f: ScalarFunctional, eps: float, c: float) -> Integrand:
    """psi(|X_eps|^2) phi(x), Gaussian weight included."""
    def log_eval(x):
        x = np.asarray(x, dtype=float)
        _, l = difference_quotient_slog(f, x, eps, c)
        logpsi = _psi_log(2.0 * l)
        return np.ones_like(x), logpsi + gauss_log_pdf(x)

    neglog = None
    if f.has_logx_forms():
        def neglog(u):
            u = np.asarray(u, dtype=float)
            _, l = _residual_slog_neglog(f, u, eps, c, centered=False)
            logpsi = _psi_log(2.0 * l)
            with np.errstate(under="ignore"):
                w = -0.5 * np.exp(-2.0 * u) - quad.LOG_SQRT_2PI
            return np.ones_like(u), logpsi + w

    return Integrand(log_eval=log_eval, breakpoints=_scalar_cuts(f, shifts=(eps * c,)),
                     singular_points=tuple(f.singular_points), neglog_eval=neglog,
                     name=f"psi(|X_eps|^2) eps={eps:g}")


def _dvp_pieces(f: ScalarFunctional, eps: float, h_T: float):
    """Named (label, lo, hi) integration pieces below/inside/above the core."""
    bps = sorted(f.breakpoints)
    lo_core = bps[0] if bps else 0.0
    hi_core = bps[-1] if len(bps) >= 2 else lo_core
    if h_T > 0.0:
        return [("below", -math.inf, lo_core),
                ("inside", lo_core, hi_core),
                ("above", hi_core, math.inf)]
    gap = eps * abs(h_T)
    return [("below", -math.inf, lo_core + gap),
            ("inside", lo_core + gap, hi_core + gap),
            ("above", hi_core + gap, math.inf)]


def _integrate_weighted_piece(g: Integrand, lo: float, hi: float, f: ScalarFunctional,
                              atol: float, rtol: float, budget: int) -> IntegralVerdict:
    if lo == -math.inf:
        return quad.integrate_semi_infinite(quad._reflected(g), -hi,
                                            atol=atol, rtol=rtol, budget=budget)
    if hi == math.inf:
        return quad.integrate_semi_infinite(g, lo, atol=atol, rtol=rtol, budget=budget)
    if lo == 0.0 and 0.0 in f.singular_points and hi < 1.0:
        half = 0.5 * hi
        near = quad.integrate_singular_origin(g, half, atol=0.5 * atol, rtol=rtol,
                                              budget=budget // 2)
        far = quad.integrate_adaptive(g, half, hi, atol=0.5 * atol, rtol=rtol,
                                      budget=budget // 2)
        if near.diverged:
            return near
        if far.diverged:
            return far
        if near.converged and far.converged:
            return IntegralVerdict(Verdict.CONVERGED, value=near.value + far.value,
                                   abs_error=near.abs_error + far.abs_error,
                                   n_evals=near.n_evals + far.n_evals)
        bad = near if not near.converged else far
        return bad
    return quad.integrate_adaptive(g, lo, hi, atol=atol, rtol=rtol, budget=budget)


@dataclass(frozen=True)
class DvpResult:
    h_T: float
    verdict: Flag
    sup_value: Optional[float]
    table: LqTable          # per-eps rows: below / inside / above / total
    bertrand_rows: LqTable  # majorant cross-check, exponents 5..8
    message: str = ""


def dvp_uniform_integrability_test(f: ScalarFunctional, h_T: float, grid: EpsilonGrid, *,
                                   atol: float = quad.DEFAULT_ATOL,
                                   rtol: float = quad.DEFAULT_RTOL,
                                   budget: int = quad.DEFAULT_BUDGET) -> DvpResult:
    """sup over the eps window of E[psi(|X_eps|^2)], psi(y) = y |log y|.

    Yes iff every piece of every row Converged and the sup is finite; the
    shifted-gap / core / tail decomposition mirrors the two sign cases of the
    shift endpoint.  A zero shift endpoint is trivially uniformly integrable.
    """
    if h_T == 0.0:
        return DvpResult(h_T, Flag.YES, 0.0, LqTable(()), LqTable(()),
                         "zero direction endpoint: X_eps vanishes identically")
    grid = grid.capped(f.window / abs(h_T) if f.window else None)
    rows = []
    sup_total = 0.0
    any_diverged = False
    any_unknown = False
    for eps in grid.values:
        g = _dvp_piece_integrand(f, eps, h_T)
        total = 0.0
        total_ok = True
        for label, lo, hi in _dvp_pieces(f, eps, h_T):
            if lo >= hi:
                continue
            v = _integrate_weighted_piece(g, lo, hi, f, atol, rtol, budget)
            rows.append(LqRow(f"dvp_{label}", 2.0, eps, v))
            if v.diverged:
                any_diverged = True
                total_ok = False
            elif not v.converged:
                any_unknown = True
                total_ok = False
            else:
                total += v.value
        if total_ok:
            rows.append(LqRow("dvp_total", 2.0, eps,
                              IntegralVerdict(Verdict.CONVERGED, value=total, abs_error=0.0)))
            sup_total = max(sup_total, total)

    # Bertrand majorants behind the inside-piece estimate
    bertrand = []
    if "mu" in f.params:
        mu = f.params["mu"]
        for i in range(5, 9):
            v = quad.integrate_singular_origin(quad.bertrand_integrand(float(i)), mu,
                                               atol=atol, rtol=rtol, budget=budget)
            bertrand.append(LqRow("bertrand_majorant", float(i), None, v))

    if any_diverged:
        flag, sup = Flag.NO, None
    elif any_unknown:
        flag, sup = Flag.UNKNOWN, None
    else:
        flag, sup = Flag.YES, sup_total
    return DvpResult(h_T, flag, sup, LqTable(tuple(rows)), LqTable(tuple(bertrand)))


# ---------------------------------------------------------------------------
# Monte Carlo checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CmCheckResult:
    lhs: float
    rhs: float
    se_lhs: float
    se_rhs: float
    n_samples: int

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def within_3se(self) -> bool:
        return self.gap <= 3.0 * (self.se_lhs + self.se_rhs)


def _batch_coordinates(Z: CylindricalFunctional, grid: TimeGrid, incs: np.ndarray) -> np.ndarray:
    from .wiener import wiener_integral_batch
    return np.column_stack([wiener_integral_batch(h, grid, incs) for h in Z.directions])


def cameron_martin_check(Z: CylindricalFunctional, h: CameronMartinDirection,
                         n_samples: int, seed: int) -> CmCheckResult:
    """Monte Carlo for E[Z(omega + h)] = E[Z(omega) exp(W(h) - ||h||^2/2)].

    Both sides ride the same paths (common random numbers); the shift acts on
    the coordinates exactly, W(h_i)(omega + h) = W(h_i)(omega) + <h_i, h>_H.
    """
    from .wiener import merged_grid
    grid = merged_grid(list(Z.directions) + [h])
    incs = sample_increments(grid, n_samples, seed)
    coords = _batch_coordinates(Z, grid, incs)
    shift = np.array([cm_inner(hi, h) for hi in Z.directions])
    lhs_samples = Z.poly(coords + shift)
    from .wiener import girsanov_log_weight_batch
    logw = girsanov_log_weight_batch(h, grid, incs)
    rhs_samples = Z.poly(coords) * np.exp(logw)
    n = float(n_samples)
    return CmCheckResult(
        lhs=float(np.mean(lhs_samples)),
        rhs=float(np.mean(rhs_samples)),
        se_lhs=float(np.std(lhs_samples, ddof=1) / math.sqrt(n)),
        se_rhs=float(np.std(rhs_samples, ddof=1) / math.sqrt(n)),
        n_samples=n_samples,
    )


def sgd_probability_test(Z: CylindricalFunctional, h: CameronMartinDirection,
                         grid: EpsilonGrid, delta: float, n_samples: int, seed: int):
    """Empirical P(|X_eps - <grad Z, h>| > delta) per eps; rows (eps, prob)."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    from .wiener import merged_grid
    tgrid = merged_grid(list(Z.directions) + [h])
    incs = sample_increments(tgrid, n_samples, seed)
    coords = _batch_coordinates(Z, tgrid, incs)
    shift = np.array([cm_inner(hi, h) for hi in Z.directions])
    pairing = np.zeros(coords.shape[0])
    for i, poly_i in enumerate(Z.gradient_polys()):
        pairing += np.asarray(poly_i(coords), dtype=float) * shift[i]
    base = np.asarray(Z.poly(coords), dtype=float)
    rows = []
    for eps in grid.values:
        shifted = np.asarray(Z.poly(coords + eps * shift), dtype=float)
        resid = (shifted - base) / eps - pairing
        rows.append((eps, float(np.mean(np.abs(resid) > delta))))
    return rows


# ---------------------------------------------------------------------------
# membership report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipReport:
    name: str
    params: dict
    p: float
    deltas: tuple
    h_list: tuple
    seminorms: dict          # exponent -> (value verdict, deriv verdict)
    lq_table: LqTable        # uncentered quotient norms at q' = (1+p)/2
    ssgd: dict               # (q, h_T) -> SsgdResult
    dvp: dict                # h_T -> DvpResult
    flags: dict              # "in_base" / "ssgd_pp" / "in_plus" -> Flag
    chain_violations: tuple
    notes: tuple = ()

    @property
    def consistent(self) -> bool:
        return not self.chain_violations


def _seminorm_flag(pair) -> Flag:
    if any(v.diverged for v in pair):
        return Flag.NO
    if all(v.converged for v in pair):
        return Flag.YES
    return Flag.UNKNOWN


def _combine_flags(flags) -> Flag:
    flags = list(flags)
    if any(fl == Flag.NO for fl in flags):
        return Flag.NO
    if flags and all(fl == Flag.YES for fl in flags):
        return Flag.YES
    return Flag.UNKNOWN


def membership_report(f: ScalarFunctional, p: float, deltas: Sequence[float] = (0.1, 0.5),
                      h_list: Sequence[float] = (1.0,),
                      grid: Optional[EpsilonGrid] = None, *,
                      extra_qs: Sequence[float] = (),
                      tol_ssgd: float = TOL_SSGD,
                      atol: float = quad.DEFAULT_ATOL, rtol: float = quad.DEFAULT_RTOL,
                      budget: int = quad.DEFAULT_BUDGET) -> MembershipReport:
    """Assemble the three-flag verdict chain for Z = f(W_1).

    in_base: order-p seminorm integrals both finite.
    ssgd_pp: L^p difference quotients converge to the derivative pairing for
             every tested direction endpoint (the order-(p,p) property).
    in_plus: sampled union over the delta list of the order-(p+delta)
             seminorms; one converged delta witnesses Yes, all tested deltas
             diverging reports No (the untested smaller deltas are recorded
             as sampled), anything else Unknown.
    """
    grid = grid or EpsilonGrid.default()
    notes = []

    seminorms = {p: sobolev_seminorm(f, p, atol=atol, rtol=rtol, budget=budget)}
    for d in deltas:
        seminorms[p + d] = sobolev_seminorm(f, p + d, atol=atol, rtol=rtol, budget=budget)

    q_mid = 0.5 * (1.0 + p)
    lq_rows = []
    for h_T in h_list:
        eff = grid.capped(f.window / abs(h_T) if f.window and h_T else None)
        for eps in eff.values:
            v = lq_diffquot_norm(f, q_mid, eps, h_T, centered=False,
                                 atol=atol, rtol=rtol, budget=budget)
            lq_rows.append(LqRow(f"diffquot_norm[h={h_T:g}]", q_mid, eps, v))

    ssgd = {}
    for q in sorted({q_mid, p, *extra_qs}):
        for h_T in h_list:
            ssgd[(q, h_T)] = ssgd_test(f, p, q, h_T, grid, tol_ssgd=tol_ssgd,
                                       atol=atol, rtol=rtol, budget=budget)

    dvp = {h_T: dvp_uniform_integrability_test(f, h_T, grid, atol=atol, rtol=rtol,
                                               budget=budget)
           for h_T in h_list}

    in_base = _seminorm_flag(seminorms[p])
    ssgd_pp = _combine_flags(ssgd[(p, h_T)].verdict for h_T in h_list)

    per_delta = {d: _seminorm_flag(seminorms[p + d]) for d in deltas}
    if any(fl == Flag.YES for fl in per_delta.values()):
        in_plus = Flag.YES
    elif per_delta and all(fl == Flag.NO for fl in per_delta.values()):
        in_plus = Flag.NO
        notes.append("in_plus: No over the sampled delta list "
                     f"{tuple(deltas)}; smaller deltas untested")
    else:
        in_plus = Flag.UNKNOWN

    # enforce the inclusion chain in_plus => ssgd_pp => in_base
    violations = []
    if in_plus == Flag.YES and ssgd_pp == Flag.UNKNOWN:
        ssgd_pp = Flag.YES
        notes.append("ssgd_pp upgraded: implied by in_plus")
    if ssgd_pp == Flag.YES and in_base == Flag.UNKNOWN:
        in_base = Flag.YES
        notes.append("in_base upgraded: implied by ssgd_pp")
    if in_plus == Flag.YES and ssgd_pp == Flag.NO:
        violations.append("in_plus is Yes but ssgd_pp is No")
    if ssgd_pp == Flag.YES and in_base == Flag.NO:
        violations.append("ssgd_pp is Yes but in_base is No")

    flags = {"in_base": in_base, "ssgd_pp": ssgd_pp, "in_plus": in_plus}
    return MembershipReport(
        name=f.name, params=dict(f.params), p=p, deltas=tuple(deltas),
        h_list=tuple(h_list), seminorms=seminorms, lq_table=LqTable(tuple(lq_rows)),
        ssgd=ssgd, dvp=dvp, flags=flags, chain_violations=tuple(violations),
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# evidence emission (CSV / Markdown)
# ---------------------------------------------------------------------------

CSV_HEADER = "quantity,q,epsilon,verdict,value,abs_error"


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def rows_to_csv(rows) -> str:
    """Fixed six-column evidence schema; floats use shortest-roundtrip repr."""
    lines = ["# schema=1", CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.quantity,
            _fmt(r.q),
            _fmt(r.epsilon),
            r.verdict.status,
            _fmt(r.verdict.value),
            _fmt(r.verdict.abs_error),
        ]))
    return "\n".join(lines) + "\n"


def report_evidence_rows(report: MembershipReport):
    rows = []
    for expo in sorted(report.seminorms):
        val, der = report.seminorms[expo]
        rows.append(LqRow("abs_moment", expo, None, val))
        rows.append(LqRow("deriv_moment", expo, None, der))
    rows.extend(report.lq_table.rows)
    for (q, h_T), res in sorted(report.ssgd.items()):
        for r in res.table.rows:
            rows.append(LqRow(f"diffquot_residual[h={h_T:g}]", q, r.epsilon, r.verdict))
    for h_T, res in sorted(report.dvp.items()):
        for r in res.table.rows:
            rows.append(LqRow(f"{r.quantity}[h={h_T:g}]", r.q, r.epsilon, r.verdict))
        rows.extend(res.bertrand_rows.rows)
    return rows


def report_to_csv(report: MembershipReport) -> str:
    return rows_to_csv(report_evidence_rows(report))


def report_to_markdown(report: MembershipReport) -> str:
    p = report.p
    lines = [
        f"# Membership report: {report.name}",
        "",
        f"parameters: {report.params or '(none)'}; p = {p:g}; "
        f"deltas = {list(report.deltas)}; h endpoints = {list(report.h_list)}",
        "",
        "## Verdict chain",
        "",
        "| space | flag |",
        "|---|---|",
        f"| order-{p:g} Sobolev class (seminorm finite) | {report.flags['in_base']} |",
        f"| order-({p:g},{p:g}) strong Gateaux class | {report.flags['ssgd_pp']} |",
        f"| union of higher-order classes (sampled deltas) | {report.flags['in_plus']} |",
        "",
    ]
    if report.chain_violations:
        lines += ["**Inconsistent report**: " + "; ".join(report.chain_violations), ""]
    for note in report.notes:
        lines.append(f"- {note}")
    if report.notes:
        lines.append("")
    lines += ["## Seminorm integrals", "",
              "| exponent | E|Z|^p | E|f'(W)|^p |", "|---|---|---|"]
    for expo in sorted(report.seminorms):
        val, der = report.seminorms[expo]
        def cell(v):
            return f"{v.value:.6g} (+-{v.abs_error:.1e})" if v.converged else v.status
        lines.append(f"| {expo:g} | {cell(val)} | {cell(der)} |")
    lines.append("")
    for (q, h_T), res in sorted(report.ssgd.items()):
        lines.append(f"## L^{q:g} residuals, h endpoint {h_T:g} -> {res.verdict}")
        lines.append("")
        lines.append("| eps | verdict | value |")
        lines.append("|---|---|---|")
        for r in res.table.rows:
            val = f"{r.value:.6g}" if r.verdict.converged else ""
            lines.append(f"| {r.epsilon:g} | {r.verdict.status} | {val} |")
        lines.append("")
    for h_T, res in sorted(report.dvp.items()):
        sup = f"{res.sup_value:.6g}" if res.sup_value is not None else "n/a"
        lines.append(f"## Uniform integrability (psi-test), h endpoint {h_T:g} -> "
                     f"{res.verdict} (sup {sup})")
        lines.append("")
    return "\n".join(lines) + "\n"
