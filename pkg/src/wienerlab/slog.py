"""Signed log-space scalars: a value v is carried as (sign(v), log|v|).

The diagnostics integrate quantities like |f(x+eps) - f(x)|^q with f of size
exp(x^2/4); products, absolute powers and differences must therefore be done
on (sign, log) pairs, with plain arithmetic only used when it is safe.
Zero is (0, -inf).  All helpers are numpy-vectorized.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


def slog_of(v):
    """(sign, log|v|) of ordinary numbers."""
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore"):
        return np.sign(v), np.log(np.abs(v))


def slog_exp(sign, logabs):
    """Back to ordinary floats; overflows to +-inf beyond exp(709)."""
    with np.errstate(over="ignore"):
        return np.asarray(sign, dtype=float) * np.exp(logabs)


def slog_add(s1, l1, s2, l2):
    """(s1 e^l1) + (s2 e^l2) as a (sign, log) pair, without forming the values."""
    s1, l1, s2, l2 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s1, l1, s2, l2)))
    big_is_1 = (l1 > l2) | ((l1 == l2) & (s2 == 0))
    lb = np.where(big_is_1, l1, l2)
    ls = np.where(big_is_1, l2, l1)
    sb = np.where(big_is_1, s1, s2)
    ss = np.where(big_is_1, s2, s1)

    out_sign = np.where(sb != 0, sb, ss)
    with np.errstate(invalid="ignore", divide="ignore"):
        same = np.log1p(np.exp(ls - lb))          # magnitudes add
        diff = np.log1p(-np.exp(ls - lb))         # magnitudes cancel
    delta = np.where(sb * ss < 0, diff, same)
    delta = np.where(ss == 0, 0.0, delta)
    out_log = lb + delta
    # exact cancellation: equal magnitude, opposite sign
    cancel = (sb * ss < 0) & (ls == lb)
    out_sign = np.where(cancel, 0.0, out_sign)
    out_log = np.where(cancel, NEG_INF, out_log)
    # both zero
    zero = (sb == 0) & (ss == 0)
    out_sign = np.where(zero, 0.0, out_sign)
    out_log = np.where(zero, NEG_INF, out_log)
    return out_sign, out_log


def slog_sub(s1, l1, s2, l2):
    return slog_add(s1, l1, -np.asarray(s2, dtype=float), l2)


def slog_abs_pow(logabs, q: float):
    """log of |v|^q from log|v|; sign is +1 (or 0 at v = 0)."""
    logabs = np.asarray(logabs, dtype=float)
    return np.where(np.isneginf(logabs), 0.0, 1.0), q * logabs
