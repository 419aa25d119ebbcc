"""Reference extrapolators: causal moving average followed by splines.

All routines work along the last axis, so a batch of records stacked in a
2-D array is processed in one call. Knots sit at the integer times
t = -n..0 (unit spacing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TooFewKnots(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SmoothedSignal:
    values: np.ndarray
    window: int

    @property
    def n(self) -> int:
        return self.values.shape[-1] - 1


def _values(xs):
    if isinstance(xs, SmoothedSignal):
        return xs.values
    return np.asarray(getattr(xs, "values", xs), dtype=float)


def moving_average(x, w: int) -> SmoothedSignal:
    """Causal moving average with the truncation-aware divisor.

    xbar(t) = sum_{k=max(t-w, -n)}^{t} x(k) / min(w, t+n+1)

    The sum has up to w+1 terms while the divisor never exceeds w; the
    formula is applied as written.
    """
    if int(w) != w or w < 1:
        raise ValueError(f"window must be a positive integer, got {w!r}")
    w = int(w)
    v = np.asarray(getattr(x, "values", x), dtype=float)
    size = v.shape[-1]
    k = np.arange(size)  # k = t + n
    total = np.zeros_like(v)
    for lag in range(min(w, size - 1) + 1):
        shifted = np.zeros_like(v)
        shifted[..., lag:] = v[..., :size - lag]
        total += shifted
    return SmoothedSignal(values=total / np.minimum(w, k + 1), window=w)


def _knot_times(size):
    return np.arange(-(size - 1), 1, dtype=float)


def notaknot_second_derivatives(y):
    """Second derivatives at the knots of the not-a-knot cubic spline."""
    y = np.asarray(y, dtype=float)
    size = y.shape[-1]
    if size < 4:
        raise TooFewKnots(f"not-a-knot spline needs at least 4 knots, got {size}")
    n = size - 1
    r = 6.0 * (y[..., 2:] - 2.0 * y[..., 1:-1] + y[..., :-2])  # r[i-1] for knot i
    m = np.zeros_like(y)
    # With unit spacing the end conditions M0 - 2M1 + M2 = 0 collapse the
    # first and last interior equations to 6 M1 = r1 and 6 M_{n-1} = r_{n-1}.
    m[..., 1] = r[..., 0] / 6.0
    m[..., n - 1] = r[..., n - 2] / 6.0
    if n >= 4:
        # M_{i-1} + 4 M_i + M_{i+1} = r_i for i = 2..n-2 (Thomas algorithm).
        rhs = r[..., 1:n - 2].copy()
        rhs[..., 0] -= m[..., 1]
        rhs[..., -1] -= m[..., n - 1]
        size_in = n - 3
        cp = np.empty(size_in)
        dp = np.empty_like(rhs)
        cp[0] = 1.0 / 4.0
        dp[..., 0] = rhs[..., 0] / 4.0
        for i in range(1, size_in):
            denom = 4.0 - cp[i - 1]
            cp[i] = 1.0 / denom
            dp[..., i] = (rhs[..., i] - dp[..., i - 1]) / denom
        sol = np.empty_like(rhs)
        sol[..., -1] = dp[..., -1]
        for i in range(size_in - 2, -1, -1):
            sol[..., i] = dp[..., i] - cp[i] * sol[..., i + 1]
        m[..., 2:n - 1] = sol
    m[..., 0] = 2.0 * m[..., 1] - m[..., 2]
    m[..., n] = 2.0 * m[..., n - 1] - m[..., n - 2]
    return m


def _piece_index(size, tq):
    # Knot k sits at t = k - (size-1); queries outside use the end pieces.
    idx = np.floor(tq).astype(int) + (size - 1)
    return np.clip(idx, 0, size - 2)


def spline_notaknot_eval(xs, tq):
    """Evaluate the not-a-knot spline through the knots at times ``tq``."""
    y = _values(xs)
    m = notaknot_second_derivatives(y)
    size = y.shape[-1]
    tq = np.asarray(tq, dtype=float)
    k = _piece_index(size, tq)
    s = tq - _knot_times(size)[k]
    y0, y1 = y[..., k], y[..., k + 1]
    m0, m1 = m[..., k], m[..., k + 1]
    slope = (y1 - y0) - (2.0 * m0 + m1) / 6.0
    return y0 + s * (slope + s * (m0 / 2.0 + s * (m1 - m0) / 6.0))


def spline_notaknot_extrapolate(xs, l: int):
    """Continue the last cubic piece to t = 1..l."""
    return spline_notaknot_eval(xs, np.arange(1, int(l) + 1))


def pchip_slopes(y):
    """Fritsch-Carlson derivatives at unit-spaced knots.

    Interior: harmonic mean of the adjacent secants when they share a
    strict sign, else 0. Ends: the three-point value (3*d0 - d1)/2, reset
    to 0 if its sign differs from d0, and limited to 3*d0 when d0 and d1
    differ in sign and it is larger in magnitude.
    """
    y = np.asarray(y, dtype=float)
    size = y.shape[-1]
    if size < 3:
        raise TooFewKnots(f"pchip needs at least 3 knots, got {size}")
    delta = np.diff(y, axis=-1)
    d = np.zeros_like(y)
    a, b = delta[..., :-1], delta[..., 1:]
    same = (np.sign(a) * np.sign(b)) > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        hm = 2.0 / (1.0 / a + 1.0 / b)
    d[..., 1:-1] = np.where(same, hm, 0.0)
    d[..., 0] = _pchip_end(delta[..., 0], delta[..., 1])
    d[..., -1] = _pchip_end(delta[..., -1], delta[..., -2])
    return d


def _pchip_end(d0, d1):
    d = (3.0 * d0 - d1) / 2.0
    d = np.where(np.sign(d) != np.sign(d0), 0.0, d)
    clamp = (np.sign(d0) != np.sign(d1)) & (np.abs(d) > np.abs(3.0 * d0))
    return np.where(clamp, 3.0 * d0, d)


def pchip_eval(xs, tq):
    y = _values(xs)
    d = pchip_slopes(y)
    size = y.shape[-1]
    tq = np.asarray(tq, dtype=float)
    k = _piece_index(size, tq)
    s = tq - _knot_times(size)[k]
    y0, y1 = y[..., k], y[..., k + 1]
    d0, d1 = d[..., k], d[..., k + 1]
    delta = y1 - y0
    c2 = 3.0 * delta - 2.0 * d0 - d1
    c3 = d0 + d1 - 2.0 * delta
    return y0 + s * (d0 + s * (c2 + s * c3))


def pchip_extrapolate(xs, l: int):
    return pchip_eval(xs, np.arange(1, int(l) + 1))


def linear_extrapolate(xs, l: int):
    y = _values(xs)
    if y.shape[-1] < 2:
        raise TooFewKnots(f"linear extrapolation needs at least 2 knots, got {y.shape[-1]}")
    t = np.arange(1, int(l) + 1, dtype=float)
    last = y[..., -1:]
    return last + t * (last - y[..., -2:-1])
