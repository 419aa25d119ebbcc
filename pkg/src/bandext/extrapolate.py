"""Band-limited extension of a finite past record."""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .kernel import (BandParams, InvalidParams, PastSignal, assemble_rhs,
                     build_operator, rhs_matrix)
from .solver import (DEFAULT_COND_THRESHOLD, SolveReport, _factor,
                     _solve_factored, _system_matrix, solve_direct,
                     solve_neumann, tail_extension)

DEFAULT_NEUMANN_DEPTH = 200


@dataclass(frozen=True)
class Extension:
    forecast: np.ndarray
    params: BandParams
    diagnostics: SolveReport


_op_cache = {}
_op_lock = threading.Lock()


def _operator(omega, n):
    key = (float(omega), int(n))
    with _op_lock:
        op = _op_cache.get(key)
        if op is None:
            op = _op_cache[key] = build_operator(omega, n)
    return op


def truncate_input(x, n: int) -> PastSignal:
    """Keep the samples at t >= -n and drop older history."""
    if n < 0:
        raise InvalidParams(f"n must be >= 0, got {n!r}")
    v = x.values if isinstance(x, PastSignal) else np.asarray(x, dtype=float).reshape(-1)
    return PastSignal(v[max(0, v.size - (n + 1)):])


def discarded_norm(x, n: int) -> float:
    """l2 norm of the history that ``truncate_input(x, n)`` drops."""
    v = x.values if isinstance(x, PastSignal) else np.asarray(x, dtype=float).reshape(-1)
    return float(np.linalg.norm(v[:max(0, v.size - (n + 1))]))


def extrapolate(x, p: BandParams, method: str = "direct", depth: int = DEFAULT_NEUMANN_DEPTH,
                allow_unregularized: bool = False,
                cond_threshold: float = DEFAULT_COND_THRESHOLD) -> Extension:
    """Forecast x(t), t = 1..p.horizon, by the optimal band-limited extension.

    The record is truncated to its last ``p.n_trunc + 1`` samples. Values
    beyond ``t = n_trunc`` come from the tail formula ``b(t)/(1+rho)``, which
    carries only the truncated-input information and is less accurate.

    With ``rho == 0`` the solve goes ahead unless the system is
    ill-conditioned, in which case ``NearSingular`` is raised;
    ``allow_unregularized=True`` disables that check.
    """
    x = truncate_input(x, p.n_trunc)
    n, horizon = p.n_trunc, p.horizon
    op = _operator(p.omega, n)
    b = assemble_rhs(x, p.omega, max(n, horizon))
    if method == "direct":
        report = solve_direct(op, b, p.rho,
                              cond_threshold=None if allow_unregularized else cond_threshold)
    elif method == "neumann":
        report = solve_neumann(op, b, p.rho, depth)
    else:
        raise InvalidParams(f"unknown method {method!r}; expected 'direct' or 'neumann'")
    y = report.y_head
    if horizon > n:
        y = np.concatenate([y, tail_extension(b, p.rho, n, horizon)])
    return Extension(forecast=y[:horizon], params=p, diagnostics=report)


def _modulate(v):
    # (-1)^t with t = 0 at the last stored sample.
    sign = np.where((np.arange(v.size) - (v.size - 1)) % 2 == 0, 1.0, -1.0)
    return v * sign


def extrapolate_highband(x, p: BandParams, method: str = "direct", **kw) -> Extension:
    """Extension whose spectrum sits in [-pi, -pi+omega] U [pi-omega, pi]."""
    v = x.values if isinstance(x, PastSignal) else np.asarray(x, dtype=float).reshape(-1)
    ext = extrapolate(PastSignal(_modulate(v)), p, method=method, **kw)
    t = np.arange(1, ext.forecast.size + 1)
    forecast = np.where(t % 2 == 0, 1.0, -1.0) * ext.forecast
    return Extension(forecast=forecast, params=p, diagnostics=ext.diagnostics)


class Forecaster:
    """Precomputed linear forecast map for many records of the same length.

    The band-limited forecast is linear in the past record, so for fixed
    parameters it is a ``horizon x (n_past+1)`` matrix. Building it costs one
    factorization; applying it to a batch of records is a matrix product.
    """

    def __init__(self, p: BandParams, n_past: int | None = None):
        self.params = p
        n = p.n_trunc
        self.n_past = n if n_past is None else min(int(n_past), n)
        t_max = max(n, p.horizon)
        h = rhs_matrix(p.omega, self.n_past, t_max)
        kind, fac = _factor(_system_matrix(_operator(p.omega, n), p.rho))
        head = _solve_factored(kind, fac, h[:n])
        rows = [head]
        if p.horizon > n:
            rows.append(h[n:p.horizon] / (1.0 + p.rho))
        self.matrix = np.vstack(rows)[:p.horizon]
        self.matrix.flags.writeable = False

    def __call__(self, past):
        """Forecast for records stored along the last axis (oldest first)."""
        past = np.asarray(past, dtype=float)
        if past.shape[-1] != self.n_past + 1:
            past = past[..., -(self.n_past + 1):]
        return past @ self.matrix.T
