"""Solvers for the truncated regularized system ((1+rho)I - A_N) y = b."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kernel import InvalidParams, RhsVector, TruncatedOperator

DEFAULT_COND_THRESHOLD = 1e12


class NearSingular(ArithmeticError):
    """The unregularized system is too ill-conditioned to solve reliably."""

    def __init__(self, condition, threshold):
        self.condition = condition
        self.threshold = threshold
        super().__init__(
            f"condition estimate {condition:.3g} exceeds {threshold:.3g} with rho = 0; "
            "use rho > 0 or allow unregularized solves explicitly"
        )


@dataclass(frozen=True)
class SolveReport:
    y_head: np.ndarray
    residual_norm: float
    condition_estimate: float
    method: str
    correction_norm: float | None = None


def _system_matrix(op: TruncatedOperator, rho: float) -> np.ndarray:
    m = -op.entries
    m[np.diag_indices_from(m)] += 1.0 + rho
    return m


def _head(b, n):
    entries = b.entries if isinstance(b, RhsVector) else np.asarray(b, dtype=float)
    if entries.shape[-1] < n:
        raise InvalidParams(f"right-hand side has {entries.shape[-1]} entries, need at least {n}")
    return entries[..., :n]


def _factor(m):
    """Cholesky when it succeeds, LU with partial pivoting otherwise."""
    try:
        return "cholesky", scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return "lu", scipy.linalg.lu_factor(m, check_finite=False)


def _solve_factored(kind, fac, rhs):
    if kind == "cholesky":
        return scipy.linalg.cho_solve(fac, rhs, check_finite=False)
    return scipy.linalg.lu_solve(fac, rhs, check_finite=False)


def _condition(m, kind, fac, rho, iters=60):
    n = m.shape[0]
    if n == 1:
        return 1.0
    # Power iteration for the largest eigenvalue, inverse iteration for the
    # smallest. Rayleigh quotients keep both estimates inside the spectrum.
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_max = 0.0
    for _ in range(iters):
        w = m @ v
        lam_max = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    inv_rq = 0.0
    with np.errstate(all="ignore"):
        for _ in range(iters):
            w = _solve_factored(kind, fac, v)
            inv_rq = float(v @ w)
            nw = np.linalg.norm(w)
            if not np.isfinite(nw) or nw == 0.0:
                return math.inf
            v = w / nw
    if not np.isfinite(inv_rq) or inv_rq <= 0.0:
        return math.inf
    lam_min = 1.0 / inv_rq
    # Below this the smallest eigenvalue is not resolvable in double precision.
    if lam_min <= n * np.finfo(float).eps * abs(lam_max):
        return math.inf
    cond = lam_max / lam_min
    if rho > 0:
        cond = min(cond, (1.0 + rho) / rho)
    return max(cond, 1.0)


def condition_estimate(op: TruncatedOperator, rho: float) -> float:
    """Estimate cond_2 of ``(1+rho)I - A_N``.

    Returns ``inf`` when the smallest eigenvalue falls below what double
    precision can resolve. For ``rho > 0`` the result never exceeds
    ``(1+rho)/rho``.
    """
    if rho < 0:
        raise InvalidParams(f"rho must be >= 0, got {rho!r}")
    m = _system_matrix(op, rho)
    kind, fac = _factor(m)
    return _condition(m, kind, fac, rho)


def solve_direct(op: TruncatedOperator, b, rho: float,
                 cond_threshold: float | None = DEFAULT_COND_THRESHOLD) -> SolveReport:
    """Solve the n x n system by Cholesky (LU fallback).

    ``NearSingular`` is raised for ``rho == 0`` when the condition estimate
    exceeds ``cond_threshold``; pass ``None`` to skip the check.
    """
    if rho < 0 or not math.isfinite(rho):
        raise InvalidParams(f"rho must be >= 0, got {rho!r}")
    rhs = _head(b, op.n)
    m = _system_matrix(op, rho)
    kind, fac = _factor(m)
    cond = _condition(m, kind, fac, rho)
    if rho == 0 and cond_threshold is not None and cond > cond_threshold:
        raise NearSingular(cond, cond_threshold)
    y = _solve_factored(kind, fac, rhs)
    resid = float(np.linalg.norm(m @ y - rhs))
    return SolveReport(y_head=y, residual_norm=resid, condition_estimate=cond,
                       method=f"direct({kind})")


def solve_neumann(op: TruncatedOperator, b, rho: float, depth: int) -> SolveReport:
    """Partial sum ``sum_{k=0}^{depth} A_rho^k a_rho`` of the Neumann series."""
    if not rho > 0:
        raise InvalidParams(f"Neumann iteration needs rho > 0, got {rho!r}")
    if depth < 0:
        raise InvalidParams(f"depth must be >= 0, got {depth!r}")
    rhs = _head(b, op.n)
    a = op.entries / (1.0 + rho)
    term = rhs / (1.0 + rho)
    y = term.copy()
    for _ in range(depth):
        term = a @ term
        y += term
    m = _system_matrix(op, rho)
    resid = float(np.linalg.norm(m @ y - rhs))
    return SolveReport(y_head=y, residual_norm=resid,
                       condition_estimate=condition_estimate(op, rho),
                       method=f"neumann({depth})",
                       correction_norm=float(np.linalg.norm(term)))


def tail_extension(b, rho: float, n: int, l: int) -> np.ndarray:
    """Solution values for t = n+1..l, where the truncated operator vanishes."""
    entries = b.entries if isinstance(b, RhsVector) else np.asarray(b, dtype=float)
    if l <= n:
        raise InvalidParams(f"tail requested for l={l} <= n={n}")
    if entries.shape[-1] < l:
        raise InvalidParams(f"right-hand side has {entries.shape[-1]} entries, need {l}")
    return entries[..., n:l] / (1.0 + rho)
