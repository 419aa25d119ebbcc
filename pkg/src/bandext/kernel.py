"""Low-pass sinc kernel, truncated operator and right-hand side.

Time convention used throughout the package: ``t = 0`` is the last
observation, so element ``k`` of a stored past record of length ``n + 1``
sits at time ``t = k - n``. Future times start at ``t = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidParams(ValueError):
    """Raised when band, regularization or horizon parameters are invalid."""


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if not (0.0 < omega < math.pi):
        raise InvalidParams(f"omega must lie in the open interval (0, pi), got {omega!r}")
    return omega


@dataclass(frozen=True)
class BandParams:
    """Band edge, regularization weight and the two horizons."""

    omega: float
    rho: float = 0.4
    n_trunc: int = 50
    horizon: int = 12

    def __post_init__(self):
        _check_omega(self.omega)
        if not math.isfinite(self.rho) or self.rho < 0:
            raise InvalidParams(f"rho must be >= 0, got {self.rho!r}")
        if int(self.n_trunc) != self.n_trunc or self.n_trunc < 1:
            raise InvalidParams(f"n_trunc must be a positive integer, got {self.n_trunc!r}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise InvalidParams(f"horizon must be a positive integer, got {self.horizon!r}")


@dataclass(frozen=True, eq=False)
class PastSignal:
    """Observations x(t) for t = -n..0, oldest first."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size < 1:
            raise InvalidParams("past signal needs at least one sample")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise InvalidParams(f"non-finite sample at storage index {bad}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        """History depth: the oldest sample sits at t = -n."""
        return self.values.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(-self.n, 1)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Dense symmetric Toeplitz matrix with entries h(t - m), 1 <= t, m <= n."""

    omega: float
    first_row: np.ndarray

    @property
    def n(self) -> int:
        return self.first_row.size

    @property
    def entries(self) -> np.ndarray:
        # Every entry is read from first_row, so symmetry is exact.
        idx = np.arange(self.n)
        return self.first_row[np.abs(idx[:, None] - idx[None, :])]

    def matvec(self, v):
        return self.entries @ v


@dataclass(frozen=True, eq=False)
class RhsVector:
    """Values b(t) = sum_m x(m) h(t - m) for t = 1..t_max."""

    entries: np.ndarray

    @property
    def t_max(self) -> int:
        return self.entries.shape[-1]


def sinc(u):
    """Unnormalized sinc, ``sin(u)/u`` with value 1 at ``u = 0``.

    Works on scalars and arrays.
    """
    u = np.asarray(u, dtype=float)
    zero = u == 0
    safe = np.where(zero, 1.0, u)
    out = np.where(zero, 1.0, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


def lowpass_coeff(omega, t):
    """Impulse response of the ideal low-pass filter with band edge ``omega``.

    ``h(t) = (omega/pi) * sinc(omega*t)``; ``t`` may be an integer array.
    """
    omega = _check_omega(omega)
    return omega / math.pi * sinc(omega * np.asarray(t, dtype=float))


def build_operator(omega: float, n: int) -> TruncatedOperator:
    omega = _check_omega(omega)
    if int(n) != n or n < 1:
        raise InvalidParams(f"operator dimension must be a positive integer, got {n!r}")
    row = np.asarray(lowpass_coeff(omega, np.arange(int(n))), dtype=float).reshape(-1)
    row.flags.writeable = False
    return TruncatedOperator(omega=omega, first_row=row)


def rhs_matrix(omega: float, n_past: int, t_max: int) -> np.ndarray:
    """Matrix H with ``b = H @ x`` for a past record of depth ``n_past``.

    Row ``t - 1`` holds ``h(t - m)`` for ``m = -n_past..0``.
    """
    omega = _check_omega(omega)
    if t_max < 1:
        raise InvalidParams(f"t_max must be >= 1, got {t_max!r}")
    # h(t - m) for storage column j (m = j - n_past) depends on t + n_past - j >= 1.
    coeff = lowpass_coeff(omega, np.arange(t_max + n_past + 1))
    t = np.arange(1, t_max + 1)
    j = np.arange(n_past + 1)
    return coeff[t[:, None] + n_past - j[None, :]]


def assemble_rhs(x: PastSignal, omega: float, t_max: int) -> RhsVector:
    if not isinstance(x, PastSignal):
        x = PastSignal(x)
    h = rhs_matrix(omega, x.n, int(t_max))
    return RhsVector(entries=h @ x.values)
