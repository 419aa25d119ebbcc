"""Forecast error functionals and Monte-Carlo aggregation."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

SPLINE_METHODS = ("cubic", "pchip", "linear")


class BothZero(ZeroDivisionError):
    """Both forecasts vanish, so the normalized discrepancy is undefined."""


@dataclass(frozen=True)
class TrialReport:
    e_bl: float
    e_spline: tuple
    l: int

    def __post_init__(self):
        vals = (self.e_bl, *self.e_spline)
        if len(self.e_spline) != 3 or not all(math.isfinite(v) and v >= 0 for v in vals):
            raise ValueError(f"errors must be three-plus-one finite nonnegative values, got {vals}")


@dataclass(frozen=True)
class RatioRow:
    l: int
    ratios: tuple
    mean_bl: float
    se_bl: float
    mean_spline: tuple
    se_spline: tuple
    trials: int


@dataclass(frozen=True)
class BenchmarkTable:
    rows: dict
    trials: int
    config: dict = field(default_factory=dict)

    def ratio(self, l: int, method: str = "cubic") -> float:
        return self.rows[l].ratios[SPLINE_METHODS.index(method)]


def _window(seq, l):
    v = np.asarray(seq, dtype=float).reshape(-1)
    if v.size < l:
        raise ValueError(f"sequence has {v.size} values, horizon needs {l}")
    return v[:l]


def horizon_error(truth, forecast, l: int) -> float:
    """Euclidean distance between the first ``l`` future values."""
    if l < 1:
        raise ValueError(f"horizon must be >= 1, got {l}")
    d = _window(truth, l) - _window(forecast, l)
    return float(np.sqrt(np.dot(d, d)))


def _mean_se(values):
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def aggregate_ratios(trials, config=None) -> BenchmarkTable:
    """Ratio of mean errors, mean(e_bl) / mean(e_d), per horizon and method.

    Means use exactly rounded summation, so the result does not depend on
    the order of ``trials``.
    """
    trials = list(trials)
    if not trials:
        raise ValueError("no trials to aggregate")
    by_l = defaultdict(list)
    for rep in trials:
        by_l[rep.l].append(rep)
    rows = {}
    for l in sorted(by_l):
        reps = by_l[l]
        mean_bl, se_bl = _mean_se([r.e_bl for r in reps])
        stats = [_mean_se([r.e_spline[d] for r in reps]) for d in range(3)]
        ratios = tuple(mean_bl / m if m > 0 else math.inf for m, _ in stats)
        rows[l] = RatioRow(l=l, ratios=ratios, mean_bl=mean_bl, se_bl=se_bl,
                           mean_spline=tuple(m for m, _ in stats),
                           se_spline=tuple(s for _, s in stats), trials=len(reps))
    counts = {r.trials for r in rows.values()}
    return BenchmarkTable(rows=rows, trials=max(counts), config=dict(config or {}))


def truncation_discrepancy(f1, f2, l: int) -> float:
    """2 |f1 - f2| / (|f1| + |f2|) over t = 1..l; lies in [0, 2]."""
    a, b = _window(f1, l), _window(f2, l)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    if scale == 0.0:
        raise BothZero("both forecasts are identically zero")
    # Rescale so tiny forecasts do not underflow in the norms.
    a, b = a / scale, b / scale
    return float(2.0 * np.linalg.norm(a - b) / (np.linalg.norm(a) + np.linalg.norm(b)))
