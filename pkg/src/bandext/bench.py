"""Monte-Carlo comparison against spline baselines and the truncation study.

Trials are processed in fixed blocks of consecutive trial ids. A block's
result depends only on the configuration and its id range, so spreading
blocks over worker processes never changes the output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .baselines import (linear_extrapolate, moving_average, pchip_extrapolate,
                        spline_notaknot_extrapolate)
from .extrapolate import Forecaster
from .kernel import BandParams
from .metrics import (TrialReport, _mean_se, aggregate_ratios,
                      truncation_discrepancy)
from .simulate import SimConfig, simulate_batch

BLOCK_SIZE = 500
HORIZONS = (1, 3, 6, 12)

PANELS = {
    "a": dict(nu=1, omega=math.pi / 2, n_trunc=50),
    "b": dict(nu=8, omega=math.pi / 5, n_trunc=100),
}

TABLE2_PAIRS = ((25, 50), (50, 100), (100, 250), (250, 500), (500, 1000))


class TrialFailure(RuntimeError):
    def __init__(self, trial_id, reason):
        self.trial_id = trial_id
        super().__init__(f"trial {trial_id} failed: {reason}")


@dataclass(frozen=True)
class BenchConfig:
    nu: int = 1
    omega: float = math.pi / 2
    n_trunc: int = 50
    rho: float = 0.4
    window: int = 10
    horizons: tuple = HORIZONS
    seed: int = 0
    switch_prob: float = 0.5

    @classmethod
    def panel(cls, name: str, **overrides):
        if name not in PANELS:
            raise ValueError(f"unknown panel {name!r}; expected one of {sorted(PANELS)}")
        return cls(**{**PANELS[name], **overrides})

    def sim(self, n_trunc=None):
        return SimConfig(nu=self.nu, n_trunc=self.n_trunc if n_trunc is None else n_trunc,
                         seed=self.seed, switch_prob=self.switch_prob)


@dataclass(frozen=True)
class TruncationConfig:
    nu: int = 8
    omega: float = math.pi / 2
    rho: float = 0.4
    horizon: int = 12
    seed: int = 0
    switch_prob: float = 0.5


@dataclass(frozen=True)
class TruncationRow:
    n1: int
    n2: int
    mean: float
    se: float
    trials: int


@lru_cache(maxsize=32)
def _forecaster(omega, rho, n_trunc, horizon):
    return Forecaster(BandParams(omega=omega, rho=rho, n_trunc=n_trunc, horizon=horizon))


def _blocks(trials):
    return [(s, min(s + BLOCK_SIZE, trials)) for s in range(0, trials, BLOCK_SIZE)]


def _run_blocks(fn, args, jobs):
    if jobs <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*args)))


def method_forecasts(cfg: BenchConfig, past, lmax):
    """Band-limited and the three spline forecasts for records ``past``."""
    bl = _forecaster(cfg.omega, cfg.rho, cfg.n_trunc, lmax)(past)
    xs = moving_average(past, cfg.window)
    return (bl, spline_notaknot_extrapolate(xs, lmax), pchip_extrapolate(xs, lmax),
            linear_extrapolate(xs, lmax))


def bench_block(cfg: BenchConfig, start: int, stop: int) -> np.ndarray:
    """Errors for trials start..stop-1, shape (trials, 4 methods, horizons)."""
    lmax = max(cfg.horizons)
    x = simulate_batch(cfg.sim(), range(start, stop), lmax)
    past, future = x[:, :cfg.n_trunc + 1], x[:, cfg.n_trunc + 1:]
    sq = np.stack([(future - f) ** 2 for f in method_forecasts(cfg, past, lmax)], axis=1)
    err = np.sqrt(np.stack([sq[..., :l].sum(axis=-1) for l in cfg.horizons], axis=-1))
    bad = ~np.all(np.isfinite(err), axis=(1, 2))
    if bad.any():
        raise TrialFailure(start + int(np.flatnonzero(bad)[0]), "non-finite forecast error")
    return err


def run_benchmark(cfg: BenchConfig, trials: int, jobs: int = 1):
    """Returns the ratio table and the raw error array."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    parts = _run_blocks(bench_block, [(cfg, a, b) for a, b in _blocks(trials)], jobs)
    err = np.concatenate(parts, axis=0)
    reports = [TrialReport(e_bl=float(err[i, 0, k]), e_spline=tuple(float(v) for v in err[i, 1:, k]),
                           l=l)
               for i in range(trials) for k, l in enumerate(cfg.horizons)]
    table = aggregate_ratios(reports, config={**asdict(cfg), "trials": trials})
    return table, err


def truncation_block(cfg: TruncationConfig, n1: int, n2: int, start: int, stop: int) -> np.ndarray:
    sim = SimConfig(nu=cfg.nu, n_trunc=n2, seed=cfg.seed, switch_prob=cfg.switch_prob)
    x = simulate_batch(sim, range(start, stop), 0)
    f2 = _forecaster(cfg.omega, cfg.rho, n2, cfg.horizon)(x)
    f1 = _forecaster(cfg.omega, cfg.rho, n1, cfg.horizon)(x[:, -(n1 + 1):])
    out = np.empty(stop - start)
    for i in range(stop - start):
        try:
            out[i] = truncation_discrepancy(f1[i], f2[i], cfg.horizon)
        except ZeroDivisionError as exc:
            raise TrialFailure(start + i, exc) from exc
    return out


def run_truncation_table(cfg: TruncationConfig, pairs, trials: int, jobs: int = 1,
                         allow_equal: bool = False):
    """Mean truncation discrepancy per (n1, n2) pair.

    Both forecasts of a trial use the same simulated path: the long record
    starts at -n2 and the short one is its suffix from -n1.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rows = []
    for n1, n2 in pairs:
        if not (n2 > n1 >= 1 or (allow_equal and n2 == n1 >= 1)):
            raise ValueError(f"invalid truncation pair ({n1}, {n2}); need n2 > n1 >= 1")
        parts = _run_blocks(truncation_block,
                            [(cfg, n1, n2, a, b) for a, b in _blocks(trials)], jobs)
        vals = np.concatenate(parts).tolist()
        mean, se = _mean_se(vals)
        rows.append(TruncationRow(n1=n1, n2=n2, mean=mean, se=se, trials=trials))
    return rows


FIGURES = {
    1: dict(nu=8, omega=math.pi / 2, n_trunc=50, rho=0.2, window=10, horizon=10, spline="cubic"),
    2: dict(nu=8, omega=math.pi / 5, n_trunc=100, rho=0.4, window=10, horizon=10, spline="pchip"),
    3: dict(nu=8, omega=math.pi / 2, n_trunc=50, n_trunc2=100, rho=0.4, window=10, horizon=12,
            spline="cubic"),
}


def figure_data(figure: int, seed: int = 0):
    """Aligned curves for one of the example figures.

    Returns ``(params, columns)``; columns map names to lists over the time
    index, with ``None`` where a curve is undefined. The band-limited past
    trace is never computed.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}")
    p = dict(FIGURES[figure])
    n = p["n_trunc"]
    n_long = p.get("n_trunc2", n)
    horizon = p["horizon"]
    sim = SimConfig(nu=p["nu"], n_trunc=n_long, seed=seed)
    x = simulate_batch(sim, [0], horizon)[0]
    past = x[n_long - n:n_long + 1]
    bl = _forecaster(p["omega"], p["rho"], n, horizon)(past)
    xs = moving_average(past, p["window"])
    spline = (spline_notaknot_extrapolate if p["spline"] == "cubic" else pchip_extrapolate)(xs, horizon)

    times = list(range(-n_long, horizon + 1))
    k0 = n_long + 1  # index of t = 1

    def future(vals):
        return [None] * k0 + [float(v) for v in vals]

    cols = {
        "t": times,
        "x": [float(v) for v in x],
        "bl_forecast": future(bl),
        "moving_avg": [None] * (n_long - n) + [float(v) for v in xs.values] + [None] * horizon,
        "spline_forecast": future(spline),
    }
    if "n_trunc2" in p:
        cols["bl_forecast_N2"] = future(_forecaster(p["omega"], p["rho"], n_long, horizon)(x[:n_long + 1]))
    p["seed"] = seed
    return p, cols

