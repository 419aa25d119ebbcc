"""Randomly switching vector autoregression used as test input.

    z(t) = A(t) z(t-1) + eta(t),   x(t) = c . z(t),   t = -N+1, ..., t_end

Each trial draws from its own SplitMix64 stream (see ``rng``). Stream
positions are laid out so that every step consumes the same number of
uniforms, which lets many trials be simulated side by side:

    [0, nu)                 z(-N), uniform(0, 1)
    [nu, nu + nu^2)         A(-N) row-major, uniform(0, scale/nu)
    then per step, a block of 1 + nu^2 + 2*ceil(nu/2) uniforms:
        xi                  switch draw; A is resampled when xi >= 1 - switch_prob
        nu^2                candidate matrix, used only on a switch
        2*ceil(nu/2)        Box-Muller pairs (u1, u2) -> (cos, sin) normals,
                            component 2j from cos, 2j+1 from sin; an odd
                            trailing sine is discarded
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import box_muller, derive_trial_stream, uniform_block

_STEP_CHUNK = 32


@dataclass(frozen=True)
class SimConfig:
    nu: int = 1
    n_trunc: int = 50
    seed: int = 0
    switch_prob: float = 0.5
    c: tuple = None
    # Scales the matrix draws; 0 switches the dynamics off (x = c . eta).
    matrix_scale: float = 1.0

    def __post_init__(self):
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError(f"nu must be a positive integer, got {self.nu!r}")
        if int(self.n_trunc) != self.n_trunc or self.n_trunc < 0:
            raise ValueError(f"n_trunc must be a nonnegative integer, got {self.n_trunc!r}")
        if not 0.0 <= self.switch_prob <= 1.0:
            raise ValueError(f"switch_prob must be in [0, 1], got {self.switch_prob!r}")
        if not 0.0 <= self.matrix_scale <= 1.0:
            raise ValueError(f"matrix_scale must be in [0, 1], got {self.matrix_scale!r}")
        c = (1.0,) * self.nu if self.c is None else tuple(float(v) for v in self.c)
        if len(c) != self.nu:
            raise ValueError(f"c has {len(c)} entries, expected nu = {self.nu}")
        object.__setattr__(self, "c", c)

    @property
    def step_draws(self) -> int:
        return 1 + self.nu ** 2 + 2 * math.ceil(self.nu / 2)


@dataclass(frozen=True, eq=False)
class SimPath:
    x: np.ndarray
    trial_id: int
    seed_used: int
    n_trunc: int
    t_end: int = field(default=0)

    @property
    def times(self):
        return np.arange(-self.n_trunc, self.t_end + 1)

    @property
    def past(self):
        return self.x[:self.n_trunc + 1]

    @property
    def future(self):
        return self.x[self.n_trunc + 1:]


def trial_keys(seed: int, trial_ids) -> np.ndarray:
    return np.array([derive_trial_stream(seed, int(i)).key for i in trial_ids], dtype=np.uint64)


def simulate_batch(cfg: SimConfig, trial_ids, t_end: int) -> np.ndarray:
    """Paths x(t), t = -N..t_end, one row per trial id.

    Row i depends only on ``(cfg, trial_ids[i], t_end)``; batching does not
    change any value.
    """
    n = cfg.n_trunc
    if t_end < -n:
        raise ValueError(f"t_end={t_end} precedes the path start -{n}")
    nu = cfg.nu
    keys = trial_keys(cfg.seed, trial_ids)
    trials = keys.size
    c = cfg.c
    scale = cfg.matrix_scale / nu
    keep_below = 1.0 - cfg.switch_prob

    head = uniform_block(keys, 0, nu + nu * nu)
    z = head[:, :nu].copy()
    a = head[:, nu:].reshape(trials, nu, nu) * scale

    steps = t_end + n
    x = np.empty((trials, steps + 1))
    x[:, 0] = _observe(z, c)
    cdraw = cfg.step_draws
    pos = nu + nu * nu
    done = 0
    while done < steps:
        chunk = min(_STEP_CHUNK, steps - done)
        block = uniform_block(keys, pos + done * cdraw, chunk * cdraw).reshape(trials, chunk, cdraw)
        for s in range(chunk):
            u = block[:, s]
            switch = u[:, 0] >= keep_below
            cand = u[:, 1:1 + nu * nu].reshape(trials, nu, nu) * scale
            a = np.where(switch[:, None, None], cand, a)
            bm = u[:, 1 + nu * nu:]
            cos_part, sin_part = box_muller(bm[:, 0::2], bm[:, 1::2])
            eta = np.empty((trials, 2 * cos_part.shape[1]))
            eta[:, 0::2] = cos_part
            eta[:, 1::2] = sin_part
            znew = eta[:, :nu].copy()
            for j in range(nu):
                znew += a[:, :, j] * z[:, j:j + 1]
            z = znew
            x[:, done + s + 1] = _observe(z, c)
        done += chunk
    return x


def _observe(z, c):
    out = z[:, 0] * c[0]
    for i in range(1, len(c)):
        out = out + z[:, i] * c[i]
    return out


def generate_path(cfg: SimConfig, trial_id: int, t_end: int) -> SimPath:
    x = simulate_batch(cfg, [trial_id], t_end)[0]
    return SimPath(x=x, trial_id=int(trial_id), seed_used=derive_trial_stream(cfg.seed, trial_id).key,
                   n_trunc=cfg.n_trunc, t_end=int(t_end))


def nested_truncation_paths(cfg: SimConfig, trial_id: int, n1: int, n2: int, t_end: int):
    """A path started at -n2 and its suffix from -n1 (shared samples)."""
    if not n2 > n1 >= 0:
        raise ValueError(f"need n2 > n1 >= 0, got n1={n1}, n2={n2}")
    long = generate_path(replace(cfg, n_trunc=n2), trial_id, t_end)
    short = SimPath(x=long.x[n2 - n1:], trial_id=long.trial_id, seed_used=long.seed_used,
                    n_trunc=n1, t_end=long.t_end)
    return long, short
