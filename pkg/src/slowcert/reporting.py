"""Violation reports, grid specifications, and the seeded low-discrepancy sampler.

Grid falsification is sound only as sampling: an empty report means "no
violation found among N samples", never "verified". Every consumer of these
reports states that.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import ConfigError

CONDITIONS = ("A1", "A2", "A3", "A4", "A5", "A6", "L1", "L2", "decrease")


@dataclass(frozen=True)
class Witness:
    """One violating sample: where, what was measured, what was required."""

    point: tuple
    lhs: float
    rhs: float
    slack: float  # rhs + tolerance - lhs; negative by construction


@dataclass(frozen=True)
class ViolationReport:
    condition: str
    witnesses: tuple[Witness, ...]
    samples_tested: int

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ConfigError(f"unknown condition tag {self.condition!r}")

    @property
    def passed(self) -> bool:
        return len(self.witnesses) == 0

    @property
    def worst_slack(self) -> float:
        if not self.witnesses:
            return float("inf")
        return min(w.slack for w in self.witnesses)

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        line = f"{self.condition}: {status}, {len(self.witnesses)} violations / {self.samples_tested} samples"
        if not self.passed:
            line += f", worst slack {self.worst_slack:.3e}"
        return line


@dataclass(frozen=True)
class GridSpec:
    """Sampling specification for grid falsification.

    ``t_max`` defaults to 20 * max(T, 1) * alpha when left unset. ``tau_box``
    optionally replaces the tau samples drawn from the path image with a
    user-declared box (list of (lo, hi) per component); by default tau is
    sampled as p(s) with s over [-T, t_max/alpha].
    """

    radius: float = 10.0
    n_samples: int = 10_000
    seed: int = 0
    t_max: float | None = None
    n_time_samples: int = 512
    slack: float = 1e-9
    tau_box: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.radius <= 0 or self.n_samples <= 0 or self.n_time_samples <= 0:
            raise ConfigError("grid radius and sample counts must be positive")
        if self.slack < 0:
            raise ConfigError("slack must be nonnegative")

    def resolve_t_max(self, T: float, alpha: float) -> float:
        if self.t_max is not None:
            return self.t_max
        return 20.0 * max(T, 1.0) * alpha


def sobol_unit_box(n_samples: int, dim: int, seed: int) -> np.ndarray:
    """Seeded scrambled Sobol points in the unit cube, deterministic per seed."""
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # falsification sampling does not rely on the power-of-two balance
        warnings.simplefilter("ignore", UserWarning)
        return sampler.random(n_samples)


def sample_points(grid: GridSpec, dim_state: int, T: float, alpha: float, path):
    """Draw the (x, t, tau) samples used by the assumption falsifiers.

    x fills the sup-norm box of the configured radius, t spans [0, t_max],
    and tau is either p(s) with s over [-T, t_max/alpha] or a uniform draw
    from the declared tau box.
    """
    t_max = grid.resolve_t_max(T, alpha)
    if grid.tau_box is None:
        u = sobol_unit_box(grid.n_samples, dim_state + 2, grid.seed)
        xs = grid.radius * (2.0 * u[:, :dim_state] - 1.0)
        ts = t_max * u[:, dim_state]
        s_lo, s_hi = -T, t_max / alpha
        ss = s_lo + (s_hi - s_lo) * u[:, dim_state + 1]
        taus = np.array([path.value(float(s)) for s in ss])
    else:
        d = len(grid.tau_box)
        u = sobol_unit_box(grid.n_samples, dim_state + 1 + d, grid.seed)
        xs = grid.radius * (2.0 * u[:, :dim_state] - 1.0)
        ts = t_max * u[:, dim_state]
        box = np.asarray(grid.tau_box, dtype=float)
        taus = box[:, 0] + (box[:, 1] - box[:, 0]) * u[:, dim_state + 1 :]
    return xs, ts, taus


def worker_count() -> int:
    """Parallelism cap from SLOWCERT_THREADS; defaults to sequential."""
    raw = os.environ.get("SLOWCERT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_workers(fn, items):
    """Order-preserving map honoring the SLOWCERT_THREADS cap.

    Results are merged by concatenation in input order, so reports are
    identical whatever the worker count.
    """
    n = worker_count()
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
