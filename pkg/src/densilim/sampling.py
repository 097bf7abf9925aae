"""Shared shrinking-neighborhood samplers and local extremum refinement.

The refinement pass zooms a small sub-lattice around the current best
sample, which moves the lattice sup/inf toward the pointwise sup/inf.
This is what lets unbounded concentrations (integrable singularities)
exceed the cap instead of being clipped at lattice resolution; fields
whose essential and pointwise extremes differ on a null set are
consequently misread, a documented limitation of predicate-defined data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NotDensityPoint
from .fields import ScalarField
from .geometry import (DeltaSchedule, QuadratureConfig, Region, as_point,
                       ball_window, lattice)


@dataclass
class LevelSamples:
    """Lattice samples of one delta level restricted to the neighborhood."""

    delta: float
    points: np.ndarray       # (m, n) lattice points inside the neighborhood
    values: np.ndarray       # (m,) field values, NaN = discarded
    cell: float              # lattice spacing (largest axis step)
    count: int               # m
    discarded: int

    @property
    def finite_values(self) -> np.ndarray:
        return self.values[np.isfinite(self.values)]


@dataclass
class BallSamples:
    """Per-delta lattice samples of a field over shrinking domain balls."""

    x: np.ndarray
    levels: list
    tail_window: int

    @property
    def deltas(self) -> np.ndarray:
        return np.array([lv.delta for lv in self.levels])

    def finite_range(self) -> tuple[float, float]:
        lo = min(float(np.min(lv.finite_values)) for lv in self.levels
                 if lv.finite_values.size)
        hi = max(float(np.max(lv.finite_values)) for lv in self.levels
                 if lv.finite_values.size)
        return lo, hi


def ball_samples(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
                 cfg: QuadratureConfig) -> BallSamples:
    """Sample f over B_delta(x) within Omega for every schedule delta.

    Raises NotDensityPoint when some level has no domain lattice points.
    """
    x = as_point(x, Omega.dim)
    levels = []
    for d in sched.deltas:
        window = ball_window(x, float(d))
        pts, _ = lattice(window, cfg.resolution)
        mask = (np.linalg.norm(pts - x, axis=1) < d) & Omega.contains(pts)
        m = int(np.count_nonzero(mask))
        if m == 0:
            raise NotDensityPoint(
                f"measure of domain ball at delta={d:g} vanished at resolution "
                f"{cfg.resolution}")
        pts = pts[mask]
        vals = f(pts)
        levels.append(LevelSamples(float(d), pts, vals,
                                   float(np.max(window.sides) / cfg.resolution),
                                   m, int(np.count_nonzero(np.isnan(vals)))))
    return BallSamples(x, levels, sched.tail_window)


def refine_extremum(f: ScalarField, membership: Callable[[np.ndarray], np.ndarray],
                    level: LevelSamples, cfg: QuadratureConfig,
                    sign: float = 1.0, cap: Optional[float] = None) -> float:
    """Push the lattice extremum of one level toward the pointwise extremum.

    Starts from the top ``cfg.refine_top`` lattice samples and repeatedly
    evaluates a 5^n sub-lattice around the running best inside a shrinking
    cell, staying within the neighborhood via ``membership``.  ``sign=+1``
    refines the supremum, ``sign=-1`` the infimum.  Stops early once the
    (signed) best exceeds ``cap``.
    """
    finite = np.isfinite(level.values)
    if not np.any(finite):
        return np.nan
    scores = np.where(finite, sign * level.values, -np.inf)
    top = np.argsort(scores)[::-1][:cfg.refine_top]
    top = top[np.isfinite(scores[top])]
    best_val = float(np.max(scores[top]))
    n = level.points.shape[1]
    offsets = _sub_offsets(n)
    for seed_idx in top:
        center = level.points[seed_idx].copy()
        width = level.cell / 2.0
        current = float(scores[seed_idx])
        stagnant = 0
        for _ in range(cfg.refine_levels):
            cand = center + width * offsets
            ok = membership(cand)
            improved = False
            if np.any(ok):
                cand = cand[ok]
                vals = sign * f(cand)
                vals = np.where(np.isfinite(vals), vals, -np.inf)
                j = int(np.argmax(vals))
                gain = float(vals[j]) - current
                if gain > 0.0:
                    if gain <= 1e-7 * max(1.0, abs(current)):
                        stagnant += 1
                    else:
                        stagnant = 0
                    current = float(vals[j])
                    center = cand[j].copy()
                    improved = True
            if not improved:
                width /= 2.0  # shrink only on failure so walks can outrun decay
                stagnant += 1
            if stagnant >= 4 or width < 1e-300:
                break
            if cap is not None and current > cap:
                break
        best_val = max(best_val, current)
        if cap is not None and best_val > cap:
            break
    return sign * best_val


def _sub_offsets(n: int) -> np.ndarray:
    axes = [np.linspace(-1.0, 1.0, 5)] * n
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def halton_ball(x: np.ndarray, delta: float, n_samples: int, seed: int,
                skip_center: bool = True) -> np.ndarray:
    """Low-discrepancy points inside B_delta(x), seed-deterministic."""
    from scipy.stats import qmc

    n = x.size
    sampler = qmc.Halton(d=n, scramble=True, seed=seed)
    pts = []
    need = n_samples
    while need > 0:
        raw = x + delta * (2.0 * sampler.random(2 * need + 8) - 1.0)
        r = np.linalg.norm(raw - x, axis=1)
        keep = (r < delta) & (r > 0 if skip_center else np.ones_like(r, dtype=bool))
        raw = raw[keep]
        pts.append(raw[:need])
        need -= len(raw[:need])
    return np.concatenate(pts, axis=0)[:n_samples]
