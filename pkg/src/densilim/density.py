"""Density ratios of sets at points and at null sets.

Every shrinking-neighborhood limit is discretized over a geometric delta
schedule; non-convergent ratios are reported through the liminf/limsup
window with ``converged=False`` instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotDensityPoint, NotDensitySet, PreconditionError
from .geometry import (Box, DeltaSchedule, QuadratureConfig, Region, as_point,
                       ball_window, cloud_distance, lattice, point_cloud,
                       shell_lattice)

DEFAULT_LIMIT_TOL = 1e-3


def count_ratio(count: int, den: int) -> float:
    """count/den with complement-symmetric rounding.

    Folding the division so that ratio(a, d) + ratio(d - a, d) sums to
    exactly 1.0 in floating point (the complement identity holds at the
    float level, not only on counts).
    """
    if count * 2 <= den:
        return count / den
    return 1.0 - (den - count) / den


@dataclass(frozen=True)
class LimitEstimate:
    """Discretized limit along the delta schedule.

    liminf/limsup are min/max over the tail window; ``point_value`` is the
    value at the smallest delta.  ``converged`` requires both the last step
    difference and the tail spread to fall below ``tol``.
    """

    values: np.ndarray
    deltas: np.ndarray
    liminf_est: float
    limsup_est: float
    point_value: float
    converged: bool
    tol: float
    tail_window: int = 4
    numerator_counts: Optional[np.ndarray] = None
    denominator_counts: Optional[np.ndarray] = None
    discarded: int = 0

    @classmethod
    def from_values(cls, values, deltas, tail_window: int,
                    tol: float = DEFAULT_LIMIT_TOL, **extra) -> "LimitEstimate":
        values = np.asarray(values, dtype=float)
        deltas = np.asarray(deltas, dtype=float)
        tail = values[-tail_window:]
        liminf_est = float(np.min(tail))
        limsup_est = float(np.max(tail))
        point_value = float(values[-1])
        spread = limsup_est - liminf_est
        last_step = abs(values[-1] - values[-2]) if values.size >= 2 else 0.0
        converged = bool(last_step < tol and spread < tol)
        return cls(values, deltas, liminf_est, limsup_est, point_value,
                   converged, tol, tail_window, **extra)

    def extrapolate(self) -> float:
        """Least-squares linear-in-delta intercept over the tail window."""
        w = min(len(self.values), max(2, self.tail_window))
        d = self.deltas[-w:]
        v = self.values[-w:]
        if np.ptp(d) == 0.0:
            return self.point_value
        A = np.stack([np.ones_like(d), d], axis=1)
        coef, *_ = np.linalg.lstsq(A, v, rcond=None)
        return float(coef[0])

    def to_json_dict(self) -> dict:
        return {"values": self.values.tolist(), "deltas": self.deltas.tolist(),
                "liminf": self.liminf_est, "limsup": self.limsup_est,
                "point_value": self.point_value, "converged": self.converged,
                "discarded": self.discarded}


@dataclass(frozen=True)
class DensitySetReport:
    """Outcome of the two density-set conditions."""

    is_density_set: bool
    null_measure_hits: int
    neighborhood_hits: np.ndarray
    failed: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {"is_density_set": self.is_density_set,
                "null_measure_hits": self.null_measure_hits,
                "neighborhood_hits": [int(h) for h in self.neighborhood_hits],
                "failed": self.failed}


# ---------------------------------------------------------------------------
# Densities at points


def _ratio_series(A: Region, Omega: Region, x: np.ndarray, sched: DeltaSchedule,
                  cfg: QuadratureConfig, tol: float) -> LimitEstimate:
    deltas = sched.deltas
    values = np.empty(len(deltas))
    nums = np.empty(len(deltas), dtype=int)
    dens = np.empty(len(deltas), dtype=int)
    for k, d in enumerate(deltas):
        window = ball_window(x, float(d))
        pts, _ = lattice(window, cfg.resolution)
        in_ball = np.linalg.norm(pts - x, axis=1) < d
        in_omega = in_ball & Omega.contains(pts)
        den = int(np.count_nonzero(in_omega))
        if den == 0:
            raise NotDensityPoint(
                f"measure of domain ball at delta={d:g} vanished at resolution "
                f"{cfg.resolution}")
        num = int(np.count_nonzero(in_omega & A.contains(pts)))
        values[k] = count_ratio(num, den)
        nums[k], dens[k] = num, den
    return LimitEstimate.from_values(values, deltas, sched.tail_window, tol,
                                     numerator_counts=nums,
                                     denominator_counts=dens)


def density_at_point(A: Region, Omega: Region, x, sched: DeltaSchedule,
                     cfg: QuadratureConfig, tol: float = DEFAULT_LIMIT_TOL) -> LimitEstimate:
    """Relative density of A within Omega at x along shrinking balls.

    The ratio at each delta is the lattice measure of A within the domain
    ball over the lattice measure of the domain ball; values lie in [0, 1]
    by construction since the numerator mask is contained in the denominator
    mask.  Raises NotDensityPoint when a denominator vanishes.
    """
    x = as_point(x, Omega.dim)
    return _ratio_series(A, Omega, x, sched, cfg, tol)


def null_within(C: Region, Omega: Region, cfg: QuadratureConfig) -> int:
    """Lattice hits of C & Omega over their common bbox (0 means null set)."""
    from .geometry import intersect, lebesgue

    inter_box = C.bbox.intersect(Omega.bbox)
    if inter_box.is_degenerate():
        return 0
    return lebesgue(intersect(C, Omega), inter_box, cfg).hits


def density_at_set(A: Region, Omega: Region, C: Region, sched: DeltaSchedule,
                   cfg: QuadratureConfig, tol: float = DEFAULT_LIMIT_TOL) -> LimitEstimate:
    """Relative density of A within Omega along shrinking neighborhoods of C.

    The positive-neighborhood condition is enforced level by level (the
    denominators below); the null condition through the lattice hits of
    C & Omega.
    """
    if null_within(C, Omega, cfg) > 0:
        raise NotDensitySet(
            f"{C.label!r}: lambda(C & Omega) > 0 at working resolution")
    cloud = point_cloud(C, cfg)
    dist = cloud_distance(cloud)
    deltas = sched.deltas
    values = np.empty(len(deltas))
    nums = np.empty(len(deltas), dtype=int)
    dens = np.empty(len(deltas), dtype=int)
    for k, d in enumerate(deltas):
        pts = shell_lattice(cloud, float(d), cfg.resolution)
        near = dist(pts) < d
        in_omega = near & Omega.contains(pts)
        den = int(np.count_nonzero(in_omega))
        if den == 0:
            raise NotDensitySet(
                f"neighborhood of {C.label!r} at delta={d:g} carries no lattice "
                f"points of the domain")
        num = int(np.count_nonzero(in_omega & A.contains(pts)))
        values[k] = count_ratio(num, den)
        nums[k], dens[k] = num, den
    return LimitEstimate.from_values(values, deltas, sched.tail_window, tol,
                                     numerator_counts=nums,
                                     denominator_counts=dens)


def is_density_set(C: Region, Omega: Region, sched: DeltaSchedule,
                   cfg: QuadratureConfig) -> DensitySetReport:
    """Check lambda(C & Omega) = 0 and lambda(C_delta & Omega) > 0 for all deltas."""
    null_hits = null_within(C, Omega, cfg)
    if null_hits > 0:
        return DensitySetReport(False, null_hits, np.zeros(sched.steps, dtype=int),
                                failed="lambda(C & Omega) > 0 at working resolution")
    try:
        cloud = point_cloud(C, cfg)
    except PreconditionError as exc:
        return DensitySetReport(False, 0, np.zeros(sched.steps, dtype=int),
                                failed=str(exc))
    dist = cloud_distance(cloud)
    hits = np.zeros(sched.steps, dtype=int)
    for k, d in enumerate(sched.deltas):
        pts = shell_lattice(cloud, float(d), cfg.resolution)
        if pts.shape[0] == 0:
            continue
        mask = (dist(pts) < d) & Omega.contains(pts)
        hits[k] = int(np.count_nonzero(mask))
    if np.any(hits == 0):
        bad = sched.deltas[int(np.argmax(hits == 0))]
        return DensitySetReport(False, 0, hits,
                                failed=f"lambda(C_delta & Omega) = 0 at delta={bad:g}")
    return DensitySetReport(True, 0, hits)


# ---------------------------------------------------------------------------
# Cones and directional concentration


def cone_region(x, v, alpha: float, dim: int, radius: float = 1e6) -> Region:
    """Open rotational cone with vertex x, axis v, half-angle alpha."""
    x = as_point(x, dim)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    cos_a = math.cos(alpha)

    def ind(p):
        off = np.atleast_2d(p) - x
        r = np.linalg.norm(off, axis=1)
        return off @ v > r * cos_a  # excludes the vertex: 0 > 0 is false

    return Region(dim, ind, Box(x - radius, x + radius), label=f"cone(a={alpha:g})")


def cone_density(Omega: Region, x, v, alpha: float, sched: DeltaSchedule,
                 cfg: QuadratureConfig, tol: float = DEFAULT_LIMIT_TOL) -> LimitEstimate:
    """Density of the cone K(x, v, alpha) within Omega at its vertex."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise PreconditionError("cone axis must be a unit vector")
    if not 0.0 < alpha < math.pi / 2.0:
        raise PreconditionError("opening half-angle must lie in (0, pi/2)")
    return density_at_point(cone_region(x, v, alpha, Omega.dim), Omega, x,
                            sched, cfg, tol)


@dataclass(frozen=True)
class ConcentrationResult:
    """Best concentration direction with its cone density score."""

    direction: np.ndarray
    score: float
    unique: bool
    aggregate_scores: np.ndarray
    directions: np.ndarray

    def to_json_dict(self) -> dict:
        return {"direction": self.direction.tolist(), "score": self.score,
                "unique": self.unique}


def unit_directions(n_dirs: int, dim: int) -> np.ndarray:
    """Deterministic direction samples: polar grid (2-d), Fibonacci sphere (3-d)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2.0 * math.pi * np.arange(n_dirs) / n_dirs
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if dim == 3:
        k = np.arange(n_dirs) + 0.5
        phi = math.pi * (1.0 + math.sqrt(5.0)) * k
        z = 1.0 - 2.0 * k / n_dirs
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    raise PreconditionError("direction sampling supports dim <= 3")


def concentration_direction(Omega: Region, x, sched: DeltaSchedule,
                            cfg: QuadratureConfig, n_dirs: int | None = None,
                            alpha0: float = math.pi / 4.0,
                            tol: float = DEFAULT_LIMIT_TOL) -> ConcentrationResult:
    """Direction along which Omega concentrates its mass at x.

    Candidates are ranked by cone density aggregated over a ladder of
    shrinking opening angles (a single fixed angle cannot separate
    directions inside its own plateau); the reported score is the cone
    density at alpha0 for the winner.  ``unique`` is False when the
    near-maximal candidates do not form one contiguous angular cluster
    (isotropy or multiple lobes).
    """
    x = as_point(x, Omega.dim)
    if n_dirs is None:
        n_dirs = 192 if Omega.dim == 3 else 64
    dirs = unit_directions(n_dirs, Omega.dim)
    ladder = [alpha0 / (2 ** j) for j in range(4)]
    cos_ladder = np.array([math.cos(a) for a in ladder])

    deltas = sched.deltas
    per_alpha = np.zeros((len(ladder), len(dirs), len(deltas)))
    for k, d in enumerate(deltas):
        window = ball_window(x, float(d))
        pts, _ = lattice(window, cfg.resolution)
        off = pts - x
        r = np.linalg.norm(off, axis=1)
        in_omega = (r < d) & Omega.contains(pts)
        den = int(np.count_nonzero(in_omega))
        if den == 0:
            raise NotDensityPoint(
                f"measure of domain ball at delta={d:g} vanished at resolution "
                f"{cfg.resolution}")
        with np.errstate(invalid="ignore"):
            unit = off / np.where(r > 0.0, r, 1.0)[:, None]
        dots = unit @ dirs.T  # (points, dirs)
        masked = np.where(in_omega[:, None], dots, -2.0)
        for j, cos_a in enumerate(cos_ladder):
            counts = np.count_nonzero(masked > cos_a, axis=0)
            per_alpha[j, :, k] = np.array(
                [count_ratio(int(c), den) for c in counts])

    # aggregate each direction: mean over the ladder of tail-windowed values
    tail = per_alpha[:, :, -sched.tail_window:]
    agg = tail.mean(axis=(0, 2))
    best = min((i for i in range(len(dirs)) if agg[i] >= np.max(agg) - tol),
               key=lambda i: tuple(dirs[i]))
    top = np.flatnonzero(agg >= np.max(agg) - tol)
    unique = _is_contiguous_cap(dirs[top], n_dirs, Omega.dim) and len(top) < len(dirs)

    score_series = per_alpha[0, best, -sched.tail_window:]
    score = float(score_series[-1])
    return ConcentrationResult(dirs[best], score, unique, agg, dirs)


def _is_contiguous_cap(top_dirs: np.ndarray, n_dirs: int, dim: int) -> bool:
    """True when the given directions all lie within one small angular cap."""
    if len(top_dirs) == 0:
        return False
    if len(top_dirs) == 1:
        return True
    mean = top_dirs.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0.0:
        return False  # symmetric lobes cancel
    mean = mean / norm
    # generous cap: a handful of neighboring samples around one axis
    cap_cos = math.cos(min(math.pi / 3.0, 8.0 * math.pi / n_dirs))
    return bool(np.all(top_dirs @ mean >= cap_cos))
