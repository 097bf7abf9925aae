"""Essential bounds near a set, density-integral intervals, approximate limits.

The interval [ess-inf, ess-sup] near a null set C is exactly the set of
values that integrals against measures concentrating on shrinking
neighborhoods of C can attain; its endpoints are estimated from lattice
extremes with local refinement.  Upper/lower approximate limits are found
by bisection on the level whose super/sub-level relative density vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density import count_ratio
from .errors import NotDensitySet, PreconditionError
from .fields import ScalarField, VectorField
from .geometry import (DeltaSchedule, QuadratureConfig, Region, as_point,
                       cloud_distance, point_cloud, shell_lattice)
from .sampling import BallSamples, LevelSamples, ball_samples, refine_extremum

DEFAULT_CAP = 1e6
DEFAULT_DENSITY_TOL = 1e-3
DEFAULT_ALPHA_RTOL = 1e-4
DEFAULT_AGREE_TOL = 4e-3


@dataclass(frozen=True)
class DensityInterval:
    """Closed interval of attainable density-integral values of f near C."""

    lo: float
    hi: float
    lo_attained_on: Optional[Region] = None
    hi_attained_on: Optional[Region] = None

    def __post_init__(self):
        if self.lo > self.hi:
            raise PreconditionError("interval endpoints out of order")

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= value <= self.hi + tol

    def to_json_dict(self) -> dict:
        return {"lo": _ext(self.lo), "hi": _ext(self.hi),
                "lo_witness": getattr(self.lo_attained_on, "label", None),
                "hi_witness": getattr(self.hi_attained_on, "label", None)}


@dataclass(frozen=True)
class ApproxLimitResult:
    """Lower/upper approximate limits and, when they agree, the limit."""

    f_lower: float
    f_upper: float
    ap_limit: Optional[float]
    cap: float
    agreement_tol: float

    def to_json_dict(self) -> dict:
        return {"f_lower": _ext(self.f_lower), "f_upper": _ext(self.f_upper),
                "ap_limit": self.ap_limit, "cap": self.cap,
                "agreement_tol": self.agreement_tol}


def _ext(v: float):
    """Extended reals serialize as explicit strings, never sentinel floats."""
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


# ---------------------------------------------------------------------------
# Essential bounds near a set


def _near_set_levels(f: ScalarField, Omega: Region, C: Region,
                     sched: DeltaSchedule, cfg: QuadratureConfig):
    from .density import null_within

    if null_within(C, Omega, cfg) > 0:
        raise NotDensitySet(
            f"{C.label!r}: lambda(C & Omega) > 0 at working resolution")
    cloud = point_cloud(C, cfg)
    dist = cloud_distance(cloud)
    levels, members = [], []
    for d in sched.deltas:
        pts = shell_lattice(cloud, float(d), cfg.resolution)
        mask = (dist(pts) < d) & Omega.contains(pts) if pts.size else np.zeros(0, bool)
        if not np.any(mask):
            raise NotDensitySet(
                f"neighborhood of {C.label!r} at delta={d:g} carries no lattice "
                f"points of the domain")
        pts = pts[mask]
        vals = f(pts)
        levels.append(LevelSamples(float(d), pts, vals,
                                   2.0 * float(d) / cfg.resolution,
                                   int(mask.sum()),
                                   int(np.count_nonzero(np.isnan(vals)))))

        def member(p, d=float(d)):
            return (dist(p) < d) & Omega.contains(p)

        members.append(member)
    return levels, members


def ess_sup_series(f: ScalarField, Omega: Region, C: Region, sched: DeltaSchedule,
                   cfg: QuadratureConfig, cap: float = DEFAULT_CAP) -> np.ndarray:
    """Per-delta sups over shrinking neighborhoods, non-increasing as sampled.

    Lattice sups are pushed outward by local refinement and clamped so the
    series respects the nesting of the neighborhoods; every entry is +inf
    when the refined sup exceeds the cap at every delta.
    """
    levels, members = _near_set_levels(f, Omega, C, sched, cfg)
    sups, exceeded = [], []
    running = math.inf
    for level, member in zip(levels, members):
        s = refine_extremum(f, member, level, cfg, sign=+1.0, cap=cap)
        if math.isnan(s):
            raise NotDensitySet(
                f"all samples of {f.label!r} near {C.label!r} were discarded "
                f"at delta={level.delta:g}")
        exceeded.append(s > cap)
        running = min(running, s)
        sups.append(running)
    if all(exceeded):
        return np.full(len(sups), math.inf)
    return np.asarray(sups)


def ess_sup_near(f: ScalarField, Omega: Region, C: Region, sched: DeltaSchedule,
                 cfg: QuadratureConfig, cap: float = DEFAULT_CAP) -> float:
    """Limit of the supremum of f over shrinking neighborhoods of C in Omega.

    The limit of the non-increasing per-delta series is its value at the
    smallest delta; +inf means the refined sup exceeded the cap at every
    delta (unbounded concentration near C).
    """
    return float(ess_sup_series(f, Omega, C, sched, cfg, cap=cap)[-1])


def ess_inf_near(f: ScalarField, Omega: Region, C: Region, sched: DeltaSchedule,
                 cfg: QuadratureConfig, cap: float = DEFAULT_CAP) -> float:
    """Mirror of ess_sup_near with the infimum (returns -inf past the cap)."""
    return -ess_sup_near(-f, Omega, C, sched, cfg, cap=cap)


def dens_interval(f: ScalarField, Omega: Region, C: Region, sched: DeltaSchedule,
                  cfg: QuadratureConfig, cap: float = DEFAULT_CAP,
                  witness_eps: float = 1e-3) -> DensityInterval:
    """Interval [ess-inf, ess-sup] near C with attainment witness regions.

    The witnesses are the sets {f >= hi - eps} and {f <= lo + eps} within
    Omega, on which concentrating measures attain the endpoints.
    """
    lo = ess_inf_near(f, Omega, C, sched, cfg, cap=cap)
    hi = ess_sup_near(f, Omega, C, sched, cfg, cap=cap)
    lo_w = hi_w = None
    if math.isfinite(hi):
        hi_w = Region(Omega.dim,
                      lambda p: Omega.contains(p) & (np.nan_to_num(f(p), nan=-np.inf)
                                                     >= hi - witness_eps),
                      Omega.bbox, label=f"{{f>={hi - witness_eps:.6g}}}")
    if math.isfinite(lo):
        lo_w = Region(Omega.dim,
                      lambda p: Omega.contains(p) & (np.nan_to_num(f(p), nan=np.inf)
                                                     <= lo + witness_eps),
                      Omega.bbox, label=f"{{f<={lo + witness_eps:.6g}}}")
    return DensityInterval(lo, hi, lo_w, hi_w)


def support_function(F: VectorField, Omega: Region, C: Region, v,
                     sched: DeltaSchedule, cfg: QuadratureConfig,
                     cap: float = DEFAULT_CAP) -> float:
    """Support function of the attainable integral set of F near C: ess-sup of F.v."""
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) == 0.0:
        raise PreconditionError("support direction must be nonzero")
    return ess_sup_near(F.dot(v), Omega, C, sched, cfg, cap=cap)


# ---------------------------------------------------------------------------
# Approximate limits at a point


def _level_fraction(level: LevelSamples, alpha: float) -> float:
    finite = np.isfinite(level.values)
    total = int(np.count_nonzero(finite))
    if total == 0:
        return 0.0
    above = int(np.count_nonzero(level.values[finite] > alpha))
    return count_ratio(above, total)


def _limsup_from_samples(f: ScalarField, Omega: Region, samples: BallSamples,
                         cfg: QuadratureConfig, cap: float,
                         density_tol: float, alpha_rtol: float) -> tuple[float, float]:
    """Upper approximate limit from cached ball samples; returns (value, atol)."""
    x = samples.x
    all_exceeded = True
    for level in samples.levels:
        def member(p, d=level.delta):
            return (np.linalg.norm(np.atleast_2d(p) - x, axis=1) < d) & Omega.contains(p)

        s = refine_extremum(f, member, level, cfg, sign=+1.0, cap=cap)
        if math.isnan(s) or not s > cap:
            all_exceeded = False
            break  # the +inf verdict needs the cap exceeded at every delta
    if all_exceeded:
        return math.inf, 0.0

    tail = samples.levels[-samples.tail_window:]
    finite_tail = np.concatenate([lv.finite_values for lv in tail])
    if finite_tail.size == 0:
        raise PreconditionError("all tail samples were discarded as NaN")
    hi = float(np.max(finite_tail))
    lo = float(np.min(finite_tail)) - 1.0
    atol = max(alpha_rtol * (hi - lo), 1e-12)

    def vanishes(alpha: float) -> bool:
        fracs = [_level_fraction(lv, alpha) for lv in tail]
        if max(fracs) < density_tol:
            return True
        # a non-increasing tail converges to its last value: limsup = limit
        slack = 0.25 * density_tol
        decreasing = all(fracs[i + 1] <= fracs[i] + slack
                         for i in range(len(fracs) - 1))
        return decreasing and fracs[-1] < density_tol

    if not vanishes(hi):
        # positive-density mass sits at the very sample maximum
        return (math.inf if hi >= cap else hi), atol
    while hi - lo > atol:
        mid = 0.5 * (lo + hi)
        if vanishes(mid):
            hi = mid
        else:
            lo = mid
    return (math.inf if hi >= cap else float(hi)), atol


def _negated(samples: BallSamples) -> BallSamples:
    neg = [LevelSamples(lv.delta, lv.points, -lv.values, lv.cell, lv.count,
                        lv.discarded) for lv in samples.levels]
    return BallSamples(samples.x, neg, samples.tail_window)


def ap_limsup(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
              cfg: QuadratureConfig, cap: float = DEFAULT_CAP,
              density_tol: float = DEFAULT_DENSITY_TOL,
              alpha_rtol: float = DEFAULT_ALPHA_RTOL) -> float:
    """Smallest level whose super-level set has vanishing relative density at x.

    The "vanishes" test is a tail limsup of lattice super-level fractions
    below ``density_tol``; +inf is reported when the refined sample sup
    exceeds the cap at every delta (unbounded concentration at x).
    """
    samples = ball_samples(f, Omega, as_point(x, Omega.dim), sched, cfg)
    value, _ = _limsup_from_samples(f, Omega, samples, cfg, cap, density_tol,
                                    alpha_rtol)
    return value


def ap_liminf(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
              cfg: QuadratureConfig, cap: float = DEFAULT_CAP,
              density_tol: float = DEFAULT_DENSITY_TOL,
              alpha_rtol: float = DEFAULT_ALPHA_RTOL) -> float:
    """Negation-dual of ap_limsup: ap_liminf(f) = -ap_limsup(-f) exactly."""
    samples = ball_samples(f, Omega, as_point(x, Omega.dim), sched, cfg)
    value, _ = _limsup_from_samples(-f, Omega, _negated(samples), cfg, cap,
                                    density_tol, alpha_rtol)
    return -value


def ap_limit(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
             cfg: QuadratureConfig, cap: float = DEFAULT_CAP,
             density_tol: float = DEFAULT_DENSITY_TOL,
             alpha_rtol: float = DEFAULT_ALPHA_RTOL,
             agree_tol: float = DEFAULT_AGREE_TOL) -> ApproxLimitResult:
    """Approximate limit: present iff the one-sided limits agree and are finite.

    The agreement tolerance scales with the magnitude of the bounds so that
    smooth fields at resolution-limited separations still report a limit.
    """
    x = as_point(x, Omega.dim)
    samples = ball_samples(f, Omega, x, sched, cfg)
    upper, atol_u = _limsup_from_samples(f, Omega, samples, cfg, cap,
                                         density_tol, alpha_rtol)
    neg, atol_l = _limsup_from_samples(-f, Omega, _negated(samples), cfg, cap,
                                       density_tol, alpha_rtol)
    lower = -neg
    agreement = max(2.0 * max(atol_u, atol_l),
                    agree_tol * max(1.0,
                                    abs(upper) if math.isfinite(upper) else 0.0,
                                    abs(lower) if math.isfinite(lower) else 0.0))
    value = None
    if math.isfinite(lower) and math.isfinite(upper) and upper - lower <= agreement:
        value = 0.5 * (lower + upper)
    return ApproxLimitResult(lower, upper, value, cap, agreement)
