"""Precise representatives, Lebesgue points, jump detection, boundary traces.

A point value of an L^1-class field is recovered either from the
approximate limit (measure-independent when it exists) or from shrinking
ball means; at jump points the two one-sided half-space limits and the
separating normal are estimated by sweeping candidate directions and
refining the best one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .aplimits import (DEFAULT_AGREE_TOL, DEFAULT_ALPHA_RTOL, DEFAULT_CAP,
                       DEFAULT_DENSITY_TOL, ApproxLimitResult, ap_limit)
from .density import DEFAULT_LIMIT_TOL, LimitEstimate, unit_directions
from .errors import NotBoundaryPoint, NotDensityPoint, PreconditionError, UnboundedNearX
from .fields import ScalarField
from .geometry import (DeltaSchedule, QuadratureConfig, Region, as_point,
                       ball_window, lattice)
from .sampling import BallSamples, ball_samples


@dataclass(frozen=True)
class MeanLimitResult:
    """Shrinking ball means of f with the |f|-boundedness check."""

    estimate: LimitEstimate
    abs_bounded: bool
    max_abs_mean: float
    discarded: int

    def to_json_dict(self) -> dict:
        d = self.estimate.to_json_dict()
        d.update({"abs_bounded": self.abs_bounded,
                  "max_abs_mean": self.max_abs_mean})
        return d


@dataclass(frozen=True)
class LebesguePointResult:
    is_lebesgue_point: bool
    value: float
    residuals: LimitEstimate

    def to_json_dict(self) -> dict:
        return {"is_lebesgue_point": self.is_lebesgue_point, "value": self.value,
                "residuals": self.residuals.to_json_dict()}


@dataclass(frozen=True)
class PreciseRepresentative:
    """Point value with its provenance: "ap-limit", "mean", or "default-zero"."""

    value: float
    provenance: str
    ap: Optional[ApproxLimitResult] = None
    mean: Optional[MeanLimitResult] = None

    def to_json_dict(self) -> dict:
        return {"value": self.value, "provenance": self.provenance}


@dataclass(frozen=True)
class JumpReport:
    """One-sided structure of f at a candidate jump point."""

    is_jump: bool
    f_minus: float
    f_plus: float
    nu: np.ndarray
    tilde_f: float
    residual_minus: float
    residual_plus: float
    jump_tol: float
    direction_confident: bool

    def to_json_dict(self) -> dict:
        return {"is_jump": self.is_jump, "f_minus": self.f_minus,
                "f_plus": self.f_plus, "nu": self.nu.tolist(),
                "tilde_f": self.tilde_f,
                "residual_minus": self.residual_minus,
                "residual_plus": self.residual_plus,
                "jump_tol": self.jump_tol,
                "direction_confident": self.direction_confident}


def _means_from_samples(samples: BallSamples, tol: float) -> MeanLimitResult:
    means, abs_means = [], []
    discarded = 0
    for lv in samples.levels:
        finite = lv.finite_values
        if finite.size == 0:
            raise NotDensityPoint(
                f"all samples at delta={lv.delta:g} were discarded")
        means.append(float(np.mean(finite)))
        abs_means.append(float(np.mean(np.abs(finite))))
        discarded += lv.discarded
    est = LimitEstimate.from_values(means, samples.deltas, samples.tail_window,
                                    tol, discarded=discarded)
    max_abs = max(abs_means)
    return MeanLimitResult(est, math.isfinite(max_abs), max_abs, discarded)


def mean_limit(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
               cfg: QuadratureConfig, tol: float = DEFAULT_LIMIT_TOL) -> MeanLimitResult:
    """Limit of ball means of f over B_delta(x) within Omega."""
    samples = ball_samples(f, Omega, as_point(x, Omega.dim), sched, cfg)
    return _means_from_samples(samples, tol)


def is_lebesgue_point(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
                      cfg: QuadratureConfig,
                      tol: float = DEFAULT_LIMIT_TOL) -> LebesguePointResult:
    """True iff the ball means of |f - f(x)| vanish along the schedule."""
    x = as_point(x, Omega.dim)
    fx = f.at(x)
    if not math.isfinite(fx):
        raise PreconditionError("f is not evaluable at x")
    samples = ball_samples(f, Omega, x, sched, cfg)
    residuals = []
    for lv in samples.levels:
        finite = lv.finite_values
        if finite.size == 0:
            raise NotDensityPoint(
                f"all samples at delta={lv.delta:g} were discarded")
        residuals.append(float(np.mean(np.abs(finite - fx))))
    est = LimitEstimate.from_values(residuals, samples.deltas,
                                    samples.tail_window, tol)
    ok = bool(est.point_value < tol and est.liminf_est <= est.values[0] + tol)
    return LebesguePointResult(ok, fx, est)


def precise_representative(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
                           cfg: QuadratureConfig, cap: float = DEFAULT_CAP,
                           tol: float = DEFAULT_LIMIT_TOL,
                           density_tol: float = DEFAULT_DENSITY_TOL,
                           alpha_rtol: float = DEFAULT_ALPHA_RTOL,
                           agree_tol: float = DEFAULT_AGREE_TOL) -> PreciseRepresentative:
    """Point value at x: approximate limit if it exists, else the ball-mean
    limit, else the zero fallback."""
    x = as_point(x, Omega.dim)
    ap = ap_limit(f, Omega, x, sched, cfg, cap=cap, density_tol=density_tol,
                  alpha_rtol=alpha_rtol, agree_tol=agree_tol)
    if ap.ap_limit is not None:
        return PreciseRepresentative(ap.ap_limit, "ap-limit", ap=ap)
    mean = mean_limit(f, Omega, x, sched, cfg, tol=tol)
    if mean.estimate.converged and mean.abs_bounded:
        return PreciseRepresentative(mean.estimate.point_value, "mean",
                                     ap=ap, mean=mean)
    return PreciseRepresentative(0.0, "default-zero", ap=ap, mean=mean)


# ---------------------------------------------------------------------------
# Jump detection


def halfspace_region(Omega: Region, x: np.ndarray, nu: np.ndarray,
                     side: float) -> Region:
    """Omega restricted to the open half-space side*nu.(y - x) > 0."""
    return Region(Omega.dim,
                  lambda p: ((np.atleast_2d(p) - x) @ (side * nu) > 0.0)
                  & Omega.contains(p),
                  Omega.bbox, label=f"{Omega.label}&H{'+' if side > 0 else '-'}")


def _moment_direction(samples: BallSamples) -> Optional[np.ndarray]:
    """First-moment normal estimate: direction of sum (f - mean f)(y - x).

    For an oriented two-value step this is exact up to lattice symmetry,
    with no angular quantization, so it beats any finite direction sweep.
    """
    acc = np.zeros(samples.x.size)
    for lv in samples.levels[-samples.tail_window:]:
        finite = np.isfinite(lv.values)
        if not np.any(finite):
            continue
        pts = (lv.points[finite] - samples.x) / lv.delta
        vals = lv.values[finite]
        acc += (vals - vals.mean()) @ pts
    norm = np.linalg.norm(acc)
    if norm == 0.0:
        return None
    return acc / norm


def _gap_profile(samples: BallSamples, dirs: np.ndarray) -> np.ndarray:
    """Mean over tail levels of (half-space mean difference) per direction."""
    gaps = np.zeros(dirs.shape[0])
    used = 0
    for lv in samples.levels[-samples.tail_window:]:
        finite = np.isfinite(lv.values)
        pts = lv.points[finite] - samples.x
        vals = lv.values[finite]
        if vals.size == 0:
            continue
        dots = pts @ dirs.T
        pos = dots > 0.0
        npos = pos.sum(axis=0)
        nneg = (~pos).sum(axis=0)
        ok = (npos > 0) & (nneg > 0)
        sums = vals @ pos
        total = vals.sum()
        mean_pos = np.where(ok, sums / np.maximum(npos, 1), 0.0)
        mean_neg = np.where(ok, (total - sums) / np.maximum(nneg, 1), 0.0)
        gaps += np.where(ok, mean_pos - mean_neg, 0.0)
        used += 1
    return gaps / max(used, 1)


def _refine_direction_2d(samples: BallSamples, v0: np.ndarray,
                         spacing: float) -> np.ndarray:
    """Golden-section refinement of the gap over the angle around v0."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    t0 = math.atan2(v0[1], v0[0])
    a, b = t0 - spacing, t0 + spacing

    def gap_of(t: float) -> float:
        d = np.array([[math.cos(t), math.sin(t)]])
        return float(_gap_profile(samples, d)[0])

    c = b - phi * (b - a)
    d_ = a + phi * (b - a)
    fc, fd = gap_of(c), gap_of(d_)
    for _ in range(40):
        if fc > fd:
            b, d_, fd = d_, c, fc
            c = b - phi * (b - a)
            fc = gap_of(c)
        else:
            a, c, fc = c, d_, fd
            d_ = a + phi * (b - a)
            fd = gap_of(d_)
    t = 0.5 * (a + b)
    return np.array([math.cos(t), math.sin(t)])


def _refine_direction_3d(samples: BallSamples, v0: np.ndarray,
                         spacing: float) -> np.ndarray:
    """Coordinate golden-section on two great-circle parameters around v0."""
    v = v0.copy()
    for _ in range(4):
        basis = _orthonormal_complement(v)
        for e in basis:
            phi = (math.sqrt(5.0) - 1.0) / 2.0
            a, b = -spacing, spacing

            def gap_of(t: float) -> float:
                cand = math.cos(t) * v + math.sin(t) * e
                return float(_gap_profile(samples, cand[None, :])[0])

            c = b - phi * (b - a)
            d_ = a + phi * (b - a)
            fc, fd = gap_of(c), gap_of(d_)
            for _ in range(20):
                if fc > fd:
                    b, d_, fd = d_, c, fc
                    c = b - phi * (b - a)
                    fc = gap_of(c)
                else:
                    a, c, fc = c, d_, fd
                    d_ = a + phi * (b - a)
                    fd = gap_of(d_)
            t = 0.5 * (a + b)
            v = math.cos(t) * v + math.sin(t) * e
            v /= np.linalg.norm(v)
        spacing /= 4.0
    return v


def _orthonormal_complement(v: np.ndarray) -> list:
    idx = int(np.argmin(np.abs(v)))
    e = np.zeros_like(v)
    e[idx] = 1.0
    u1 = np.cross(v, e)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(v, u1)
    u2 /= np.linalg.norm(u2)
    return [u1, u2]


def detect_jump(f: ScalarField, Omega: Region, x, sched: DeltaSchedule,
                cfg: QuadratureConfig, n_dirs: Optional[int] = None,
                jump_rtol: float = 1e-2, cap: float = DEFAULT_CAP,
                density_tol: float = DEFAULT_DENSITY_TOL,
                alpha_rtol: float = DEFAULT_ALPHA_RTOL,
                agree_tol: float = DEFAULT_AGREE_TOL) -> JumpReport:
    """One-sided limits of f at x across the best separating hyperplane.

    The normal candidate sweep maximizes the difference of half-space
    means, then golden-section refinement sharpens it; f_minus/f_plus are
    one-sided approximate limits within the two open half-spaces.
    """
    x = as_point(x, Omega.dim)
    if n_dirs is None:
        n_dirs = 192 if Omega.dim == 3 else 64
    samples = ball_samples(f, Omega, x, sched, cfg)
    lo, hi = samples.finite_range()
    local_range = max(hi - lo, 0.0)
    jump_tol = jump_rtol * max(local_range, 1e-9)

    dirs = unit_directions(n_dirs, Omega.dim)
    gaps = _gap_profile(samples, dirs)
    best = int(np.argmax(gaps))
    ties = np.flatnonzero(gaps >= gaps[best] - 1e-12)
    best = min(ties, key=lambda i: tuple(dirs[i]))
    nu = dirs[best]
    spacing = 2.0 * math.pi / n_dirs
    if Omega.dim == 2:
        nu = _refine_direction_2d(samples, nu, spacing)
    elif Omega.dim == 3:
        nu = _refine_direction_3d(samples, nu, spacing)
    confident = bool(gaps[best] > jump_tol)
    moment = _moment_direction(samples)
    if moment is not None:
        # quantization-free candidate; keep whichever separates better
        g_m = float(_gap_profile(samples, moment[None, :])[0])
        g_r = float(_gap_profile(samples, nu[None, :])[0])
        if g_m >= g_r - 1e-12:
            nu = moment

    # one-sided limits must not be corrupted by the O(theta) sliver of
    # misassigned lattice points near the separating hyperplane
    side_tol = max(density_tol, 2e-2)
    plus = ap_limit(f, halfspace_region(Omega, x, nu, +1.0), x, sched, cfg,
                    cap=cap, density_tol=side_tol, alpha_rtol=alpha_rtol,
                    agree_tol=agree_tol)
    minus = ap_limit(f, halfspace_region(Omega, x, nu, -1.0), x, sched, cfg,
                     cap=cap, density_tol=side_tol, alpha_rtol=alpha_rtol,
                     agree_tol=agree_tol)
    f_plus = plus.ap_limit if plus.ap_limit is not None else \
        0.5 * (plus.f_lower + plus.f_upper)
    f_minus = minus.ap_limit if minus.ap_limit is not None else \
        0.5 * (minus.f_lower + minus.f_upper)
    if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
        raise UnboundedNearX("one-sided limits exceed the cap near x")
    if f_plus < f_minus:
        nu = -nu
        f_plus, f_minus = f_minus, f_plus

    res_plus, res_minus = _one_sided_residuals(samples, nu, f_plus, f_minus)
    return JumpReport(bool(f_plus - f_minus > jump_tol), float(f_minus),
                      float(f_plus), nu, 0.5 * (f_minus + f_plus),
                      float(res_minus), float(res_plus), jump_tol, confident)


def _one_sided_residuals(samples: BallSamples, nu: np.ndarray,
                         f_plus: float, f_minus: float) -> tuple[float, float]:
    lv = samples.levels[-1]
    finite = np.isfinite(lv.values)
    pts = lv.points[finite] - samples.x
    vals = lv.values[finite]
    side = pts @ nu
    plus_mask = side > 0.0
    minus_mask = side < 0.0
    res_plus = float(np.mean(np.abs(vals[plus_mask] - f_plus))) \
        if np.any(plus_mask) else math.nan
    res_minus = float(np.mean(np.abs(vals[minus_mask] - f_minus))) \
        if np.any(minus_mask) else math.nan
    return res_plus, res_minus


def boundary_trace(f: ScalarField, Omega: Region, x_boundary, sched: DeltaSchedule,
                   cfg: QuadratureConfig, tol: float = DEFAULT_LIMIT_TOL) -> float:
    """Trace of f at a boundary point via interior ball means.

    x must sit on an indicator sign change (both member and non-member
    probes in a small ball); the domain must be Lipschitz near x, which the
    caller asserts.
    """
    x = as_point(x_boundary, Omega.dim)
    probe_r = float(sched.deltas[-1])
    probe, _ = lattice(ball_window(x, probe_r), min(cfg.resolution, 32))
    inside = Omega.contains(probe)
    if bool(np.all(inside)) or not bool(np.any(inside)):
        raise NotBoundaryPoint(
            f"no indicator sign change within {probe_r:g} of the queried point")
    return mean_limit(f, Omega, x, sched, cfg, tol=tol).estimate.point_value
