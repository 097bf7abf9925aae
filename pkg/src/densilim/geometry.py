"""Regions, windows, delta schedules, and Lebesgue-measure estimation.

A region is a measurable subset of R^n given by a vectorized boolean
predicate plus a bounding box.  Null sets (points, curves) additionally
declare an explicit sample generator, since rejection sampling cannot
find them.  All measure estimates are deterministic given the quadrature
configuration; grid mode is the reference, Monte Carlo exists for n > 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, EmptyRegion, EmptyWindow, PreconditionError

Indicator = Callable[[np.ndarray], np.ndarray]  # (m, n) float -> (m,) bool


def as_point(x, dim: int | None = None) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if dim is not None and p.shape != (dim,):
        raise DimensionMismatch(f"expected point of dim {dim}, got shape {p.shape}")
    return p


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] in R^n."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, dtype=float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, dtype=float)))
        if self.lo.shape != self.hi.shape:
            raise DimensionMismatch("box corners have different dimensions")

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def inflate(self, pad: float) -> "Box":
        return Box(self.lo - pad, self.hi + pad)

    def hull(self, other: "Box") -> "Box":
        return Box(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def intersect(self, other: "Box") -> "Box":
        return Box(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lo) & (points <= self.hi), axis=1)

    def is_degenerate(self) -> bool:
        return bool(np.any(self.sides <= 0.0))

    def to_json_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass
class Region:
    """Predicate-defined subset of R^n with a bounding box.

    ``cloud_fn(n)`` returns >= 1 points on the region and must be supplied
    for null sets.  ``boundary_fn(m)`` returns (points, arc weights, inward
    unit normals) and enables boundary quadrature on Lipschitz primitives.
    ``components`` lists subdomains treated separately by the divergence
    checks (domains with inner boundaries).
    """

    dim: int
    indicator: Indicator
    bbox: Box
    label: str = ""
    cloud_fn: Optional[Callable[[int], np.ndarray]] = None
    boundary_fn: Optional[Callable[[int], tuple]] = None
    lipschitz: bool = False
    components: Optional[list] = None
    json_spec: Optional[dict] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.bbox.dim != self.dim:
            raise DimensionMismatch("bbox dimension differs from region dimension")

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise DimensionMismatch(
                f"points of dim {points.shape[1]} vs region of dim {self.dim}")
        out = np.asarray(self.indicator(points))
        return out.astype(bool).reshape(points.shape[0])


def intersect(a: Region, b: Region, label: str = "") -> Region:
    if a.dim != b.dim:
        raise DimensionMismatch("cannot intersect regions of different dimension")
    return Region(a.dim, lambda p: a.contains(p) & b.contains(p),
                  a.bbox.intersect(b.bbox),
                  label=label or f"({a.label})&({b.label})")


def union(a: Region, b: Region, label: str = "") -> Region:
    if a.dim != b.dim:
        raise DimensionMismatch("cannot unite regions of different dimension")
    return Region(a.dim, lambda p: a.contains(p) | b.contains(p),
                  a.bbox.hull(b.bbox),
                  label=label or f"({a.label})|({b.label})")


def complement(a: Region, within: Box, label: str = "") -> Region:
    return Region(a.dim, lambda p: ~a.contains(p), within,
                  label=label or f"not({a.label})")


# ---------------------------------------------------------------------------
# Primitive regions


def box_region(lo, hi, label: str = "box") -> Region:
    b = Box(lo, hi)

    def boundary(m: int):
        return _box_boundary(b, m)

    return Region(b.dim, b.contains, b, label=label, boundary_fn=boundary,
                  lipschitz=True,
                  json_spec={"kind": "primitive",
                             "payload": {"name": "box", "lo": b.lo.tolist(),
                                         "hi": b.hi.tolist()}})


def ball_region(center, radius: float, label: str = "ball") -> Region:
    c = as_point(center)
    if radius <= 0:
        raise PreconditionError("ball radius must be positive")

    def ind(p):
        return np.linalg.norm(np.atleast_2d(p) - c, axis=1) < radius

    def boundary(m: int):
        if c.size != 2:
            raise PreconditionError("analytic boundary only for 2-d disks")
        t = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
        pts = c + radius * np.stack([np.cos(t), np.sin(t)], axis=1)
        w = np.full(m, 2.0 * math.pi * radius / m)
        inward = -np.stack([np.cos(t), np.sin(t)], axis=1)
        return pts, w, inward

    return Region(c.size, ind, Box(c - radius, c + radius), label=label,
                  boundary_fn=boundary, lipschitz=True,
                  json_spec={"kind": "primitive",
                             "payload": {"name": "ball", "center": c.tolist(),
                                         "radius": radius}})


def point_region(x, pad: float = 1e-9, label: str = "point") -> Region:
    """Single-point null set; the bbox is degenerate at x (cloud bbox rules)."""
    x = as_point(x)

    def ind(p):
        return np.all(np.atleast_2d(p) == x, axis=1)

    return Region(x.size, ind, Box(x - pad, x + pad), label=label,
                  cloud_fn=lambda n: np.tile(x, (max(n, 1), 1)),
                  json_spec={"kind": "pointcloud", "payload": {"points": [x.tolist()]}})


def circle_region(center, radius: float, label: str = "circle") -> Region:
    """Circle |y - c| = r in R^2 as a null set with a parametrized cloud."""
    c = as_point(center, 2)

    def ind(p):
        return np.linalg.norm(np.atleast_2d(p) - c, axis=1) == radius

    def cloud(n):
        t = np.linspace(0.0, 2.0 * math.pi, max(n, 8), endpoint=False)
        return c + radius * np.stack([np.cos(t), np.sin(t)], axis=1)

    return Region(2, ind, Box(c - radius, c + radius), label=label, cloud_fn=cloud,
                  json_spec={"kind": "primitive",
                             "payload": {"name": "circle", "center": c.tolist(),
                                         "radius": radius}})


def segment_region(a, b, label: str = "segment") -> Region:
    """Straight segment [a, b] as a null set with a parametrized cloud."""
    a = as_point(a)
    b = as_point(b, a.size)
    d = b - a
    L2 = float(d @ d)

    def ind(p):
        p = np.atleast_2d(p)
        t = np.clip((p - a) @ d / L2, 0.0, 1.0)
        proj = a + t[:, None] * d
        return np.linalg.norm(p - proj, axis=1) == 0.0

    def cloud(n):
        t = np.linspace(0.0, 1.0, max(n, 2))
        return a + t[:, None] * d

    return Region(a.size, ind, Box(np.minimum(a, b), np.maximum(a, b)),
                  label=label, cloud_fn=cloud,
                  json_spec={"kind": "primitive",
                             "payload": {"name": "segment", "a": a.tolist(),
                                         "b": b.tolist()}})


def _box_boundary(b: Box, m: int):
    if b.dim != 2:
        raise PreconditionError("analytic boundary only for 2-d boxes")
    (x0, y0), (x1, y1) = b.lo, b.hi
    per_side = max(m // 4, 2)
    pts, ws, nrm = [], [], []
    sides = [  # (start, end, inward normal)
        ((x0, y0), (x1, y0), (0.0, 1.0)),
        ((x1, y0), (x1, y1), (-1.0, 0.0)),
        ((x1, y1), (x0, y1), (0.0, -1.0)),
        ((x0, y1), (x0, y0), (1.0, 0.0)),
    ]
    for start, end, n in sides:
        start, end = np.asarray(start), np.asarray(end)
        t = (np.arange(per_side) + 0.5) / per_side
        pts.append(start + t[:, None] * (end - start))
        ln = float(np.linalg.norm(end - start))
        ws.append(np.full(per_side, ln / per_side))
        nrm.append(np.tile(n, (per_side, 1)))
    return np.concatenate(pts), np.concatenate(ws), np.concatenate(nrm)


# ---------------------------------------------------------------------------
# Schedules and quadrature configuration


@dataclass(frozen=True)
class DeltaSchedule:
    """Geometric sequence delta0 * ratio**k, k = 0..steps-1."""

    delta0: float
    ratio: float = 0.5
    steps: int = 12
    tail_window: int = 4

    def __post_init__(self):
        if self.delta0 <= 0:
            raise PreconditionError("delta0 must be positive")
        if not 0.0 < self.ratio < 1.0:
            raise PreconditionError("ratio must lie in (0, 1)")
        if self.steps < 1:
            raise PreconditionError("steps must be positive")
        if not 2 <= self.tail_window <= self.steps:
            raise PreconditionError("tail_window must satisfy 2 <= w <= steps")

    @property
    def deltas(self) -> np.ndarray:
        return self.delta0 * self.ratio ** np.arange(self.steps)

    @classmethod
    def default_for(cls, box: Box, steps: int = 12, tail_window: int = 4) -> "DeltaSchedule":
        return cls(0.5 * float(np.min(box.sides)), 0.5, steps, tail_window)

    def to_json_dict(self) -> dict:
        return {"delta0": self.delta0, "ratio": self.ratio,
                "steps": self.steps, "tail_window": self.tail_window}


@dataclass(frozen=True)
class QuadratureConfig:
    """Measure-estimation settings.

    ``resolution`` is points per axis in grid mode and total sample count in
    Monte Carlo mode.  Identical (mode, resolution, seed) give bit-identical
    estimates regardless of the parallel flag: work is always partitioned
    deterministically, so results do not depend on thread count.
    """

    mode: str = "grid"
    resolution: int = 128
    seed: int = 20260809
    parallel: bool = False
    cloud_size: int = 4096
    refine_levels: int = 80
    refine_top: int = 3

    def __post_init__(self):
        if self.mode not in ("grid", "monte_carlo"):
            raise PreconditionError(f"unknown quadrature mode {self.mode!r}")
        if self.resolution < 2:
            raise PreconditionError("resolution must be at least 2 per axis")

    def to_json_dict(self) -> dict:
        # the parallel flag is an execution hint that cannot change results,
        # so reports stay bit-identical across thread counts
        return {"mode": self.mode, "resolution": self.resolution,
                "seed": self.seed}


@dataclass(frozen=True)
class MeasureEstimate:
    """Estimated n-volume; ``hits`` is the exact lattice/sample count."""

    value: float
    std_error: float
    samples_used: int
    hits: int


# ---------------------------------------------------------------------------
# Lattices and measures


def lattice(window: Box, resolution: int) -> tuple[np.ndarray, float]:
    """Midpoint lattice over the window: (res**n, n) points and cell volume."""
    if resolution ** window.dim > 2 ** 24:
        raise PreconditionError(
            f"grid lattice of {resolution}^{window.dim} points is infeasible; "
            "use monte_carlo mode for higher dimensions")
    axes = [window.lo[i] + (np.arange(resolution) + 0.5) * (window.sides[i] / resolution)
            for i in range(window.dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    cellvol = float(np.prod(window.sides / resolution))
    return pts, cellvol


def ball_window(x, delta: float) -> Box:
    """Bounding box [x - delta, x + delta]^n of the ball B_delta(x)."""
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    x = as_point(x)
    return Box(x - delta, x + delta)


def shell_lattice(cloud: np.ndarray, delta: float, resolution: int) -> np.ndarray:
    """Midpoint-lattice candidates covering the delta-tube around a cloud.

    Spacing is 2*delta/resolution per axis (constant points per delta), the
    grid is anchored at the cloud bbox inflated by delta, and only cells
    within reach of the cloud are enumerated, so thin shells around long
    structures stay resolved without rasterizing the whole bbox.  For a
    degenerate (single-point) cloud this is exactly the full window lattice.
    """
    cloud = np.atleast_2d(cloud)
    n = cloud.shape[1]
    base_lo, base_hi = cloud.min(axis=0), cloud.max(axis=0)
    if np.all(base_hi - base_lo == 0.0):
        pts, _ = lattice(Box(base_lo - delta, base_hi + delta), resolution)
        return pts
    lo = base_lo - delta
    h = 2.0 * delta / resolution
    tree = cKDTree(cloud)
    H = max(delta / 2.0, h)
    cmin = base_lo - delta - H
    cmax = base_hi + delta + H
    counts = np.maximum(np.ceil((cmax - cmin) / H).astype(int), 1)
    axes = [cmin[i] + (np.arange(counts[i]) + 0.5) * H for i in range(n)]
    grids = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=1)
    d, _ = tree.query(centers, k=1)
    centers = centers[d < delta + H * math.sqrt(n)]
    if centers.shape[0] == 0:
        return np.empty((0, n))
    # fine index block spanned by one coarse cell
    span = int(math.ceil(H / h)) + 1
    block_axes = [np.arange(span)] * n
    block = np.stack([g.ravel() for g in np.meshgrid(*block_axes, indexing="ij")],
                     axis=1)
    k0 = np.floor((centers - 0.5 * H - lo) / h).astype(np.int64)
    idx = (k0[:, None, :] + block[None, :, :]).reshape(-1, n)
    kmin = idx.min(axis=0)
    rng = idx.max(axis=0) - kmin + 1
    key = np.zeros(idx.shape[0], dtype=np.int64)
    for i in range(n):
        key = key * int(rng[i]) + (idx[:, i] - kmin[i])
    uniq = np.unique(key)
    out = np.empty((uniq.size, n))
    rem = uniq
    for i in range(n - 1, -1, -1):
        out[:, i] = lo[i] + ((rem % int(rng[i])) + kmin[i] + 0.5) * h
        rem = rem // int(rng[i])
    return out


def lebesgue(region: Region, window: Box, cfg: QuadratureConfig) -> MeasureEstimate:
    """Estimate of lambda^n(region intersected with window).

    Grid mode counts region membership at midpoints of a regular lattice
    (no cell clipping; error is O(h * perimeter)).  Monte Carlo mode draws
    seed-derived uniform samples over the window.
    """
    if region.dim != window.dim:
        raise DimensionMismatch(
            f"region dim {region.dim} vs window dim {window.dim}")
    if window.is_degenerate():
        raise EmptyWindow(f"window has non-positive side lengths: {window.sides}")
    if cfg.mode == "grid":
        pts, cellvol = lattice(window, cfg.resolution)
        hits = int(np.count_nonzero(region.contains(pts)))
        value = min(hits * cellvol, window.volume)
        return MeasureEstimate(value, 0.0, pts.shape[0], hits)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.resolution
    pts = window.lo + rng.random((n, window.dim)) * window.sides
    hits = int(np.count_nonzero(region.contains(pts)))
    p = hits / n
    value = window.volume * p
    std = window.volume * math.sqrt(max(p * (1.0 - p), 0.0) / n)
    return MeasureEstimate(value, std, n, hits)


# ---------------------------------------------------------------------------
# Point clouds, distance fields, neighborhoods


def point_cloud(region: Region, cfg: QuadratureConfig) -> np.ndarray:
    """Sample points of the region (declared generator or rejection lattice)."""
    key = ("cloud", cfg.cloud_size, cfg.resolution)
    if key in region._cache:
        return region._cache[key]
    if region.cloud_fn is not None:
        cloud = np.atleast_2d(np.asarray(region.cloud_fn(cfg.cloud_size), dtype=float))
        cloud = np.unique(cloud, axis=0)  # duplicates degenerate the KD-tree
    else:
        cloud = None
        res = max(cfg.resolution, 64)
        while res <= 1024:
            pts, _ = lattice(region.bbox, res)
            mask = region.contains(pts)
            if np.any(mask):
                cloud = pts[mask]
                break
            res *= 2
        if cloud is None:
            raise EmptyRegion(
                f"no sample of region {region.label!r} found up to resolution 1024; "
                "null sets must declare an explicit sample generator")
    region._cache[key] = cloud
    return cloud


def cloud_distance(cloud: np.ndarray):
    """Distance-to-cloud callable backed by a KD-tree."""
    tree = cKDTree(cloud)

    def dist(points: np.ndarray) -> np.ndarray:
        d, _ = tree.query(np.atleast_2d(points), k=1)
        return np.asarray(d)

    return dist


def neighborhood(C: Region, delta: float, cfg: QuadratureConfig | None = None) -> Region:
    """Open delta-neighborhood {y : dist_C(y) < delta} of the set C.

    dist_C is the distance to a pre-sampled point cloud of C; the bbox is the
    cloud bbox inflated by delta, so neighborhoods of the same set nest
    exactly across deltas.
    """
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    cfg = cfg or QuadratureConfig()
    cloud = point_cloud(C, cfg)
    dist = cloud_distance(cloud)
    bbox = Box(cloud.min(axis=0), cloud.max(axis=0)).inflate(delta)
    return Region(C.dim, lambda p: dist(p) < delta, bbox,
                  label=f"nbhd({C.label},{delta:g})")


# ---------------------------------------------------------------------------
# Region (de)serialization: {dim, kind, payload, bbox}


def region_to_json(region: Region) -> dict:
    if region.json_spec is None:
        raise PreconditionError(
            f"region {region.label!r} carries no serializable specification")
    d = dict(region.json_spec)
    d.update({"dim": region.dim, "bbox": region.bbox.to_json_dict(),
              "label": region.label})
    return d


def region_from_json(d: dict) -> Region:
    kind = d["kind"]
    payload = d["payload"]
    label = d.get("label", kind)
    if kind == "primitive":
        name = payload["name"]
        if name == "box":
            return box_region(payload["lo"], payload["hi"], label=label)
        if name == "ball":
            return ball_region(payload["center"], payload["radius"], label=label)
        if name == "circle":
            return circle_region(payload["center"], payload["radius"], label=label)
        if name == "segment":
            return segment_region(payload["a"], payload["b"], label=label)
        if name == "two_squares":
            from .registry import get_region
            return get_region("two_squares")
        raise PreconditionError(f"unknown primitive {name!r}")
    if kind == "pointcloud":
        pts = np.asarray(payload["points"], dtype=float)
        if pts.shape[0] == 1:
            return point_region(pts[0], label=label)
        reg = Region(pts.shape[1],
                     lambda p: np.zeros(np.atleast_2d(p).shape[0], dtype=bool),
                     Box(pts.min(axis=0), pts.max(axis=0)).inflate(1e-9),
                     label=label, cloud_fn=lambda n: pts,
                     json_spec={"kind": "pointcloud",
                                "payload": {"points": pts.tolist()}})
        return reg
    if kind == "expr":
        from .expr import compile_region
        bbox = d["bbox"]
        return compile_region(payload["src"], d["dim"],
                              Box(bbox["lo"], bbox["hi"]), label=label)
    raise PreconditionError(f"unknown region kind {kind!r}")
