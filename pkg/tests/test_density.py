import math

import numpy as np
import pytest

from densilim import registry
from densilim.density import (concentration_direction, cone_density,
                              density_at_point, density_at_set, is_density_set)
from densilim.errors import NotDensityPoint, NotDensitySet, PreconditionError
from densilim.expr import compile_region
from densilim.geometry import (Box, DeltaSchedule, QuadratureConfig, Region,
                               ball_region, circle_region, point_region,
                               segment_region)

CFG = QuadratureConfig(resolution=128)
PLANE = registry.get_region("plane")
SCHED = DeltaSchedule(1.0, 0.5, 12, 4)


def region(src, lo=(-2, -2), hi=(2, 2)):
    return compile_region(src, 2, Box(lo, hi))


def test_full_density_is_one():
    est = density_at_point(PLANE, PLANE, [0, 0], SCHED, CFG)
    assert est.point_value == 1.0 and est.converged


def test_halfplane_density():
    est = density_at_point(region("x2 > 0"), PLANE, [0, 0], SCHED, CFG)
    assert abs(est.point_value - 0.5) <= 5e-3


def test_quarterplane_density():
    est = density_at_point(region("x1 > 0 and x2 > 0"), PLANE, [0, 0], SCHED, CFG)
    assert abs(est.point_value - 0.25) <= 5e-3


def test_complement_identity_exact():
    a = region("x2 > 0")
    ac = region("not (x2 > 0)")
    e1 = density_at_point(a, PLANE, [0.1, 0.2], SCHED, CFG)
    e2 = density_at_point(ac, PLANE, [0.1, 0.2], SCHED, CFG)
    assert np.all(e1.values + e2.values == 1.0)


def test_disjoint_additivity_on_counts():
    a = region("x1 > 0 and x2 > 0")
    b = region("x1 < 0 and x2 > 0")
    u = region("(x1 > 0 and x2 > 0) or (x1 < 0 and x2 > 0)")
    ea = density_at_point(a, PLANE, [0, 0], SCHED, CFG)
    eb = density_at_point(b, PLANE, [0, 0], SCHED, CFG)
    eu = density_at_point(u, PLANE, [0, 0], SCHED, CFG)
    assert np.array_equal(ea.numerator_counts + eb.numerator_counts,
                          eu.numerator_counts)
    assert np.array_equal(ea.denominator_counts, eu.denominator_counts)
    assert np.max(np.abs(ea.values + eb.values - eu.values)) <= 1e-15


def test_values_clamped_by_construction():
    est = density_at_point(region("x2 > 0"), PLANE, [0, 0], SCHED, CFG)
    assert np.all(est.numerator_counts <= est.denominator_counts)
    assert np.all((est.values >= 0.0) & (est.values <= 1.0))


def test_sandwich_structure():
    est = density_at_point(region("x2 > 0"), PLANE, [0.3, -0.2], SCHED, CFG)
    assert est.liminf_est <= est.point_value <= est.limsup_est


def test_not_density_point():
    disk = ball_region([0, 0], 1.0)
    with pytest.raises(NotDensityPoint):
        density_at_point(region("x2 > 0"), disk, [3.0, 0.0], SCHED, CFG)


def test_oscillating_density_not_converged():
    rings = region("if(sin(6*log(sqrt(x1^2 + x2^2))) > 0, 1, 0) > 0.5")
    est = density_at_point(rings, PLANE, [0, 0], DeltaSchedule(1.0, 0.5, 14, 6),
                           CFG)
    assert not est.converged
    assert est.limsup_est - est.liminf_est > 0.1


def test_density_at_circle():
    # oracle: inner share of the annulus (2d - d^2) / (4d) -> 1/2
    C = circle_region([0, 0], 1.0)
    A = ball_region([0, 0], 1.0)
    est = density_at_set(A, PLANE, C, DeltaSchedule(0.4, 0.5, 7, 3),
                         QuadratureConfig(resolution=64))
    assert abs(est.point_value - 0.5) <= 1e-2


def test_density_at_point_set_consistency():
    C = point_region([0.0, 0.0])
    hp = region("x2 > 0")
    e_set = density_at_set(hp, PLANE, C, SCHED, CFG)
    e_pt = density_at_point(hp, PLANE, [0, 0], SCHED, CFG)
    assert np.max(np.abs(e_set.values - e_pt.values)) <= 1e-9


def test_density_at_segment():
    # oracle: stadium halves split by the segment axis; caps vanish with delta
    C = segment_region([0, 0], [1, 0])
    est = density_at_set(region("x2 > 0"), PLANE, C,
                         DeltaSchedule(0.4, 0.5, 7, 3),
                         QuadratureConfig(resolution=64))
    assert abs(est.point_value - 0.5) <= 1e-2


def test_is_density_set_examples():
    disk = ball_region([0, 0], 1.0)
    sched = DeltaSchedule(0.4, 0.5, 6, 3)
    assert is_density_set(point_region([0.0, 0.0]), disk, sched, CFG).is_density_set
    rep = is_density_set(point_region([2.0, 0.0]), disk, sched, CFG)
    assert not rep.is_density_set and "C_delta" in rep.failed
    closed = Region(2, lambda p: np.linalg.norm(p, axis=1) <= 1.0,
                    Box([-1, -1], [1, 1]), label="closed_disk")
    rep = is_density_set(closed, disk, sched, CFG)
    assert not rep.is_density_set and "lambda(C & Omega)" in rep.failed


def test_density_at_set_rejects_fat_sets():
    closed = Region(2, lambda p: np.linalg.norm(p, axis=1) <= 1.0,
                    Box([-1, -1], [1, 1]), label="closed_disk")
    with pytest.raises(NotDensitySet):
        density_at_set(region("x2 > 0"), PLANE, closed, SCHED, CFG)


def test_cone_density_plane():
    # oracle: cone sector fraction 2*alpha / (2*pi)
    est = cone_density(PLANE, [0, 0], [1.0, 0.0], math.pi / 4, SCHED, CFG)
    assert abs(est.point_value - 0.25) <= 5e-3


def test_cone_density_cusp():
    cusp = registry.get_region("cusp_right")
    sched = DeltaSchedule(0.5, 0.5, 5, 3)
    est = cone_density(cusp, [0, 0], [1.0, 0.0], math.pi / 4, sched, CFG)
    assert est.point_value == 1.0
    est = cone_density(cusp, [0, 0], [-1.0, 0.0], math.pi / 4, sched, CFG)
    assert est.point_value == 0.0


def test_cone_monotone_in_angle():
    est1 = cone_density(PLANE, [0, 0], [1.0, 0.0], math.pi / 8, SCHED, CFG)
    est2 = cone_density(PLANE, [0, 0], [1.0, 0.0], math.pi / 3, SCHED, CFG)
    assert np.all(est1.values <= est2.values)


def test_cone_requires_unit_axis():
    with pytest.raises(PreconditionError):
        cone_density(PLANE, [0, 0], [2.0, 0.0], math.pi / 4, SCHED, CFG)


def test_cone_density_3d():
    # oracle: solid-angle fraction (1 - cos(alpha)) / 2
    plane3 = Region(3, lambda p: np.ones(p.shape[0], dtype=bool),
                    Box([-1, -1, -1], [1, 1, 1]), label="space")
    sched = DeltaSchedule(0.5, 0.5, 6, 3)
    alpha = math.pi / 3
    est = cone_density(plane3, [0, 0, 0], [0.0, 0.0, 1.0], alpha, sched,
                       QuadratureConfig(resolution=48))
    assert abs(est.point_value - (1 - math.cos(alpha)) / 2) <= 1e-2


def test_concentration_cusp():
    cusp = registry.get_region("cusp_right")
    r = concentration_direction(cusp, [0, 0], DeltaSchedule(0.5, 0.5, 5, 3), CFG)
    ang = math.degrees(math.acos(np.clip(r.direction @ np.array([1.0, 0.0]),
                                         -1, 1)))
    assert ang <= 5.0 and r.score >= 0.99 and r.unique


def test_concentration_wedge():
    wedge = registry.get_region("wedge")
    r = concentration_direction(wedge, [0, 0], DeltaSchedule(1.0, 0.5, 8, 3), CFG)
    ang = math.degrees(math.acos(np.clip(r.direction @ np.array([0.0, 1.0]),
                                         -1, 1)))
    assert ang <= 5.0 and r.unique


def test_concentration_isotropic_flagged():
    r = concentration_direction(PLANE, [0, 0], DeltaSchedule(1.0, 0.5, 8, 3), CFG)
    assert not r.unique
    assert abs(r.score - 0.25) <= 5e-3  # 2*alpha0/(2*pi) at alpha0 = pi/4


def test_concentration_two_lobes_not_unique():
    lobes = region("abs(x2) > abs(x1)")
    r = concentration_direction(lobes, [0, 0], DeltaSchedule(1.0, 0.5, 8, 3), CFG)
    assert not r.unique


def test_limit_estimate_convergence_invariant():
    # converged implies the tail spread is below 2*tol
    for A in (region("x2 > 0"), region("x1 > 0 and x2 > 0")):
        est = density_at_point(A, PLANE, [0.07, -0.03], SCHED, CFG)
        if est.converged:
            assert est.limsup_est - est.liminf_est < 2 * est.tol
        assert est.liminf_est <= est.point_value <= est.limsup_est
