import math

import numpy as np
import pytest

from densilim import registry
from densilim.errors import (AmbiguousNormal, NonLipschitzDomain,
                             PreconditionError, RegionsNotDisjoint)
from densilim.expr import compile_field, compile_region, compile_vector_field
from densilim.fields import constant_field
from densilim.gaussgreen import (gg_residual, gg_sweep, normal_field,
                                 vanishing_functional_demo)
from densilim.geometry import (Box, DeltaSchedule, QuadratureConfig,
                               ball_region, box_region)

CFG256 = QuadratureConfig(resolution=256)
SQUARE = box_region([0, 0], [1, 1], label="unit_square")
DISK = ball_region([0, 0], 1.0, label="disk")


def test_normal_on_square_side():
    nu = normal_field(SQUARE, [0.5, 0.1], CFG256)
    ang = math.degrees(math.acos(np.clip(nu @ np.array([0.0, -1.0]), -1, 1)))
    assert ang <= 1.0


def test_normal_on_disk_radial():
    for r in (0.5, 0.6, 0.75, 0.9, 0.95):
        for th in (0.3, 1.2, 2.5, 4.0):
            y = [r * math.cos(th), r * math.sin(th)]
            nu = normal_field(DISK, y, CFG256)
            radial = np.array([math.cos(th), math.sin(th)])
            ang = math.degrees(math.acos(np.clip(nu @ radial, -1, 1)))
            assert ang <= 1.0, (r, th, ang)


def test_normal_ambiguous_at_center():
    with pytest.raises(AmbiguousNormal):
        normal_field(SQUARE, [0.5, 0.5], CFG256)


def test_normal_on_predicate_region_via_edge_detection():
    # no analytic boundary: the cloud comes from indicator transitions
    disk = compile_region("x1^2 + x2^2 < 1", 2, Box([-1, -1], [1, 1]))
    nu = normal_field(disk, [0.8, 0.0], CFG256)
    ang = math.degrees(math.acos(np.clip(nu @ np.array([1.0, 0.0]), -1, 1)))
    assert ang <= 10.0


def test_normal_requires_interior_point():
    with pytest.raises(PreconditionError):
        normal_field(SQUARE, [2.0, 2.0], CFG256)


def test_gg_shear_on_square():
    # oracle: div phi = 1, so the volume side is the area of the square
    rep = gg_residual(constant_field(2, 1.0),
                      compile_vector_field(["x1", "0"], 2), SQUARE, CFG256)
    assert abs(rep.lhs - 1.0) <= 1e-3
    assert rep.residual <= 1e-3


def test_gg_rotor_pair_on_square():
    # oracle: both sides equal 1 analytically
    rep = gg_residual(compile_field("x1^2 + x2", 2),
                      compile_vector_field(["x2", "x1"], 2), SQUARE, CFG256)
    assert abs(rep.lhs - 1.0) <= 1e-3
    assert rep.residual <= 1e-3


def test_gg_disk_analytic():
    # oracle: lhs = 3 * integral of x1^2 = 3 pi / 4 = boundary integral
    rep = gg_residual(compile_field("x1^2", 2),
                      compile_vector_field(["x1", "0"], 2), DISK, CFG256)
    assert abs(rep.lhs - 0.75 * math.pi) <= 2e-2
    assert rep.residual <= 2e-2


def test_gg_linearity_in_phi():
    f = compile_field("x1^2 + x2", 2)
    cfg = QuadratureConfig(resolution=128)
    r1 = gg_residual(f, compile_vector_field(["x2", "x1"], 2), SQUARE, cfg)
    r2 = gg_residual(f, compile_vector_field(["2*x2", "2*x1"], 2), SQUARE, cfg)
    assert abs(r2.lhs - 2.0 * r1.lhs) <= 1e-9
    assert abs(r2.rhs - 2.0 * r1.rhs) <= 1e-9


def test_gg_convergence_ratio():
    sweep = gg_sweep(compile_field("x1^2 + x2", 2),
                     compile_vector_field(["x2", "x1"], 2), SQUARE,
                     QuadratureConfig(resolution=128), levels=3)
    for (h1, r1), (h2, r2) in zip(sweep, sweep[1:]):
        assert 1.3 <= r1 / r2 <= 3.0


def test_gg_two_squares_inner_boundary():
    ts = registry.get_region("two_squares")
    f = compile_field("x1^2 + x2", 2)
    # phi vanishes identically on the right square
    phi = compile_vector_field(["max(0, 1 - x1)^2 * x2",
                                "max(0, 1 - x1)^2 * x1"], 2)
    rep = gg_residual(f, phi, ts, CFG256)
    assert rep.residual <= 2e-3
    assert rep.components is not None and len(rep.components) == 2
    assert rep.components[1].lhs == 0.0 and rep.components[1].rhs == 0.0


def test_gg_rejects_unflagged_region():
    bare = compile_region("x1^2 + x2^2 < 1", 2, Box([-1, -1], [1, 1]))
    with pytest.raises(NonLipschitzDomain):
        gg_residual(constant_field(2, 1.0),
                    compile_vector_field(["x1", "0"], 2), bare, CFG256)


DEMO_SCHED = DeltaSchedule(0.5, 0.5, 8, 4)
DEMO_CFG = QuadratureConfig(resolution=512)


def demo_regions():
    return (registry.get_region("demo_cusp_right"),
            registry.get_region("demo_cusp_left"),
            registry.get_region("plane"))


def test_vanishing_on_continuous_fields():
    E1, E2, plane = demo_regions()
    for src in ("sin(3*x1)*cos(2*x2) + 1", "x1 + 2*x2 + 0.3",
                "exp(-(x1^2 + x2^2))", "x1^2 + x2^2", "2*x1 - 3*x2 + 0.5"):
        f = compile_field(src, 2)
        v = vanishing_functional_demo(f, [0, 0], E1, E2, plane, DEMO_SCHED,
                                      DEMO_CFG)
        assert abs(v) <= 1e-3, (src, v)


def test_vanishing_detects_discontinuity():
    E1, E2, plane = demo_regions()
    ind_e2 = compile_field("if(0 < -x1 and -x1 < 1 and abs(x2) < abs(x1)^1.5, 1, 0)", 2)
    v = vanishing_functional_demo(ind_e2, [0, 0], E1, E2, plane, DEMO_SCHED,
                                  DEMO_CFG)
    assert abs(v - 1.0) <= 1e-2


def test_vanishing_requires_disjoint_sets():
    E1, _, plane = demo_regions()
    with pytest.raises(RegionsNotDisjoint):
        vanishing_functional_demo(constant_field(2, 1.0), [0, 0], E1, E1,
                                  plane, DEMO_SCHED, DEMO_CFG)
