import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pricing_lab.frontier import (baseline, boundary_limits, dual_objective, frontier_sweep,
                                  golden_section, r_star, symmetric_point)

# reference values from 40-digit mpmath evaluation
G_REF = {
    (1.0, 1.0): 0.61370563888010938,
    (10.0, 1.0): 0.5158802215242654,
    (4.0, 1.0): 0.53712897371580488,
    (0.5, 0.5): 1.0880203917494589,
    (0.25, 0.3): 1.0991151957093031,
    (1.0, 0.3): 1.5841116916640328,
}
R_REF = {
    0.25: 0.99824230037222322,
    0.3: 0.99574969274518264,
    0.5: 0.96755254555906486,
    0.75: 0.87104273643339646,
    0.9: 0.7490169041251105,
}
SYMMETRIC_REF = 0.82222196580646796


@pytest.mark.parametrize("beta,C", list(G_REF))
def test_dual_objective_reference(beta, C):
    assert dual_objective(beta, C) == pytest.approx(G_REF[(beta, C)], abs=1e-12)


def test_dual_objective_closed_forms():
    assert dual_objective(1.0, 1.0) == pytest.approx(2 - 2 * math.log(2), abs=1e-15)
    assert dual_objective(1.0, 0.0) == 2.0


@pytest.mark.parametrize("beta", [0.0, -1.0])
def test_dual_objective_rejects_nonpositive_beta(beta):
    with pytest.raises(ValueError):
        dual_objective(beta, 0.5)


def test_r_star_endpoints():
    assert r_star(0.0).R == pytest.approx(1.0, abs=1e-9)
    assert r_star(1.0).R == pytest.approx(0.5, abs=1e-3)
    assert r_star(1.0).beta_argmin == math.inf


@pytest.mark.parametrize("C", list(R_REF))
def test_r_star_reference(C):
    assert r_star(C).R == pytest.approx(R_REF[C], abs=1e-9)


def test_r_star_argmin_is_interior_and_consistent():
    pt = r_star(0.5)
    assert 0 < pt.beta_argmin < math.inf
    assert dual_objective(pt.beta_argmin, 0.5) == pytest.approx(pt.R, abs=1e-14)


@pytest.mark.parametrize("C", [-0.1, 1.1])
def test_r_star_rejects_bad_c(C):
    with pytest.raises(ValueError):
        r_star(C)


def test_symmetric_point():
    pt = symmetric_point()
    assert abs(pt.C - pt.R) <= 1e-7
    assert 0.81 <= pt.C <= 0.83
    assert pt.C == pytest.approx(SYMMETRIC_REF, abs=1e-7)


def test_symmetric_bracket():
    assert 0.0 - r_star(0.0).R == pytest.approx(-1.0)
    assert 1.0 - r_star(1.0).R == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("C,R", [(0.0, 1.0), (1.0, 0.0), (0.5, 0.5)])
def test_baseline(C, R):
    pt = baseline(C)
    assert (pt.C, pt.R) == (C, R)


def test_sweep_three_points():
    pts = frontier_sweep(0.0, 1.0, 3)
    assert [p.C for p in pts] == [0.0, 0.5, 1.0]
    assert pts[0].R == pytest.approx(1.0)
    assert pts[1].R == pytest.approx(R_REF[0.5], abs=1e-9) and pts[1].R > 0.5
    assert pts[2].R == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1), (0.5, 0.2, 5), (-0.1, 1.0, 5)])
def test_sweep_rejects(args):
    with pytest.raises(ValueError):
        frontier_sweep(*args)


def test_sweep_monotone_concave_dominant():
    pts = frontier_sweep(0.0, 1.0, 101)
    R = np.array([p.R for p in pts])
    C = np.array([p.C for p in pts])
    assert np.all(np.diff(R) <= 1e-12)
    assert np.all(R[1:-1] >= 0.5 * (R[:-2] + R[2:]) - 1e-9)
    assert np.all(R >= 1 - C)
    assert np.all(R <= 1 + 1e-12)


@pytest.mark.parametrize("C", [0.25, 0.5, 0.75, 1.0])
def test_strict_dominance_margin(C):
    assert r_star(C).R - (1 - C) >= 0.01


@given(st.floats(1e-4, 1e4), st.floats(0.0, 1.0))
def test_r_star_is_a_lower_bound(beta, C):
    assert r_star(C).R <= dual_objective(beta, C) + 1e-12


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_r_star_nonincreasing(c1, c2):
    lo, hi = sorted((c1, c2))
    assert r_star(hi).R <= r_star(lo).R + 1e-12


def test_large_beta_limit_at_c_one():
    assert abs(dual_objective(1e6, 1.0) - 0.5) <= 1e-5


@pytest.mark.parametrize("C", [0.0, 0.5])
def test_large_beta_diverges_below_c_one(C):
    # 1 + (1 - C) beta - C/2 + O(1/beta): the limit is finite only at C = 1
    val = dual_objective(1e6, C)
    assert val == pytest.approx(1 + (1 - C) * 1e6 - C / 2, rel=1e-9)
    assert boundary_limits(C) == (1.0, math.inf)


def test_boundary_limits_at_one():
    assert boundary_limits(1.0) == (1.0, 0.5)


def test_small_beta_limit_is_one():
    for C in (0.0, 0.3, 1.0):
        assert dual_objective(1e-9, C) == pytest.approx(1.0, abs=1e-7)


def test_golden_section_quadratic():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2 + 1.0, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6) and fx == pytest.approx(1.0, abs=1e-12)


@pytest.mark.xfail(strict=True, reason="g(beta, C) -> 1 - C/2 as beta -> inf holds only at C = 1; "
                                       "for C < 1 the objective grows like (1 - C) beta")
@pytest.mark.parametrize("C", [0.0, 0.5])
def test_claimed_large_beta_limit_below_c_one(C):
    assert abs(dual_objective(1e6, C) - (1 - C / 2)) <= 1e-5
