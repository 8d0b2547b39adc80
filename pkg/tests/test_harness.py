import math

import numpy as np
import pytest

from ehz.bodies import (Ball, Ellipsoid, GeneralEllipsoid, MinkowskiSum, Polytope,
                        PSum, Translate)
from ehz.harness import (AsymmetricBodyError, bm_check, capacity_area_2d,
                         directional_derivative, equality_certificate,
                         isoperimetric_check, mean_width, mean_width_bound_check,
                         p_combination)
from ehz.randbodies import random_body, random_general_ellipsoid
from ehz.solver import SolveConfig, capacity

FAST = SolveConfig(modes=8, starts=4)
MED = SolveConfig(modes=12, starts=4, grad_tol=1e-9)


# -- p-combination ----------------------------------------------------------------

def test_p_combination_reduces_to_minkowski():
    K, T = Ball(1.0, 4), Ellipsoid([1.0, 2.0])
    M = p_combination(K, T, 1.0)
    assert isinstance(M, MinkowskiSum)
    P = p_combination(K, T, 2.0)
    assert isinstance(P, PSum)


# -- superadditivity ----------------------------------------------------------------

def test_bm_homothetic_balls_p1_equality():
    rep = bm_check(Ball(1.0, 4), Ball(2.0, 4), 1.0, FAST)
    # c(B(1) + B(2)) = c(B(3)) = 9 pi: perfect additivity of sqrt-capacity
    assert rep.witnesses["c_combined"] == pytest.approx(9 * math.pi, rel=1e-9)
    assert abs(rep.deficit) <= 1e-9 * rep.rhs
    assert rep.passed


def test_bm_equal_balls_p2():
    rep = bm_check(Ball(1.0, 4), Ball(1.0, 4), 2.0, FAST)
    assert rep.witnesses["c_combined"] == pytest.approx(2 * math.pi, rel=1e-9)
    assert abs(rep.deficit) <= 1e-9 * rep.rhs


def test_bm_report_invariants():
    rep = bm_check(Ellipsoid([1.0, 2.0]), Ball(1.0, 4), 1.0, MED)
    assert rep.passed == (rep.deficit >= -rep.slack)
    assert rep.deficit >= -1e-3 * rep.rhs


def test_bm_swap_symmetry():
    K, T = Ellipsoid([1.0, 2.0]), Ball(1.3, 4)
    r1 = bm_check(K, T, 2.0, MED)
    r2 = bm_check(T, K, 2.0, MED)
    assert r1.deficit == pytest.approx(r2.deficit, abs=1e-8 * max(1.0, r1.rhs))


def test_bm_reproducible():
    K, T = random_body(4, 42), random_body(4, 43)
    r1 = bm_check(K, T, 1.5, MED)
    r2 = bm_check(K, T, 1.5, MED)
    assert r1.lhs == r2.lhs and r1.rhs == r2.rhs and r1.deficit == r2.deficit


# -- equality certificate -------------------------------------------------------------

def test_equality_homothetic_balls():
    rep = equality_certificate(Ball(1.0, 4), Ball(2.0, 4), 1.0, FAST)
    assert rep.witnesses["alpha"] == pytest.approx(2.0, rel=1e-9)
    assert rep.witnesses["homothety_residual"] <= 1e-6
    assert rep.passed


def test_equality_translation_case():
    x0 = np.array([0.1, 0.2, 0.0, -0.1])
    rep = equality_certificate(Ball(1.0, 4), Translate(x0, Ball(1.0, 4)), 1.0,
                               SolveConfig(modes=12, starts=4), tol=1e-3)
    assert rep.witnesses["alpha"] == pytest.approx(1.0, abs=1e-6)
    assert np.allclose(rep.witnesses["beta"], x0, atol=1e-4)
    assert rep.passed


def test_equality_negative_control():
    # same capacity but carriers in different symplectic planes
    rep = equality_certificate(Ellipsoid([1.0, 2.0]),
                               GeneralEllipsoid(np.diag([4.0, 4.0, 1.0, 1.0])),
                               1.0, SolveConfig(modes=12, starts=4))
    assert rep.witnesses["homothety_residual"] > 0.1
    assert not rep.passed
    # the p-sum inequality is strict for this pair
    assert rep.witnesses["bm_deficit"] > 0.1


# -- isoperimetric ----------------------------------------------------------------------

def test_isoperimetric_ball_equality():
    rep = isoperimetric_check(Ball(1.0, 4), Ball(1.0, 4), FAST, slack_rel=1e-6)
    assert rep.lhs == pytest.approx(4 * math.pi**2, rel=1e-9)
    assert abs(rep.deficit) <= 1e-6 * rep.rhs
    assert rep.witnesses["chain_ok"]


def test_isoperimetric_ellipsoid_vs_ball():
    # the E(1,2) carrier is a unit circle, so the bound is again tight
    rep = isoperimetric_check(Ellipsoid([1.0, 2.0]), Ball(1.0, 4), MED)
    assert rep.witnesses["length_JT_polar"] == pytest.approx(2 * math.pi, rel=1e-6)
    assert abs(rep.deficit) <= 1e-6 * rep.rhs
    assert rep.passed


def test_isoperimetric_random_pair():
    rep = isoperimetric_check(random_general_ellipsoid(4, 3), Ellipsoid([0.8, 1.4]), MED)
    assert rep.all_ok()
    assert rep.passed == (rep.deficit >= -rep.slack)


# -- directional derivative ----------------------------------------------------------------

def test_directional_derivative_ball_analytic():
    rep = directional_derivative(Ball(1.0, 4), Ball(1.0, 4), FAST, slack_rel=1e-6)
    for row in rep.witnesses["schedule"]:
        assert row["quotient"] == pytest.approx(math.pi * (2 + row["eps"]), rel=1e-6)
    assert rep.witnesses["monotone"]
    assert rep.passed


def test_directional_derivative_ball_pair_bound():
    rep = directional_derivative(Ball(1.0, 4), Ball(2.0, 4), FAST)
    # quotient pi((1+2eps)^2 - 1)/eps = 4pi + 4pi eps >= bound 4pi
    assert rep.witnesses["lower_bound"] == pytest.approx(4 * math.pi, rel=1e-9)
    for row in rep.witnesses["schedule"]:
        assert row["quotient"] == pytest.approx(4 * math.pi * (1 + row["eps"]), rel=1e-6)
    assert rep.passed


def test_directional_derivative_rejects_bad_schedule():
    from ehz.harness import HarnessError
    with pytest.raises(HarnessError):
        directional_derivative(Ball(1.0, 4), Ball(1.0, 4), FAST, (0.1, 0.5))


# -- mean width ---------------------------------------------------------------------------

def test_mean_width_ball_exact():
    est = mean_width(Ball(1.7, 4), samples=20_000, seed=0)
    assert est.estimate == pytest.approx(1.7, abs=1e-12)
    # roundoff in the variance accumulator leaves a ~1e-8 floor
    assert est.stderr <= 1e-7


def test_mean_width_ellipsoid_analytic_value():
    # M*(E(1,2)) in R^4: the squared support is (1-t) + 4t on the sphere with
    # t ~ uniform[0,1], so M* = int_0^1 sqrt(1+3t) dt = 14/9
    est = mean_width(Ellipsoid([1.0, 2.0]), samples=400_000, seed=1)
    assert est.estimate == pytest.approx(14.0 / 9.0, abs=4 * est.stderr)
    est2 = mean_width(Ellipsoid([1.0, 2.0]), samples=400_000, seed=2)
    assert abs(est.estimate - est2.estimate) <= 3 * (est.stderr + est2.stderr)


def test_mean_width_additive_under_minkowski_sum():
    K, T = Ellipsoid([1.0, 2.0]), Ball(0.8, 4)
    mk = mean_width(K, 150_000, seed=5)
    mt = mean_width(T, 150_000, seed=6)
    mkt = mean_width(MinkowskiSum([K, T]), 150_000, seed=7)
    gap = abs(mkt.estimate - mk.estimate - mt.estimate)
    assert gap <= 3 * (mk.stderr + mt.stderr + mkt.stderr)


def test_mean_width_rejects_asymmetric_body():
    with pytest.raises(AsymmetricBodyError):
        mean_width(Translate(np.array([0.3, 0.0, 0.0, 0.0]), Ball(1.0, 4)))


def test_mean_width_bound_ball_equality():
    rep = mean_width_bound_check(Ball(1.0, 4), FAST, samples=50_000, seed=1)
    assert rep.passed
    assert rep.witnesses["equality_within_margin"]


def test_mean_width_bound_ellipsoid_strict():
    rep = mean_width_bound_check(Ellipsoid([1.0, 2.0]), FAST, samples=50_000, seed=2)
    assert rep.passed
    # M* > 1 while c = pi: the bound is strict
    assert rep.deficit > 0.5


# -- 2D area oracle --------------------------------------------------------------------------

def test_area_oracle_cases():
    assert capacity_area_2d(Ball(2.0, 2)) == pytest.approx(4 * math.pi)
    assert capacity_area_2d(GeneralEllipsoid(np.diag([1.0, 4.0]))) == pytest.approx(2 * math.pi)
    square = Polytope([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    assert capacity_area_2d(square) == pytest.approx(4.0)
    # generic support-quadrature fallback agrees with the exact value
    psum = PSum(2.0, [Ball(1.0, 2), Ball(1.0, 2)])
    assert capacity_area_2d(psum) == pytest.approx(2 * math.pi, rel=1e-8)


def test_area_oracle_matches_solver_on_2d_bodies():
    for body in (GeneralEllipsoid(np.array([[1.0, 0.3], [0.3, 2.0]])),
                 PSum(2.0, [Ball(1.0, 2), GeneralEllipsoid(np.diag([0.5, 1.5]))])):
        r = capacity(body, SolveConfig(modes=12, starts=2))
        assert r.capacity == pytest.approx(capacity_area_2d(body), rel=1e-3)


def test_area_oracle_polygon_matches_extrapolated_solver():
    square = Polytope([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    cfg = SolveConfig(modes=16, starts=2, grad_tol=1e-9, max_iter=2000,
                      polytope_sharpness=128.0, sharpness_extrapolate=True)
    r = capacity(square, cfg)
    assert r.capacity == pytest.approx(capacity_area_2d(square), rel=1.5e-3)
