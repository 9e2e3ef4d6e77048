import numpy as np
import pytest

from shadow_merton.errors import BracketingFailed, NoSmoothPastingPoint, ToleranceNotMet
from shadow_merton.free_boundary import (
    _build_solution,
    leading_a0,
    ode_rhs,
    policy_boundaries,
    shadow_coefficients,
    shoot_sbar,
    solve_free_boundary,
)
from shadow_merton.model import ModelParams
from shadow_merton.verify import boundary_invariants

# 30-digit mpmath shooting (tests/oracles/mpmath_oracle.py), reference params, lam = 0.01
ORACLE_C = 1.479804664935951253929
ORACLE_SBAR = 1.88778771835698450782


def test_ode_rhs_at_left_end():
    p = ModelParams(0.08, 0.4, 0.1, 0.01)
    # with g = g' = 1 at y = 1: g'' = 2/(c + 1) - 2 theta, zero at c = c_bar
    assert ode_rhs(1.0, 1.0, 1.0, 1.0, p) == pytest.approx(0.0, abs=1e-15)
    assert ode_rhs(1.0, 1.0, 1.0, 1.5, p) == pytest.approx(2 / 2.5 - 1.0, abs=1e-15)
    vec = ode_rhs(np.array([1.0, 1.2]), np.array([1.0, 1.1]), np.array([1.0, 0.9]), 1.5, p)
    assert vec.shape == (2,)


def test_leading_constant():
    assert leading_a0(0.5) == pytest.approx(3.0)


def test_shooting_rejects_c_at_or_below_frictionless_value():
    p = ModelParams(0.08, 0.4, 0.1, 0.01)
    with pytest.raises(NoSmoothPastingPoint):
        shoot_sbar(1.0, p)
    with pytest.raises(NoSmoothPastingPoint):
        shoot_sbar(0.9, p)


def test_reference_solution_against_mpmath(ref_solution):
    assert ref_solution.c == pytest.approx(ORACLE_C, rel=1e-12)
    assert ref_solution.s_bar == pytest.approx(ORACLE_SBAR, rel=1e-12)


def test_boundary_conditions_and_invariants(ref_solution):
    inv = boundary_invariants(ref_solution)
    assert inv["pass"], inv
    assert ref_solution.residuals["ode"] < 1e-9
    assert ref_solution.g(1.0) == pytest.approx(1.0, abs=1e-14)
    assert ref_solution.gp(ref_solution.s_bar) == pytest.approx(0.99, abs=1e-12)


def test_policy_boundaries_bracket_merton(ref_solution):
    pb = policy_boundaries(ref_solution)
    assert pb.theta_lower < 0.5 < pb.theta_upper
    assert pb.theta_lower == pytest.approx(1 / (1 + ORACLE_C), rel=1e-12)
    assert pb.width > 0


def test_shadow_coefficients(ref_solution):
    sc = shadow_coefficients(ref_solution)
    sigma, c = 0.4, ref_solution.c
    # at y = 1: g = g' = 1
    assert sc.sigma_tilde(1.0) == pytest.approx(sigma, rel=1e-12)
    assert sc.mu_tilde(1.0) == pytest.approx(sigma**2 / (c + 1), rel=1e-12)
    ys = np.linspace(1, ref_solution.s_bar, 50)
    assert np.all(sc.mu_tilde(ys) > 0)
    assert np.all(sc.sigma_tilde(ys) > 0)


@pytest.mark.parametrize("lam", [1e-2, 1e-3, 1e-4, 1e-5])
def test_small_spreads_converge(lam):
    sol = solve_free_boundary(ModelParams(0.08, 0.4, 0.1, lam))
    assert boundary_invariants(sol)["pass"]
    assert sol.diagnostics["asymptotic_regime"]


def test_monotone_in_lambda():
    sols = [solve_free_boundary(ModelParams(0.08, 0.4, 0.1, lam)) for lam in (1e-4, 1e-3, 1e-2)]
    assert sols[0].c < sols[1].c < sols[2].c
    assert sols[0].s_bar < sols[1].s_bar < sols[2].s_bar


def test_large_spread_fails_to_bracket():
    with pytest.raises(BracketingFailed) as info:
        solve_free_boundary(ModelParams(0.08, 0.4, 0.1, 0.9))
    assert len(info.value.scanned) >= 2


def test_perturbed_c_violates_boundary(ref_solution):
    bad = _build_solution(ref_solution.c * 1.01, ref_solution.params, float("inf"), {})
    assert not boundary_invariants(bad)["boundary_residual_ok"]
    with pytest.raises(ToleranceNotMet):
        _build_solution(ref_solution.c * 1.01, ref_solution.params, 1e-9, {})


def test_json_grid(ref_solution):
    out = ref_solution.to_json(grid_stride=512)
    assert out["grid"][0]["y"] == 1.0
    assert out["grid"][-1]["y"] == ref_solution.s_bar
