import math

import numpy as np
import pytest

from shadow_merton.errors import ParameterError
from shadow_merton.initial import initial_state
from shadow_merton.model import Endowment
from shadow_merton.simulation import (
    SimConfig,
    StrategyPath,
    configure_threads,
    mc_expected_utility,
    path_table,
    run_paths,
    simulate_path,
    step_reflected,
)


def test_initial_state_cases(ref_solution, ref_params):
    sol = ref_solution
    lam = ref_params.lambda_
    low = initial_state(Endowment(2.0, 1.0, 1.0), sol)  # 2 > c = 1.48
    assert low.case == "lower" and low.y0 == 1.0
    assert low.trade.side == "buy" and low.trade.price == 1.0
    assert low.s_tilde0 == pytest.approx(1.0, abs=1e-15)

    up = initial_state(Endowment(0.0, 1.0, 1.0), sol)
    assert up.case == "upper" and up.y0 == sol.s_bar
    assert up.trade.side == "sell" and up.trade.price == pytest.approx(1 - lam)
    assert up.s_tilde0 == pytest.approx(1 - lam, abs=1e-15)

    mid = initial_state(Endowment.on_merton_line(ref_params), sol)
    assert mid.case == "interior" and mid.trade.side == "none"
    assert mid.y0 == pytest.approx(sol.c, rel=1e-15)  # c_bar = 1 at theta = 1/2


def test_initial_trade_reaches_boundary_fraction(ref_solution):
    sol = ref_solution
    st = initial_state(Endowment(3.0, 0.5, 2.0), sol)
    units = 0.5 + st.trade.stock_units
    bond = 3.0 + st.trade.bond_change
    # after the trade the fraction of wealth in stock (at the ask) is 1/(1+c)
    assert units * 2.0 / (units * 2.0 + bond) == pytest.approx(1 / (1 + sol.c), rel=1e-12)


def test_step_reflected_examples(ref_solution, ref_params):
    sol = ref_solution
    dt = 0.01
    drift = 0.08 + 0.1 * (1 + 1 / sol.c)
    ystar = 1.0 * (1 + drift * dt + 0.4 * (-0.3))
    y, dl, du = step_reflected(1.0, -0.3, dt, sol)
    assert y == 1.0 and du == 0.0
    assert dl == pytest.approx(math.log(1 / ystar), rel=1e-12)

    y, dl, du = step_reflected(sol.s_bar, 0.4, dt, sol)
    assert y == sol.s_bar and dl == 0.0 and du > 0

    y, dl, du = step_reflected(1.6, 0.0, dt, sol)
    g = float(sol.g(1.6))
    assert y == pytest.approx(1.6 * (1 + (0.08 + 0.1 * (1 + g / sol.c)) * dt), rel=1e-9)
    assert dl == 0.0 and du == 0.0


def test_config_validation():
    with pytest.raises(ParameterError):
        SimConfig(horizon=1.0, dt=0.0, paths=10)
    with pytest.raises(ParameterError):
        SimConfig(horizon=1.0, dt=0.1, paths=0)
    with pytest.raises(ParameterError):
        SimConfig(horizon=-1.0, dt=0.1, paths=10)
    cfg = SimConfig(horizon=1.0, dt=0.1, paths=10)
    assert cfg.steps == 10 and cfg.y0_policy == "from-endowment"


def test_explicit_y0_outside_band(ref_solution, merton_endowment):
    with pytest.raises(ParameterError):
        run_paths(SimConfig(1.0, 0.1, 4, y0=0.5), ref_solution, merton_endowment)


def test_single_path_invariants(ref_solution, ref_params, merton_endowment):
    sol, lam = ref_solution, ref_params.lambda_
    rp, sp = simulate_path(SimConfig(5.0, 0.005, 1, seed=3), sol, merton_endowment)
    assert rp.Y.min() >= 1.0 and rp.Y.max() <= sol.s_bar
    ratio = sp.S_tilde / rp.S
    assert np.all(ratio >= 1 - lam - 1e-12) and np.all(ratio <= 1 + 1e-12)
    assert np.all(np.diff(rp.L) >= 0) and np.all(np.diff(rp.U) >= 0)
    dl, du = np.diff(rp.L), np.diff(rp.U)
    assert np.all(rp.Y[1:][dl > 0] == 1.0)
    assert np.all(rp.Y[1:][du > 0] == sol.s_bar)
    assert rp.L[-1] > 0 and rp.U[-1] > 0
    # log S is exact geometric Brownian motion in W
    t = rp.times
    assert np.allclose(np.log(rp.S), (0.08 - 0.08) * t + 0.4 * rp.W, atol=1e-12)
    assert np.allclose(sp.phi * sp.S_tilde + sp.phi0, sp.V, rtol=1e-12)
    table = path_table(rp, sp)
    assert table.shape == (len(t), len(StrategyPath.CSV_COLUMNS))


def test_single_path_matches_batch(ref_solution, ref_value, merton_endowment):
    cfg = SimConfig(2.0, 0.01, 5, seed=9)
    batch = run_paths(cfg, ref_solution, merton_endowment, ref_value)
    for k in range(cfg.paths):
        rp, sp = simulate_path(cfg, ref_solution, merton_endowment, path=k)
        assert rp.Y[-1] == pytest.approx(batch.y_terminal[k], rel=1e-13)
        assert math.log(sp.V[-1]) == pytest.approx(batch.log_v_terminal[k], rel=1e-12)
        assert sp.Z[-1] == pytest.approx(batch.z_terminal[k], rel=1e-11)


def test_batch_invariants(ref_solution, ref_value, merton_endowment):
    batch = run_paths(SimConfig(5.0, 0.01, 2000, seed=1), ref_solution, merton_endowment, ref_value)
    assert not any(batch.violations.values()), batch.violations
    assert np.all((batch.y_terminal >= 1.0) & (batch.y_terminal <= ref_solution.s_bar))


def test_determinism_across_thread_counts(ref_solution, ref_value, merton_endowment, monkeypatch):
    cfg = SimConfig(1.0, 0.01, 257, seed=42)
    monkeypatch.setenv("SHADOW_MERTON_THREADS", "1")
    assert configure_threads() == 1
    a = run_paths(cfg, ref_solution, merton_endowment, ref_value)
    monkeypatch.setenv("SHADOW_MERTON_THREADS", "4")
    b = run_paths(cfg, ref_solution, merton_endowment, ref_value)
    monkeypatch.delenv("SHADOW_MERTON_THREADS")
    configure_threads()
    assert np.array_equal(a.utility_integral, b.utility_integral)
    assert np.array_equal(a.z_terminal, b.z_terminal)


def test_bad_thread_setting(monkeypatch):
    monkeypatch.setenv("SHADOW_MERTON_THREADS", "many")
    with pytest.raises(ParameterError):
        configure_threads()


def test_antithetic_pairs(ref_solution, merton_endowment):
    cfg = SimConfig(1.0, 0.01, 2, seed=5, antithetic=True)
    a, _ = simulate_path(cfg, ref_solution, merton_endowment, path=0)
    b, _ = simulate_path(cfg, ref_solution, merton_endowment, path=1)
    assert np.allclose(a.dW, -b.dW, atol=0)


def test_utility_estimate_small(ref_solution, ref_value, merton_endowment):
    # short horizon; the tail term carries most of the value
    est = mc_expected_utility(SimConfig(10.0, 0.01, 4000, seed=2), ref_solution, merton_endowment, ref_value)
    target = -31.103595321244069
    assert abs(est.estimate - target) < 4 * est.standard_error + 0.05
    assert abs(est.control_variate_estimate - target) < 0.05
    assert est.control_variate_standard_error < est.standard_error
    assert set(est.to_json()) >= {"utility_estimate", "standard_error", "tail_correction", "invariant_violations"}
