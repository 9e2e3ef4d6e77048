"""Invariant and consistency checks shared by ``shadow-merton verify`` and the tests."""

from __future__ import annotations

import math

import numpy as np

from .asymptotics import expand_all
from .free_boundary import GSolution, _build_solution, solve_free_boundary
from .model import Endowment, ModelParams, merton_value_frictionless
from .simulation import SimConfig, mc_expected_utility
from .value import mc_dual_check, solve_w, value_at

__all__ = [
    "RATE_LAMBDAS",
    "fitted_exponent",
    "boundary_invariants",
    "series_rate",
    "value_rate",
    "run_checks",
]

RATE_LAMBDAS = (1e-2, 1e-3, 1e-4)
BOUNDARY_TOL = 1e-9
VALUE_TOL = 1e-8


def fitted_exponent(lams, errors) -> float:
    """Least-squares slope of log(error) against log(lambda)."""
    return float(np.polyfit(np.log(lams), np.log(np.abs(errors)), 1)[0])


def boundary_invariants(sol: GSolution, tol: float = BOUNDARY_TOL) -> dict:
    """Residuals and sign properties of a free-boundary solution."""
    lam = sol.params.lambda_
    y, g, gp = sol.y, sol.g_nodes, sol.gp_nodes
    pasting = g - y * gp  # nonnegative, zero only at both ends
    ratio = g / y
    slack = 1e-12
    res = max(sol.residuals[k] for k in ("g_left", "gp_left", "g_right", "gp_right"))
    checks = {
        "boundary_residual": res,
        "boundary_residual_ok": bool(res <= tol),
        "g_prime_positive": bool(np.all(gp > 0)),
        "pasting_sign_ok": bool(np.all(pasting >= -slack)),
        "pasting_strict_interior": bool(np.all(pasting[1:-1] > 0)),
        "ratio_in_spread": bool(np.all((ratio >= 1 - lam - slack) & (ratio <= 1 + slack))),
    }
    checks["pass"] = all(v for k, v in checks.items() if k.endswith(("_ok", "_positive", "_interior", "_spread")))
    return checks


def series_rate(params: ModelParams, lams=RATE_LAMBDAS, order: int = 3) -> dict:
    """Remainder of the truncated c and s_bar series against the numerical solution."""
    err_c, err_s = [], []
    for lam in lams:
        p = params.with_lambda(lam)
        sol = solve_free_boundary(p)
        b = expand_all(order, p, Endowment.on_merton_line(p))
        eps = lam ** (1.0 / 3.0)
        err_c.append(sol.c - b.c_series(eps))
        err_s.append(sol.s_bar - b.sbar_series(eps))
    return {
        "lambdas": list(lams),
        "c_errors": err_c,
        "s_bar_errors": err_s,
        "c_exponent": fitted_exponent(lams, err_c),
        "s_bar_exponent": fitted_exponent(lams, err_s),
    }


def value_rate(params: ModelParams, lams=RATE_LAMBDAS) -> dict:
    """Value on the Merton line minus its series through lambda^(2/3)."""
    errs, worst = [], 0.0
    for lam in lams:
        p = params.with_lambda(lam)
        e = Endowment.on_merton_line(p)
        vf = solve_w(solve_free_boundary(p))
        worst = max(worst, vf.residual_norm)
        series = expand_all(2, p, e).value_series
        errs.append(value_at(vf, e) - series(lam ** (1.0 / 3.0)))
    return {"lambdas": list(lams), "errors": errs, "exponent": fitted_exponent(lams, errs), "max_residual": worst}


def _perturbed(sol: GSolution, fraction: float) -> GSolution:
    c = sol.c * (1.0 + fraction)
    return _build_solution(c, sol.params, math.inf, {"perturbed_c": fraction})


def run_checks(
    params: ModelParams,
    endowment: Endowment,
    cfg: SimConfig,
    mode: str = "full",
    perturb_c: float = 0.0,
) -> dict:
    """Run the check suite; ``mode`` is ``"quick"``, ``"dual"`` or ``"full"``."""
    checks: list[dict] = []

    def record(name, ok, **details):
        checks.append({"name": name, "pass": bool(ok), **details})

    sol = solve_free_boundary(params)
    if perturb_c:
        sol = _perturbed(sol, perturb_c)

    if mode in ("quick", "full"):
        inv = boundary_invariants(sol)
        record("free_boundary_invariants", inv["pass"], **inv)
        rate = series_rate(params)
        ok = all(1.13 <= rate[k] <= 1.53 for k in ("c_exponent", "s_bar_exponent"))
        record("series_vs_numeric_rate", ok, **rate)
        vf = solve_w(sol, tol=math.inf)
        v = value_at(vf, endowment)
        frictionless = merton_value_frictionless(params, endowment)
        record(
            "value_function",
            vf.residual_norm <= VALUE_TOL and v <= frictionless,
            residuals=dict(vf.residuals),
            value=v,
            frictionless_value=frictionless,
        )
        vr = value_rate(params)
        record("value_vs_series_rate", 0.8 <= vr["exponent"] <= 1.2 and vr["max_residual"] <= VALUE_TOL, **vr)

    if mode == "full":
        vf = solve_w(sol, tol=math.inf)
        v = value_at(vf, endowment)
        est = mc_expected_utility(cfg, sol, endowment, vf)
        z = (est.estimate - v) / est.standard_error
        record("mc_utility_vs_value", abs(z) <= 3.0, value=v, z_score=z, **est.to_json())
        record(
            "simulation_invariants",
            not any(est.invariant_violations.values()),
            **est.invariant_violations,
        )

    if mode in ("dual", "full"):
        rep = mc_dual_check(sol, cfg, endowment)
        record("dual_martingales", rep.passed, **rep.to_json())

    return {
        "mode": mode,
        "pass": all(c["pass"] for c in checks),
        "checks": checks,
        "solver": {"c": sol.c, "s_bar": sol.s_bar, "perturbed_c": perturb_c},
    }
