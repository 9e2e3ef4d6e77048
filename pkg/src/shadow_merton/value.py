"""Value function of the problem with transaction costs and dual (martingale) checks.

The value is ``u = log(eta_b + eta_s S~_0)/delta + w(y0)`` where ``w`` solves
a linear second-order ODE on ``[1, s_bar]`` with Neumann conditions at both
ends.  Because the ODE is linear, ``w`` is obtained by superposition of one
particular and one homogeneous initial-value solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import SingularCombination, ToleranceNotMet
from .free_boundary import ATOL, RTOL, GSolution
from .initial import initial_state
from .model import Endowment, ModelParams

__all__ = [
    "ValueFunction",
    "DualReport",
    "w1_limit",
    "solve_w",
    "value_at",
    "dual_density_drift",
    "mc_dual_check",
]


def w1_limit(params: ModelParams) -> float:
    """Limit of ``w(1)`` as the spread vanishes."""
    mu, sigma, delta = float(params.mu), float(params.sigma), float(params.delta)
    return (mu * mu - 2 * delta * sigma * sigma) / (2 * delta * delta * sigma * sigma) + math.log(delta) / delta


@dataclass(frozen=True)
class ValueFunction:
    """``w`` on the grid of the underlying ``GSolution`` with Hermite interpolation."""

    sol: GSolution
    y: np.ndarray
    w_nodes: np.ndarray
    wp_nodes: np.ndarray
    wpp_nodes: np.ndarray
    w1_limit: float
    residual_norm: float
    residuals: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_w", CubicHermiteSpline(self.y, self.w_nodes, self.wp_nodes))
        object.__setattr__(self, "_wp", CubicHermiteSpline(self.y, self.wp_nodes, self.wpp_nodes))

    def w(self, y):
        return self._w(y)

    def wp(self, y):
        return self._wp(y)

    def ode_residual(self, y) -> np.ndarray:
        """Residual of the value ODE for the interpolated ``w`` at points ``y``."""
        wpp = self._wp.derivative()(y)
        return _ode_lhs(self.sol, y, self._w(y), self._wp(y), wpp)

    def to_json(self, grid_stride: int = 16) -> dict:
        idx = np.arange(0, len(self.y), grid_stride)
        if idx[-1] != len(self.y) - 1:
            idx = np.append(idx, len(self.y) - 1)
        return {
            "w1": self.w1_limit,
            "w_grid": [
                {"y": float(self.y[i]), "w": float(self.w_nodes[i]), "wp": float(self.wp_nodes[i])}
                for i in idx
            ],
            "residuals": dict(self.residuals),
        }


def _forcing(sol: GSolution, y, g, gp):
    """``mu~^2/(2 delta sigma~^2) + log(delta) - 1`` in terms of ``g``."""
    p = sol.params
    sigma2, delta = float(p.sigma) ** 2, float(p.delta)
    return sigma2 * gp * gp * y * y / (2 * delta * (sol.c + g) ** 2) + math.log(delta) - 1.0


def _ode_lhs(sol: GSolution, y, w, wp, wpp):
    p = sol.params
    mu, sigma2, delta = float(p.mu), float(p.sigma) ** 2, float(p.delta)
    g, gp = sol.g(y), sol.gp(y)
    return (
        0.5 * sigma2 * y * y * wpp
        + (mu + delta * (1 + g / sol.c)) * y * wp
        - delta * w
        + _forcing(sol, y, g, gp)
    )


def _rhs_factory(sol: GSolution):
    p = sol.params
    mu, sigma2, delta = float(p.mu), float(p.sigma) ** 2, float(p.delta)
    theta, rho, c = p.theta, p.rho, sol.c
    # the constant part (log(delta) - 1)/delta of w is split off
    def rhs(s, z):
        g, gp, wp_, dwp, wh, dwh = z
        gpp = 2.0 * gp * gp / (c + g) - 2.0 * theta * gp / s + 2.0 * rho * (1.0 + g / c) * (
            g / (s * s) - gp / s
        )
        k = 2.0 / (sigma2 * s * s)
        drift = (mu + delta * (1.0 + g / c)) * s
        q = sigma2 * gp * gp * s * s / (2 * delta * (c + g) ** 2)
        return [
            gp,
            gpp,
            dwp,
            k * (delta * wp_ - drift * dwp - q),
            dwh,
            k * (delta * wh - drift * dwh),
        ]

    return rhs


def solve_w(sol: GSolution, tol: float = 1e-8) -> ValueFunction:
    """Neumann solution of the value ODE by superposition shooting."""
    p = sol.params
    mu, sigma2, delta = float(p.mu), float(p.sigma) ** 2, float(p.delta)
    base = mu * mu / (2 * delta * delta * sigma2)
    shift = (math.log(delta) - 1.0) / delta
    y = sol.y
    out = solve_ivp(
        _rhs_factory(sol),
        (1.0, sol.s_bar),
        [1.0, 1.0, base, 0.0, 1.0, 0.0],
        method="DOP853",
        rtol=RTOL,
        atol=ATOL,
        t_eval=y,
    )
    if not out.success:
        raise ToleranceNotMet(f"value ODE integration failed: {out.message}")
    _, _, wp_, dwp, wh, dwh = out.y
    scale = max(abs(dwp[-1]), 1.0)
    if abs(dwh[-1]) <= 1e-12 * scale:
        raise SingularCombination(
            f"homogeneous solution has w'(s_bar) = {dwh[-1]:.3e}; the Neumann problem is singular"
        )
    xi = -dwp[-1] / dwh[-1]
    w = wp_ + xi * wh + shift
    wp = dwp + xi * dwh
    g, gp = sol.g(y), sol.gp(y)
    drift = (mu + delta * (1.0 + g / sol.c)) * y
    wpp = 2.0 / (sigma2 * y * y) * (delta * w - drift * wp - _forcing(sol, y, g, gp))
    residuals = {"neumann_left": abs(float(wp[0])), "neumann_right": abs(float(wp[-1]))}
    vf = ValueFunction(sol, y, w, wp, wpp, w1_limit(p), 0.0, residuals)
    mid = 0.5 * (y[1:] + y[:-1])
    residuals["ode"] = float(np.max(np.abs(vf.ode_residual(mid))))
    norm = max(residuals.values())
    object.__setattr__(vf, "residual_norm", norm)
    if norm > tol:
        raise ToleranceNotMet(f"value ODE residual {norm:.3e} exceeds tol {tol:.1e}", residuals=residuals)
    return vf


def value_at(vf: ValueFunction, endowment: Endowment) -> float:
    """Optimal expected utility for ``endowment`` in the market with costs."""
    st = initial_state(endowment, vf.sol)
    delta = float(vf.sol.params.delta)
    return math.log(st.shadow_wealth) / delta + float(vf.w(st.y0))


def dual_density_drift(sol: GSolution):
    """The Girsanov integrand ``y -> -mu~(y)/sigma~(y)`` of the shadow-price density."""
    sigma, c = float(sol.params.sigma), sol.c

    def drift(y):
        return -sigma * sol.gp(y) * y / (c + sol.g(y))

    return drift


@dataclass(frozen=True)
class DualReport:
    z_terminal_mean: float
    z_terminal_se: float
    sz_ratio_mean: float
    sz_ratio_se: float
    horizon: float
    paths: int
    antithetic: bool = False

    @property
    def z_pass(self) -> bool:
        return abs(self.z_terminal_mean - 1.0) <= 3.0 * self.z_terminal_se

    @property
    def sz_pass(self) -> bool:
        return abs(self.sz_ratio_mean - 1.0) <= 3.0 * self.sz_ratio_se

    @property
    def passed(self) -> bool:
        return self.z_pass and self.sz_pass

    def to_json(self) -> dict:
        return {
            "z_terminal_mean": self.z_terminal_mean,
            "z_terminal_se": self.z_terminal_se,
            "sz_martingale_ratio": self.sz_ratio_mean,
            "sz_martingale_ratio_se": self.sz_ratio_se,
            "sz_martingale_drift": self.sz_ratio_mean - 1.0,
            "horizon": self.horizon,
            "paths": self.paths,
            "antithetic": self.antithetic,
            "pass": self.passed,
        }


def mc_dual_check(sol: GSolution, config, endowment: Endowment | None = None) -> DualReport:
    """Monte Carlo check that ``Z`` and ``S~ Z`` are martingales.

    ``config`` is a ``SimConfig``; with ``config.antithetic`` paths come in
    pairs with opposite Brownian increments and standard errors are computed
    from pair averages.
    """
    from .simulation import _mean_se, run_paths

    if endowment is None:
        endowment = Endowment.on_merton_line(sol.params)
    res = run_paths(config, sol, endowment)
    z = res.z_terminal
    sz = res.sz_ratio
    zm, zse = _mean_se(z, config.antithetic)
    sm, sse = _mean_se(sz, config.antithetic)
    return DualReport(zm, zse, sm, sse, config.horizon, config.paths, config.antithetic)
