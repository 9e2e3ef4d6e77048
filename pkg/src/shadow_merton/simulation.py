"""Monte Carlo simulation of the reflected state, the shadow price and the optimal policy.

The state ``Y`` follows ``dY = Y (mu + delta (1 + g(Y)/c)) dt + Y sigma dW``
reflected at 1 and ``s_bar``.  It is discretized by an Euler proposal
followed by projection onto ``[1, s_bar]``; the pushes are recorded
multiplicatively (``dL = log(1/Y*)``, ``dU = log(Y*/s_bar)``).  The ask price
``S`` is simulated exactly on the same increments and the shadow price is
``S~ = (S/Y) g(Y)``.

With ``a(y) = sigma g'(y) y/(c + g(y))`` (the volatility of the optimal
shadow wealth, equal to ``pi~ sigma~``), the wealth and the dual density obey

    d log V = (a^2/2 - delta) dt + a dW,    d log Z = -a^2/2 dt - a dW.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from .errors import ParameterError
from .free_boundary import GSolution
from .initial import InitialState, TradeRecord, initial_state
from .model import Endowment
from .rng import normal_pair, path_key

__all__ = [
    "SimConfig",
    "ReflectedPath",
    "StrategyPath",
    "PathBatch",
    "UtilityEstimate",
    "initial_state",
    "InitialState",
    "TradeRecord",
    "step_reflected",
    "simulate_path",
    "run_paths",
    "mc_expected_utility",
    "configure_threads",
]

THREADS_ENV = "SHADOW_MERTON_THREADS"
BAND_TOL = 1e-12


@dataclass(frozen=True)
class SimConfig:
    """Horizon, step, path count and seed of a Monte Carlo run.

    ``y0`` overrides the starting state when given (the explicit ``y0``
    policy); otherwise it follows from the endowment.
    """

    horizon: float
    dt: float
    paths: int
    seed: int = 0
    y0: float | None = None
    antithetic: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ParameterError(f"dt must be > 0, got {self.dt!r}")
        if not self.horizon >= self.dt:
            raise ParameterError(f"horizon {self.horizon!r} must be >= dt {self.dt!r}")
        if int(self.paths) < 1:
            raise ParameterError(f"paths must be >= 1, got {self.paths!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must fit in 64 unsigned bits")

    @property
    def steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))

    @property
    def y0_policy(self) -> str:
        return "from-endowment" if self.y0 is None else "explicit"


def configure_threads() -> int:
    """Apply the thread cap from ``SHADOW_MERTON_THREADS`` (if set)."""
    raw = os.environ.get(THREADS_ENV)
    limit = numba.config.NUMBA_NUM_THREADS
    if raw:
        try:
            n = max(1, min(int(raw), limit))
        except ValueError:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        numba.set_num_threads(n)
    return numba.get_num_threads()


# -- compiled kernels -----------------------------------------------------------


@njit(cache=True, inline="always")
def _hermite(y, h, f, d):
    """Cubic Hermite interpolant on the uniform grid 1, 1 + h, ..."""
    n = f.shape[0]
    u = (y - 1.0) / h
    i = int(u)
    if i < 0:
        i = 0
    elif i > n - 2:
        i = n - 2
    t = u - i
    t2 = t * t
    omt = 1.0 - t
    return (
        (1.0 + 2.0 * t) * omt * omt * f[i]
        + t * omt * omt * h * d[i]
        + t2 * (3.0 - 2.0 * t) * f[i + 1]
        + t2 * (t - 1.0) * h * d[i + 1]
    )


@njit(cache=True, inline="always")
def _reflect(y, dw, dt, g, mu, sigma, delta, c, s_bar):
    """One Euler step of ``Y`` followed by projection; returns (y_next, dL, dU)."""
    return _project(y * (1.0 + (mu + delta * (1.0 + g / c)) * dt + sigma * dw), s_bar)


@njit(cache=True, inline="always")
def _project(ystar, s_bar):
    if ystar < 1.0:
        return 1.0, math.log(1.0 / max(ystar, 1e-300)), 0.0
    if ystar > s_bar:
        return s_bar, 0.0, math.log(ystar / s_bar)
    return ystar, 0.0, 0.0


@njit(cache=True, inline="always")
def _state(y, h, G, GP, GPP, c, sigma):
    g = _hermite(y, h, G, GP)
    gp = _hermite(y, h, GP, GPP)
    a = sigma * gp * y / (c + g)
    return g, a


@njit(cache=True, parallel=True)
def _batch_kernel(G, GP, GPP, WP, WPP, h, mu, sigma, delta, lam, c, s_bar, y0, log_v0, log_s0,
                  steps, dt, paths, seed, antithetic):
    util = np.empty(paths)
    log_v_t = np.empty(paths)
    y_t = np.empty(paths)
    z_t = np.empty(paths)
    sz_t = np.empty(paths)
    phi_sq = np.empty(paths)
    cv = np.empty(paths)
    viol = np.zeros((paths, 4), dtype=np.int64)
    pi_lo = 1.0 / (1.0 + c) - BAND_TOL
    pi_hi = 1.0 / (1.0 + c / ((1.0 - lam) * s_bar)) + BAND_TOL
    sqdt = math.sqrt(dt)
    log_delta = math.log(delta)
    s_drift = (mu - 0.5 * sigma * sigma) * dt
    for p in prange(paths):
        if antithetic:
            key = path_key(seed, p // 2)
            sign = -1.0 if p % 2 == 1 else 1.0
        else:
            key = path_key(seed, p)
            sign = 1.0
        y = y0
        log_v = log_v0
        log_s = log_s0
        log_z = 0.0
        g, a = _state(y, h, G, GP, GPP, c, sigma)
        log_st0 = log_s - math.log(y) + math.log(g)
        log_phi = math.log(g / (c + g)) + log_v - log_st0
        acc = 0.5 * (log_delta + log_v)
        sq = 0.0
        mart = 0.0
        disc = 1.0
        z1 = 0.0
        for k in range(steps):
            if k % 2 == 0:
                z0, z1 = normal_pair(key, k // 2)
                dw = sign * z0 * sqdt
            else:
                dw = sign * z1 * sqdt
            a2 = a * a
            # martingale part of the utility process: e^{-delta t} (a/delta + sigma y w'(y)) dW
            wp = _hermite(y, h, WP, WPP)
            mart += disc * (a / delta + sigma * y * wp) * dw
            log_v += (0.5 * a2 - delta) * dt + a * dw
            log_z += -0.5 * a2 * dt - a * dw
            log_s += s_drift + sigma * dw
            ystar = y * (1.0 + (mu + delta * (1.0 + g / c)) * dt + sigma * dw)
            y, dl, du = _project(ystar, s_bar)
            if y < 1.0 or y > s_bar:
                viol[p, 0] += 1
            if (dl > 0.0 and not ystar < 1.0) or (du > 0.0 and not ystar > s_bar):
                viol[p, 3] += 1
            g, a = _state(y, h, G, GP, GPP, c, sigma)
            ratio = g / y
            if ratio < 1.0 - lam - BAND_TOL or ratio > 1.0 + BAND_TOL:
                viol[p, 1] += 1
            pi = g / (c + g)
            if pi < pi_lo or pi > pi_hi:
                viol[p, 2] += 1
            new_log_phi = math.log(pi) + log_v - (log_s - math.log(y) + math.log(g))
            if dl == 0.0 and du == 0.0:
                d = new_log_phi - log_phi
                sq += d * d
            log_phi = new_log_phi
            disc = math.exp(-delta * (k + 1) * dt)
            wgt = 0.5 if k == steps - 1 else 1.0
            acc += wgt * disc * (log_delta + log_v)
        util[p] = acc * dt
        log_v_t[p] = log_v
        y_t[p] = y
        z_t[p] = math.exp(log_z)
        sz_t[p] = math.exp(log_z + log_s - math.log(y) + math.log(g) - log_st0)
        phi_sq[p] = sq
        cv[p] = mart
    return util, log_v_t, y_t, z_t, sz_t, phi_sq, cv, viol


@njit(cache=True)
def _path_kernel(G, GP, GPP, h, mu, sigma, delta, c, s_bar, y0, log_v0, log_s0,
                 steps, dt, seed, path, sign):
    n = steps + 1
    W = np.zeros(n)
    S = np.empty(n)
    Y = np.empty(n)
    L = np.zeros(n)
    U = np.zeros(n)
    V = np.empty(n)
    Z = np.empty(n)
    key = path_key(seed, path)
    y = y0
    log_v = log_v0
    log_s = log_s0
    log_z = 0.0
    g, a = _state(y, h, G, GP, GPP, c, sigma)
    S[0] = math.exp(log_s)
    Y[0] = y
    V[0] = math.exp(log_v)
    Z[0] = 1.0
    sqdt = math.sqrt(dt)
    z1 = 0.0
    for k in range(steps):
        if k % 2 == 0:
            z0, z1 = normal_pair(key, k // 2)
            dw = sign * z0 * sqdt
        else:
            dw = sign * z1 * sqdt
        a2 = a * a
        log_v += (0.5 * a2 - delta) * dt + a * dw
        log_z += -0.5 * a2 * dt - a * dw
        log_s += (mu - 0.5 * sigma * sigma) * dt + sigma * dw
        y, dl, du = _reflect(y, dw, dt, g, mu, sigma, delta, c, s_bar)
        g, a = _state(y, h, G, GP, GPP, c, sigma)
        W[k + 1] = W[k] + dw
        S[k + 1] = math.exp(log_s)
        Y[k + 1] = y
        L[k + 1] = L[k] + dl
        U[k + 1] = U[k] + du
        V[k + 1] = math.exp(log_v)
        Z[k + 1] = math.exp(log_z)
    return W, S, Y, L, U, V, Z


@njit(cache=True)
def _step_one(y, dw, dt, G, GP, h, mu, sigma, delta, c, s_bar):
    g = _hermite(y, h, G, GP)
    return _reflect(y, dw, dt, g, mu, sigma, delta, c, s_bar)


# -- python layer -------------------------------------------------------------------


def _grid(sol: GSolution):
    h = (sol.s_bar - 1.0) / (len(sol.y) - 1)
    return (
        np.ascontiguousarray(sol.g_nodes, dtype=np.float64),
        np.ascontiguousarray(sol.gp_nodes, dtype=np.float64),
        np.ascontiguousarray(sol.gpp_nodes, dtype=np.float64),
        h,
    )


def _constants(sol: GSolution):
    p = sol.params
    return float(p.mu), float(p.sigma), float(p.delta), p.lambda_, sol.c, sol.s_bar


def step_reflected(y: float, dw: float, dt: float, sol: GSolution) -> tuple[float, float, float]:
    """Advance the state one step; returns ``(y_next, dL, dU)``."""
    G, GP, _, h = _grid(sol)
    mu, sigma, delta, _, c, s_bar = _constants(sol)
    return _step_one(float(y), float(dw), float(dt), G, GP, h, mu, sigma, delta, c, s_bar)


def _start(config: SimConfig, sol: GSolution, endowment: Endowment) -> tuple[float, float, InitialState]:
    st = initial_state(endowment, sol)
    y0 = st.y0 if config.y0 is None else float(config.y0)
    if not 1.0 <= y0 <= sol.s_bar:
        raise ParameterError(f"explicit y0 = {y0!r} lies outside [1, {sol.s_bar!r}]")
    wealth = st.shadow_wealth
    if config.y0 is not None:
        s_tilde0 = endowment.s0 / y0 * float(sol.g(y0))
        wealth = endowment.eta_b + endowment.eta_s * s_tilde0
    return y0, wealth, st


@dataclass(frozen=True)
class ReflectedPath:
    times: np.ndarray
    Y: np.ndarray
    L: np.ndarray
    U: np.ndarray
    dW: np.ndarray
    S: np.ndarray
    W: np.ndarray


@dataclass(frozen=True)
class StrategyPath:
    S_tilde: np.ndarray
    pi_tilde: np.ndarray
    V: np.ndarray
    kappa: np.ndarray
    phi: np.ndarray
    phi0: np.ndarray
    Z: np.ndarray

    CSV_COLUMNS = ("t", "W", "S", "Y", "L", "U", "S_tilde", "pi_tilde", "V", "kappa", "phi", "phi0")


def simulate_path(
    config: SimConfig, sol: GSolution, endowment: Endowment, path: int = 0
) -> tuple[ReflectedPath, StrategyPath]:
    """Full record of one path (same random stream as path ``path`` of a batch run)."""
    G, GP, GPP, h = _grid(sol)
    mu, sigma, delta, _, c, s_bar = _constants(sol)
    y0, wealth, _ = _start(config, sol, endowment)
    if config.antithetic:
        stream, sign = path // 2, (-1.0 if path % 2 else 1.0)
    else:
        stream, sign = path, 1.0
    W, S, Y, L, U, V, Z = _path_kernel(
        G, GP, GPP, h, mu, sigma, delta, c, s_bar, y0, math.log(wealth), math.log(endowment.s0),
        config.steps, config.dt, np.uint64(config.seed), np.uint64(stream), sign,
    )
    times = np.arange(config.steps + 1) * config.dt
    g = sol.g(Y)
    s_tilde = S / Y * g
    pi = g / (c + g)
    rp = ReflectedPath(times, Y, L, U, np.diff(W, prepend=0.0), S, W)
    sp = StrategyPath(s_tilde, pi, V, delta * V, pi * V / s_tilde, (1.0 - pi) * V, Z)
    return rp, sp


def path_table(rp: ReflectedPath, sp: StrategyPath) -> np.ndarray:
    """Columns of the per-path CSV dump, in ``StrategyPath.CSV_COLUMNS`` order."""
    return np.column_stack(
        [rp.times, rp.W, rp.S, rp.Y, rp.L, rp.U, sp.S_tilde, sp.pi_tilde, sp.V, sp.kappa, sp.phi, sp.phi0]
    )


@dataclass(frozen=True)
class PathBatch:
    """Per-path outputs of a batch run (arrays of length ``paths``)."""

    config: SimConfig
    y0: float
    shadow_wealth: float
    utility_integral: np.ndarray
    log_v_terminal: np.ndarray
    y_terminal: np.ndarray
    z_terminal: np.ndarray
    sz_ratio: np.ndarray
    phi_interior_sq: np.ndarray
    martingale_part: np.ndarray
    violations: dict

    @property
    def phi_flatness_rms(self) -> float:
        """Root mean (over paths) of the summed squared interior changes of log phi."""
        return math.sqrt(math.fsum(self.phi_interior_sq) / len(self.phi_interior_sq))


def run_paths(config: SimConfig, sol: GSolution, endowment: Endowment, vf=None) -> PathBatch:
    """Simulate ``config.paths`` paths; ``vf`` (a ``ValueFunction``) is solved if omitted."""
    configure_threads()
    G, GP, GPP, h = _grid(sol)
    mu, sigma, delta, lam, c, s_bar = _constants(sol)
    y0, wealth, _ = _start(config, sol, endowment)
    if vf is None:
        from .value import solve_w

        vf = solve_w(sol)
    WP = np.ascontiguousarray(vf.wp_nodes, dtype=np.float64)
    WPP = np.ascontiguousarray(vf.wpp_nodes, dtype=np.float64)
    util, log_v, y_t, z_t, sz_t, phi_sq, cv, viol = _batch_kernel(
        G, GP, GPP, WP, WPP, h, mu, sigma, delta, lam, c, s_bar, y0, math.log(wealth),
        math.log(endowment.s0), config.steps, config.dt, int(config.paths),
        np.uint64(config.seed), bool(config.antithetic),
    )
    totals = viol.sum(axis=0)
    violations = {
        "y_outside_band": int(totals[0]),
        "shadow_price_outside_spread": int(totals[1]),
        "pi_outside_range": int(totals[2]),
        "local_time_off_boundary": int(totals[3]),
    }
    return PathBatch(config, y0, wealth, util, log_v, y_t, z_t, sz_t, phi_sq, cv, violations)


@dataclass(frozen=True)
class UtilityEstimate:
    estimate: float
    standard_error: float
    tail_correction: float
    integral_part: float
    paths: int
    invariant_violations: dict = field(default_factory=dict)
    phi_flatness_rms: float = float("nan")
    # the same estimate with the discretized martingale part subtracted; its
    # small standard error exposes the time-discretization bias
    control_variate_estimate: float = float("nan")
    control_variate_standard_error: float = float("nan")

    def to_json(self) -> dict:
        return {
            "utility_estimate": self.estimate,
            "standard_error": self.standard_error,
            "tail_correction": self.tail_correction,
            "integral_part": self.integral_part,
            "paths": self.paths,
            "invariant_violations": dict(self.invariant_violations),
            "phi_flatness_rms": self.phi_flatness_rms,
            "control_variate_estimate": self.control_variate_estimate,
            "control_variate_standard_error": self.control_variate_standard_error,
        }


def mc_expected_utility(config: SimConfig, sol: GSolution, endowment: Endowment, vf=None) -> UtilityEstimate:
    """Estimate of the expected discounted log-consumption utility.

    The integral over ``[0, T]`` (trapezoid rule) is completed by the tail
    ``e^{-delta T} (log V_T / delta + w(Y_T))``, which is the conditional
    expectation of the remaining utility under the optimal policy.
    """
    from .value import solve_w

    if vf is None:
        vf = solve_w(sol)
    batch = run_paths(config, sol, endowment, vf)
    delta = float(sol.params.delta)
    T = config.steps * config.dt
    tail = math.exp(-delta * T) * (batch.log_v_terminal / delta + vf.w(batch.y_terminal))
    total = batch.utility_integral + tail
    mean, se = _mean_se(total, config.antithetic)
    cv_mean, cv_se = _mean_se(total - batch.martingale_part, config.antithetic)
    return UtilityEstimate(
        estimate=mean,
        standard_error=se,
        tail_correction=math.fsum(tail) / len(tail),
        integral_part=math.fsum(batch.utility_integral) / len(total),
        paths=int(config.paths),
        invariant_violations=batch.violations,
        phi_flatness_rms=batch.phi_flatness_rms,
        control_variate_estimate=cv_mean,
        control_variate_standard_error=cv_se,
    )


def _mean_se(x: np.ndarray, paired: bool) -> tuple[float, float]:
    """Mean and standard error; antithetic pairs are averaged first."""
    if paired and len(x) >= 4:
        m = len(x) // 2
        x = 0.5 * (x[0 : 2 * m : 2] + x[1 : 2 * m : 2])
    n = len(x)
    mean = math.fsum(x) / n
    if n < 2:
        return mean, float("nan")
    return mean, math.sqrt(math.fsum((x - mean) ** 2) / (n - 1) / n)
