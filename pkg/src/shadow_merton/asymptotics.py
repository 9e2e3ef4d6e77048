"""Fractional expansions in ``eps = lambda^(1/3)`` of the no-trade region and the value.

The pipeline works with the bivariate Taylor series of ``g(s, c)`` around
``(s, c) = (1, c_bar)``:

1. ``taylor_g``: coefficients of ``g`` from the ODE with ``g(1) = g'(1) = 1``;
2. ``expand_H``: the smooth-pasting point ``s = H(c)`` as the root of
   ``(g - s g_s)/(s - 1)``;
3. ``lam = (H - g(H, c)) / H`` has a triple zero at ``c_bar``; writing
   ``lam (a0 + a1 e + ...) = e^3`` with ``e = c - c_bar``, Lagrange inversion of
   ``e = eps * (a0 + a1 e + ...)^(1/3)`` gives ``c`` as a series in ``eps``.

Everything up to the final cube-root rescaling is carried out in the scaled
variable ``t = (a0 lam)^(1/3)``, where all coefficients are rational functions
of ``theta`` and ``delta/sigma^2``.  With ``exact=True`` they are computed as
exact ``Fraction``\\ s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EndowmentOffMertonLine, SeriesError
from .model import Endowment, ModelParams
from .series import (
    BivariateSeries,
    PuiseuxSeries,
    _convolve,
    exact_pow,
    lagrange_coefficients,
    series_pow,
    solve_implicit,
)

__all__ = [
    "ExpansionBundle",
    "taylor_g",
    "divided_series",
    "expand_H",
    "expand_c",
    "expand_sbar",
    "expand_policy",
    "expand_js_convention",
    "expand_value",
    "expand_all",
    "taylor_w",
    "DEFAULT_ORDER",
]

DEFAULT_ORDER = 6
EPS = "lambda^(1/3)"
EPS_JS = "lambda_check^(1/3)"
T_BASE = "(a0*lambda)^(1/3)"
E_BASE = "c-c_bar"
X_BASE = "s-1"


def _constants(params: ModelParams, exact: bool) -> dict:
    if exact:
        return params.exact()
    sigma2 = float(params.sigma) ** 2
    return {
        "mu": float(params.mu),
        "sigma2": sigma2,
        "delta": float(params.delta),
        "lam": float(params.lam),
        "theta": params.theta,
        "rho": params.rho,
    }


def _one(exact: bool):
    return Fraction(1) if exact else 1.0


def _bivariate_const(value, orders, exact) -> BivariateSeries:
    out = BivariateSeries.zeros(orders, exact, (X_BASE, E_BASE))
    out.coeffs[0, 0] = value
    return out


def taylor_g(order_s: int, order_c: int, params: ModelParams, exact: bool = False) -> BivariateSeries:
    """Coefficients ``a[i, j]`` of ``g(s, c) = sum a_ij (s-1)^i (c-c_bar)^j``.

    Row ``i + 2`` follows from the ``(s-1)^i`` coefficient of the ODE, which only
    involves rows ``<= i + 1``.
    """
    if order_s < 2 or order_c < 0:
        raise ValueError("taylor_g needs order_s >= 2")
    k = _constants(params, exact)
    theta, rho = k["theta"], k["rho"]
    one = _one(exact)
    c_bar = (one - theta) / theta
    I, J = order_s, order_c
    bases = (X_BASE, E_BASE)

    G = BivariateSeries.zeros((I, J), exact, bases)
    G.coeffs[0, 0] = one
    G.coeffs[1, 0] = one
    c_ser = _bivariate_const(c_bar, (I, J), exact)
    if J >= 1:
        c_ser.coeffs[0, 1] = one
    s_ser = _bivariate_const(one, (I, J), exact)
    s_ser.coeffs[1, 0] = one
    inv_c = c_ser.inverse()
    inv_s = s_ser.inverse()
    inv_s2 = inv_s * inv_s

    for i in range(I - 1):
        n = (i + 1, J)
        g = G.truncate(n)
        gp = g.dx()
        rhs = (
            2 * gp * gp * (c_ser.truncate(n) + g).inverse()
            - 2 * theta * gp * inv_s.truncate(n)
            + 2 * rho * (one + g * inv_c.truncate(n)) * (g * inv_s2.truncate(n) - gp * inv_s.truncate(n))
        )
        G.coeffs[i + 2] = rhs.coeffs[i] / ((i + 2) * (i + 1))
    return G


def divided_series(G: BivariateSeries) -> BivariateSeries:
    """Coefficients ``b[i, j]`` of ``(g - s g_s)/(s - 1)``."""
    a = G.coeffs
    I = a.shape[0] - 1
    rows = []
    for i in range(I - 1):
        rows.append(-i * a[i + 1] - (i + 2) * a[i + 2])
    return BivariateSeries(np.array(rows, dtype=a.dtype), G.bases)


def _drop_rounding(s: PuiseuxSeries, k: int) -> PuiseuxSeries:
    """Zero the first ``k`` coefficients when they are pure float rounding."""
    if s.exact:
        return s
    scale = max(1.0, max(abs(v) for v in s.floats()))
    head = s.floats()[:k]
    if any(abs(v) > 1e-11 * scale for v in head):
        raise SeriesError(f"expected a zero of order {k}, got leading coefficients {head}")
    arr = np.array(s.coeffs, dtype=np.float64)
    arr[:k] = 0.0
    return PuiseuxSeries(arr, s.base)


def expand_H(order: int, params: ModelParams, exact: bool = False, G: BivariateSeries | None = None) -> PuiseuxSeries:
    """``H(c)`` with ``(g - s g_s)/(s - 1) = 0`` at ``s = H(c)``; a series in ``c - c_bar``."""
    if G is None:
        G = taylor_g(order + 3, order + 2, params, exact)
    D = divided_series(G)
    if not exact:
        D.coeffs[0, 0] = 0.0  # structurally zero, nonzero only by rounding of c_bar
    h = solve_implicit(D.transpose(), order)
    return 1 + h


@dataclass
class _Core:
    """Intermediate series shared by the expansions (all in the scaled variable t)."""

    exact: bool
    consts: dict
    G: BivariateSeries
    h: PuiseuxSeries  # H(c) - 1 in e = c - c_bar
    a0: object
    e_t: PuiseuxSeries  # c - c_bar in t
    order: int

    @property
    def cube_root_a0(self) -> float:
        return exact_pow(self.a0, Fraction(1, 3)) if self.exact else self.a0 ** (1.0 / 3.0)


def _core(order: int, params: ModelParams, exact: bool) -> _Core:
    consts = _constants(params, exact)
    # lam = e^3 / a(e) needs P = H - g(H, c) through e^(order+2)
    G = taylor_g(order + 4, order + 3, params, exact)
    h = expand_H(order + 2, params, exact, G) - 1
    # P = H - g(H, c); rows 0 and 1 of g cancel against H exactly
    G_tail = BivariateSeries(G.coeffs.copy(), G.bases)
    G_tail.coeffs[0] = 0
    G_tail.coeffs[1] = 0
    P = -G_tail.substitute_x(h)
    R = P / (1 + h)  # = lam as a function of e
    R = _drop_rounding(R, 3).divide_monomial(3)
    a_series = R.inverse()  # lam * a(e) = e^3
    a0 = a_series.coeffs[0]
    phi_reduced = series_pow(a_series / a0, Fraction(1, 3) if exact else 1.0 / 3.0)
    e_t = lagrange_coefficients(phi_reduced.with_base(T_BASE), order)
    return _Core(exact, consts, G, h, a0, e_t, order)


def _to_eps(s: PuiseuxSeries, core: _Core, base: str = EPS) -> PuiseuxSeries:
    return s.rescale(core.cube_root_a0).with_base(base)


def _c_t(core: _Core) -> PuiseuxSeries:
    return core.e_t + (1 - core.consts["theta"]) / core.consts["theta"]


def _sbar_t(core: _Core) -> PuiseuxSeries:
    return (1 + core.h.truncate(core.order)).compose(core.e_t)


def expand_c(order: int, params: ModelParams, exact: bool = False) -> PuiseuxSeries:
    """Series of ``c`` in ``lambda^(1/3)``."""
    core = _core(order, params, exact)
    return _to_eps(_c_t(core), core)


def expand_sbar(order: int, params: ModelParams, exact: bool = False) -> PuiseuxSeries:
    core = _core(order, params, exact)
    return _to_eps(_sbar_t(core), core)


def _policy_t(core: _Core) -> tuple[PuiseuxSeries, PuiseuxSeries]:
    c = _c_t(core)
    sbar = _sbar_t(core)
    lower = 1 / (1 + c)
    upper = sbar / (sbar + c)
    return lower, upper


def expand_policy(order: int, params: ModelParams, exact: bool = False):
    """``(theta_lower, theta_upper, gap)`` as series in ``lambda^(1/3)``."""
    core = _core(order, params, exact)
    lower, upper = _policy_t(core)
    return _to_eps(lower, core), _to_eps(upper, core), _to_eps(upper - lower, core)


def expand_js_convention(order: int, params: ModelParams, exact: bool = False):
    """No-trade bounds for the symmetric-spread convention, in ``lambda_check^(1/3)``.

    With ``lam = 2 lc/(1 + lc)`` the mid price is ``S/(1 + lc)``, so the stock
    fraction at the lower bound is ``1/(1 + c (1 + lc))`` and at the upper bound
    ``1/(1 + c (1 + lc)/s_bar)``.
    """
    core = _core(order, params, exact)
    one = _one(exact)
    two_a0 = 2 * core.a0
    # tau = (2 a0)^(1/3) lc^(1/3);  t = (a0 lam)^(1/3) = tau (1 + tau^3/(2 a0))^(-1/3)
    tau = PuiseuxSeries.variable(order, T_BASE, exact=exact)
    lc = tau * tau * tau / two_a0
    t_of_tau = tau * series_pow(
        1 + lc, Fraction(-1, 3) if exact else -1.0 / 3.0
    )
    c = _c_t(core).compose(t_of_tau)
    sbar = _sbar_t(core).compose(t_of_tau)
    mid_factor = 1 + lc
    lower = one / (1 + c * mid_factor)
    upper = one / (1 + c * mid_factor / sbar)
    scale = exact_pow(two_a0, Fraction(1, 3)) if exact else two_a0 ** (1.0 / 3.0)
    return (
        lower.rescale(scale).with_base(EPS_JS),
        upper.rescale(scale).with_base(EPS_JS),
    )


def taylor_w(
    order_s: int,
    order_c: int,
    params: ModelParams,
    exact: bool = False,
    G: BivariateSeries | None = None,
) -> tuple[BivariateSeries, BivariateSeries]:
    """Particular and homogeneous Taylor solutions of the value ODE in ``(s-1, c-c_bar)``.

    The ODE is used in the form ``w'' = B w' + C w + Q`` with the constant
    ``(log(delta) - 1)/delta`` split off, so all coefficients stay rational.
    Returns ``(w_p, w_h)`` with ``w_p(1) = mu^2/(2 delta^2 sigma^2)``,
    ``w_h(1) = 1`` and ``w_p'(1) = w_h'(1) = 0``.
    """
    k = _constants(params, exact)
    mu, sigma2, delta, theta = k["mu"], k["sigma2"], k["delta"], k["theta"]
    one = _one(exact)
    I, J = order_s, order_c
    if G is None:
        G = taylor_g(I + 1, J, params, exact)
    G = G.truncate((I, J))
    Gp = G.dx()
    n = (I - 1, J)
    c_ser = _bivariate_const((one - theta) / theta, (I, J), exact)
    if J >= 1:
        c_ser.coeffs[0, 1] = one
    s_ser = _bivariate_const(one, (I, J), exact)
    s_ser.coeffs[1, 0] = one
    inv_s = s_ser.inverse()
    K1 = (2 / sigma2) * inv_s * inv_s
    B = -(mu + delta + delta * G * c_ser.inverse()) * s_ser * K1
    C = delta * K1
    cg = (c_ser + G).truncate(n)
    Q = -(Gp * Gp) * (cg * cg).inverse() / delta
    B, C = B.truncate(n), C.truncate(n)

    def solve(w0, forcing: bool) -> BivariateSeries:
        W = BivariateSeries.zeros((I, J), exact, G.bases)
        W.coeffs[0, 0] = w0
        for i in range(I - 1):
            acc = Q.coeffs[i].copy() if forcing else Q.coeffs[i] * 0
            for kk in range(i + 1):
                acc = acc + _convolve(B.coeffs[i - kk], (kk + 1) * W.coeffs[kk + 1], J + 1)
                acc = acc + _convolve(C.coeffs[i - kk], W.coeffs[kk], J + 1)
            W.coeffs[i + 2] = acc / ((i + 2) * (i + 1))
        return W

    w_limit = mu * mu / (2 * delta * delta * sigma2)
    return solve(w_limit, True), solve(one, False)


def expand_value(
    order: int,
    params: ModelParams,
    endowment: Endowment | None = None,
    exact: bool = False,
) -> PuiseuxSeries:
    """Value of the problem with costs for an endowment on the Merton line.

    ``u = log(eta_B + eta_S S~_0)/delta + w(y)`` with ``y = c/c_bar``; ``w``
    solves the value ODE with Neumann conditions at 1 and ``H(c)``, obtained
    by solving ``w'(H(c), c, xi) = 0`` for the shift ``xi(c)``.
    """
    if endowment is None:
        endowment = Endowment.on_merton_line(params)
    if abs(endowment.stock_fraction - params.theta) > 1e-12:
        raise EndowmentOffMertonLine(
            f"initial stock fraction {endowment.stock_fraction:.17g} differs from theta "
            f"{params.theta:.17g}"
        )
    core = _core(order, params, exact)
    k = core.consts
    theta, delta = k["theta"], k["delta"]
    one = _one(exact)
    I, J = order + 3, order + 2
    w_p, w_h = taylor_w(I, J, params, exact, core.G)
    # w'(x)/x as bivariate series: row k is (k + 2) w_{k+2}
    def d_over_x(W: BivariateSeries) -> BivariateSeries:
        rows = [(kk + 2) * W.coeffs[kk + 2] for kk in range(W.coeffs.shape[0] - 2)]
        return BivariateSeries(np.array(rows, dtype=W.coeffs.dtype), W.bases)

    h = core.h.truncate(order + 1)
    xi = -d_over_x(w_p).substitute_x(h) / d_over_x(w_h).substitute_x(h)
    # Merton-line start: y = c pi0/(1 - pi0) = c/c_bar
    e = PuiseuxSeries.variable(order + 1, E_BASE, exact=exact)
    c_bar = (one - theta) / theta
    y_minus_1 = e * (one / c_bar)
    w_y = w_p.substitute_x(y_minus_1) + xi * w_h.substitute_x(y_minus_1)
    g_over_y = core.G.substitute_x(y_minus_1) / (1 + y_minus_1)
    log_term = (theta * (g_over_y - 1)).log1p() * (one / delta)
    u_e = (w_y + log_term).truncate(order)
    u_t = u_e.compose(core.e_t)
    d = float(delta)
    const = math.log(endowment.wealth_at_ask) / d + (math.log(d) - 1.0) / d
    u_eps = _to_eps(u_t, core).to_float()
    return u_eps + const


@dataclass
class ExpansionBundle:
    params: ModelParams
    order: int
    c_series: PuiseuxSeries
    sbar_series: PuiseuxSeries
    theta_lower_series: PuiseuxSeries
    theta_upper_series: PuiseuxSeries
    gap_series: PuiseuxSeries
    value_series: PuiseuxSeries | None = None
    js_lower_series: PuiseuxSeries | None = None
    js_upper_series: PuiseuxSeries | None = None
    endowment: Endowment | None = None
    scaled: dict = field(default_factory=dict)

    def series_items(self) -> list[tuple[str, PuiseuxSeries]]:
        items = [
            ("c", self.c_series),
            ("s_bar", self.sbar_series),
            ("theta_lower", self.theta_lower_series),
            ("theta_upper", self.theta_upper_series),
            ("gap", self.gap_series),
        ]
        if self.value_series is not None:
            items.append(("value", self.value_series))
        if self.js_lower_series is not None:
            items.append(("js_theta_lower", self.js_lower_series))
            items.append(("js_theta_upper", self.js_upper_series))
        return items

    def to_json(self) -> dict:
        out = {
            "params": self.params.to_dict(),
            "order": self.order,
            "series": {name: s.to_json() for name, s in self.series_items()},
        }
        if self.endowment is not None:
            out["endowment"] = self.endowment.to_dict()
        return out

    def table(self) -> str:
        """Plain-text table of coefficients of lambda^(k/3)."""
        width = self.order + 1
        head = ["quantity"] + [_power_label(k) for k in range(width)]
        rows = [head]
        for name, s in self.series_items():
            rows.append([name] + [f"{v:.10g}" for v in s.floats()[:width]])
        colw = [max(len(r[i]) for r in rows) for i in range(len(head))]
        return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, colw)) for r in rows)


def _power_label(k: int) -> str:
    if k == 0:
        return "1"
    f = Fraction(k, 3)
    if f.denominator == 1:
        return "lam" if f == 1 else f"lam^{f.numerator}"
    return f"lam^({f.numerator}/{f.denominator})"


def expand_all(
    order: int,
    params: ModelParams,
    endowment: Endowment | None = None,
    *,
    convention: str = "paper",
    exact: bool = False,
) -> ExpansionBundle:
    core = _core(order, params, exact)
    c_t, sbar_t = _c_t(core), _sbar_t(core)
    lower_t, upper_t = _policy_t(core)
    gap_t = upper_t - lower_t
    if endowment is None:
        endowment = Endowment.on_merton_line(params)
    value = None
    if abs(endowment.stock_fraction - params.theta) <= 1e-12:
        value = expand_value(order, params, endowment, exact)
    bundle = ExpansionBundle(
        params=params,
        order=order,
        c_series=_to_eps(c_t, core),
        sbar_series=_to_eps(sbar_t, core),
        theta_lower_series=_to_eps(lower_t, core),
        theta_upper_series=_to_eps(upper_t, core),
        gap_series=_to_eps(gap_t, core),
        value_series=value,
        endowment=endowment,
        scaled={"a0": core.a0, "c": c_t, "s_bar": sbar_t, "theta_lower": lower_t,
                "theta_upper": upper_t, "gap": gap_t},
    )
    if convention == "js":
        bundle.js_lower_series, bundle.js_upper_series = expand_js_convention(order, params, exact)
    elif convention != "paper":
        raise ValueError(f"unknown convention {convention!r}")
    return bundle
