"""Initial bulk trade that moves an arbitrary endowment into the no-trade region."""

from __future__ import annotations

from dataclasses import dataclass

from .free_boundary import GSolution
from .model import Endowment

__all__ = ["TradeRecord", "InitialState", "initial_state"]


@dataclass(frozen=True)
class TradeRecord:
    """Units of stock bought (positive) or sold (negative) at time zero.

    ``price`` is the ask ``s0`` for a purchase and the bid ``(1 - lam) s0`` for
    a sale; ``bond_change`` is the resulting change in bond units.
    """

    side: str  # "buy", "sell" or "none"
    stock_units: float
    price: float
    bond_change: float


@dataclass(frozen=True)
class InitialState:
    y0: float
    s_tilde0: float
    shadow_wealth: float
    trade: TradeRecord
    case: str  # "lower", "upper" or "interior"


def initial_state(endowment: Endowment, sol: GSolution) -> InitialState:
    """Starting value ``y0`` of the state process and the initial shadow price.

    ``y0 = 1`` when the bond position is too large (``eta_b > s0 c eta_s``),
    ``y0 = s_bar`` when it is too small (``eta_b < s0 c eta_s / s_bar``) and
    ``y0 = s0 c eta_s / eta_b`` otherwise.
    """
    eb, es, s0 = endowment.eta_b, endowment.eta_s, endowment.s0
    c, s_bar = sol.c, sol.s_bar
    lam = sol.params.lambda_
    if eb > s0 * c * es:
        y0, case = 1.0, "lower"
    elif eb < s0 * c * es / s_bar:
        y0, case = s_bar, "upper"
    else:
        y0, case = s0 * c * es / eb, "interior"
    y0 = min(max(y0, 1.0), s_bar)
    g0 = float(sol.g(y0))
    if case == "upper":
        g0 = (1.0 - lam) * s_bar  # exact boundary value rather than the interpolant
    s_tilde0 = s0 / y0 * g0
    wealth = eb + es * s_tilde0
    pi0 = g0 / (c + g0)
    target_units = pi0 * wealth / s_tilde0
    units = target_units - es
    if case == "lower" and units > 0:
        trade = TradeRecord("buy", units, s0, -units * s0)
    elif case == "upper" and units < 0:
        bid = (1.0 - lam) * s0
        trade = TradeRecord("sell", units, bid, -units * bid)
    else:
        trade = TradeRecord("none", 0.0, s0, 0.0)
    return InitialState(y0, s_tilde0, wealth, trade, case)
