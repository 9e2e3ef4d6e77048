"""Market/preference parameters, endowments and frictionless reference values.

The market is Black-Scholes with ask price ``S`` and bid price ``(1 - lam) S``;
the investor maximizes discounted log-utility from consumption with impatience
rate ``delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Mapping

from .errors import (
    EndowmentError,
    LambdaOutOfRange,
    NonpositiveParameter,
    ThetaOutOfRange,
)

__all__ = [
    "ModelParams",
    "Endowment",
    "PolicyBoundaries",
    "validate_params",
    "validate_endowment",
    "lambda_convention_convert",
    "merton_value_frictionless",
    "as_rational",
]


def as_rational(x: Real) -> Fraction:
    """Exact rational for ``x``; floats are read through their shortest decimal repr.

    ``0.4`` therefore becomes ``2/5`` rather than the binary neighbour of 0.4,
    which is what a user typing ``--sigma 0.4`` means.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class ModelParams:
    """Validated market and preference constants.

    ``theta`` (the Merton fraction mu/sigma^2) and ``rho`` (delta/sigma^2) are
    computed once at construction.  Inputs may be floats or Fractions; the
    regime checks are done in exact rational arithmetic.
    """

    mu: Real
    sigma: Real
    delta: Real
    lam: Real
    theta: float = field(init=False, repr=False)
    rho: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for name in ("mu", "sigma", "delta"):
            v = getattr(self, name)
            if not math.isfinite(float(v)) or v <= 0:
                raise NonpositiveParameter(f"{name} must be > 0, got {v!r}")
        if not math.isfinite(float(self.lam)) or not 0 < self.lam < 1:
            raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {self.lam!r}")
        theta_exact = as_rational(self.mu) / as_rational(self.sigma) ** 2
        if not 0 < theta_exact < 1:
            raise ThetaOutOfRange(
                f"theta = mu/sigma^2 = {float(theta_exact):.17g} is outside (0, 1); "
                "only the regime 0 < theta < 1 is supported"
            )
        object.__setattr__(self, "theta", float(theta_exact))
        object.__setattr__(
            self, "rho", float(as_rational(self.delta) / as_rational(self.sigma) ** 2)
        )

    @property
    def lambda_(self) -> float:
        return float(self.lam)

    @property
    def c_bar(self) -> float:
        """Frictionless limit (1 - theta)/theta of the bond/stock ratio parameter."""
        return (1.0 - self.theta) / self.theta

    def exact(self) -> dict[str, Fraction]:
        """Parameters as exact rationals (used by the exact series mode)."""
        mu, sigma, delta, lam = (as_rational(v) for v in (self.mu, self.sigma, self.delta, self.lam))
        return {
            "mu": mu,
            "sigma2": sigma * sigma,
            "delta": delta,
            "lam": lam,
            "theta": mu / (sigma * sigma),
            "rho": delta / (sigma * sigma),
        }

    def with_lambda(self, lam: Real) -> "ModelParams":
        return ModelParams(self.mu, self.sigma, self.delta, lam)

    def to_dict(self) -> dict[str, float]:
        return {
            "mu": float(self.mu),
            "sigma": float(self.sigma),
            "delta": float(self.delta),
            "lambda": float(self.lam),
        }

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Real]) -> "ModelParams":
        lam = raw["lambda"] if "lambda" in raw else raw["lam"]
        return validate_params(raw["mu"], raw["sigma"], raw["delta"], lam)


def validate_params(mu: Real, sigma: Real, delta: Real, lam: Real) -> ModelParams:
    """Validate the four model constants; raises a ``ParameterError`` subclass."""
    return ModelParams(mu, sigma, delta, lam)


@dataclass(frozen=True)
class Endowment:
    """Initial bond units ``eta_b``, stock units ``eta_s`` and initial ask price ``s0``."""

    eta_b: float
    eta_s: float
    s0: float = 1.0

    def __post_init__(self) -> None:
        if self.eta_b < 0 or self.eta_s < 0:
            raise EndowmentError("endowment must be nonnegative")
        if self.eta_b == 0 and self.eta_s == 0:
            raise EndowmentError("endowment must not be zero in both assets")
        if not self.s0 > 0:
            raise EndowmentError(f"s0 must be > 0, got {self.s0!r}")

    @property
    def wealth_at_ask(self) -> float:
        return self.eta_b + self.eta_s * self.s0

    @property
    def stock_fraction(self) -> float:
        """Initial fraction of wealth in stock, valued at the ask price."""
        return self.eta_s * self.s0 / self.wealth_at_ask

    @classmethod
    def on_merton_line(cls, params: ModelParams, wealth: float = 1.0, s0: float = 1.0) -> "Endowment":
        """Endowment of total ask-value ``wealth`` with stock fraction equal to theta."""
        return cls(eta_b=(1.0 - params.theta) * wealth, eta_s=params.theta * wealth / s0, s0=s0)

    def to_dict(self) -> dict[str, float]:
        return {"eta_b": self.eta_b, "eta_s": self.eta_s, "s0": self.s0}


def validate_endowment(eta_b: float, eta_s: float, s0: float) -> Endowment:
    return Endowment(float(eta_b), float(eta_s), float(s0))


@dataclass(frozen=True)
class PolicyBoundaries:
    """No-trade region [theta_lower, theta_upper] in terms of the ask price."""

    theta_lower: float
    theta_upper: float

    @property
    def width(self) -> float:
        return self.theta_upper - self.theta_lower


def lambda_convention_convert(value: float, direction: str) -> float:
    """Convert between the ask/bid spread ``lam`` and the symmetric spread ``lam_check``.

    ``"to-symmetric"`` maps lam to lam/(2 - lam); ``"from-symmetric"`` maps
    lam_check to 2 lam_check/(1 + lam_check).
    """
    if not 0 < value < 1:
        raise LambdaOutOfRange(f"spread must lie in (0, 1), got {value!r}")
    if direction == "to-symmetric":
        return value / (2 - value)
    if direction == "from-symmetric":
        return 2 * value / (1 + value)
    raise ValueError(f"unknown direction {direction!r}")


def merton_value_frictionless(params: ModelParams, endowment: Endowment) -> float:
    """Frictionless optimal utility; an upper bound for the value with costs."""
    mu, sigma, delta = float(params.mu), float(params.sigma), float(params.delta)
    return (
        math.log(delta * endowment.wealth_at_ask) / delta
        + (mu * mu / (2 * sigma * sigma) - delta) / delta**2
    )
