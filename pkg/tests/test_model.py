import math
from fractions import Fraction

import pytest

from shadow_merton.errors import (
    EndowmentError,
    LambdaOutOfRange,
    NonpositiveParameter,
    ParameterError,
    ThetaOutOfRange,
)
from shadow_merton.model import (
    Endowment,
    ModelParams,
    as_rational,
    lambda_convention_convert,
    merton_value_frictionless,
    validate_params,
)


def test_reference_parameters():
    p = validate_params(0.08, 0.4, 0.1, 0.01)
    assert p.theta == pytest.approx(0.5, abs=1e-15)
    assert p.rho == pytest.approx(0.625, abs=1e-15)
    assert p.c_bar == pytest.approx(1.0, abs=1e-15)


def test_theta_boundary_is_rejected_exactly():
    # 0.16 / 0.4**2 rounds to 1 - 2**-53 in floats; the check is rational
    with pytest.raises(ThetaOutOfRange):
        ModelParams(0.16, 0.4, 0.1, 0.01)
    with pytest.raises(ThetaOutOfRange):
        ModelParams(0.2, 0.4, 0.1, 0.01)


@pytest.mark.parametrize(
    "kwargs, err",
    [
        (dict(mu=-0.01, sigma=0.4, delta=0.1, lam=0.01), NonpositiveParameter),
        (dict(mu=0.08, sigma=0.0, delta=0.1, lam=0.01), NonpositiveParameter),
        (dict(mu=0.08, sigma=0.4, delta=0.0, lam=0.01), NonpositiveParameter),
        (dict(mu=0.08, sigma=0.4, delta=0.1, lam=0.0), LambdaOutOfRange),
        (dict(mu=0.08, sigma=0.4, delta=0.1, lam=1.0), LambdaOutOfRange),
        (dict(mu=0.08, sigma=0.4, delta=0.1, lam=float("nan")), LambdaOutOfRange),
    ],
)
def test_invalid_parameters(kwargs, err):
    with pytest.raises(err):
        ModelParams(**kwargs)
    assert issubclass(err, ParameterError)


def test_exact_view():
    ex = ModelParams(0.08, 0.4, 0.1, 0.01).exact()
    assert ex["theta"] == Fraction(1, 2)
    assert ex["rho"] == Fraction(5, 8)
    assert as_rational(0.1) == Fraction(1, 10)


def test_mapping_round_trip():
    p = ModelParams(0.08, 0.4, 0.1, 0.01)
    assert ModelParams.from_mapping(p.to_dict()) == p


def test_endowment_validation_and_fraction():
    with pytest.raises(EndowmentError):
        Endowment(0.0, 0.0)
    with pytest.raises(EndowmentError):
        Endowment(-1.0, 1.0)
    e = Endowment(2.0, 1.0, s0=2.0)
    assert e.wealth_at_ask == 4.0
    assert e.stock_fraction == 0.5


def test_lambda_conventions():
    assert lambda_convention_convert(0.01, "to-symmetric") == pytest.approx(0.01 / 1.99, rel=1e-15)
    for lam in (1e-4, 0.01, 0.3, 0.9):
        back = lambda_convention_convert(lambda_convention_convert(lam, "to-symmetric"), "from-symmetric")
        assert back == pytest.approx(lam, rel=1e-14)
    with pytest.raises(ValueError):
        lambda_convention_convert(0.1, "sideways")


def test_frictionless_value_reference():
    p = ModelParams(0.08, 0.4, 0.1, 0.01)
    v = merton_value_frictionless(p, Endowment.on_merton_line(p))
    # log(0.1)/0.1 + (0.02 - 0.1)/0.01
    assert v == pytest.approx(10 * math.log(0.1) - 8.0, abs=1e-12)
