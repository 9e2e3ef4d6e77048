"""Truncated power series with exact-rational or float coefficients.

Two containers are provided:

* :class:`PuiseuxSeries` -- one variable, coefficients ``c_0 .. c_K``.  The
  variable is a tag only (for the expansions it is ``lambda^(1/3)``), so a
  Puiseux series in lambda is an ordinary power series in that tag.
* :class:`BivariateSeries` -- coefficients ``a[i, j]`` of ``x^i y^j`` with
  rectangular truncation ``i <= I, j <= J``.

Coefficients are numpy arrays.  Integer or ``Fraction`` input gives an object
array and all arithmetic stays exact; any float input gives a float64 array.
The truncation order of every result is the order up to which it is fully
determined by its operands.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

from .errors import SeriesError

__all__ = [
    "PuiseuxSeries",
    "BivariateSeries",
    "series_mul",
    "series_pow",
    "series_reversion",
    "lagrange_coefficients",
    "solve_implicit",
    "exact_pow",
]

DEFAULT_BASE = "lambda^(1/3)"


def _as_array(values: Iterable, exact: bool | None = None) -> np.ndarray:
    vals = list(values)
    if exact is None:
        exact = all(isinstance(v, (int, Fraction)) for v in vals)
    if exact:
        arr = np.empty(len(vals), dtype=object)
        for k, v in enumerate(vals):
            arr[k] = Fraction(v)
        return arr
    return np.asarray([float(v) for v in vals], dtype=np.float64)


def _zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape, dtype=np.float64)


def _convolve(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` coefficients of the Cauchy product."""
    return np.convolve(a[:n], b[:n])[:n]


def _common_exact(*arrays: np.ndarray) -> bool:
    return all(a.dtype == object for a in arrays)


def _coerce(arr: np.ndarray, exact: bool) -> np.ndarray:
    if exact or arr.dtype != object:
        return arr
    return arr.astype(np.float64)


def _integer_root(n: int, q: int) -> int | None:
    """Exact q-th root of a nonnegative integer, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == n:
            return cand
    # large integers: Newton on integers
    x = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    return x if x**q == n else None


def exact_pow(base, exponent):
    """``base ** exponent``, exact when both are rational and the root is rational."""
    if isinstance(exponent, bool):
        exponent = int(exponent)
    if isinstance(base, (int, Fraction)) and isinstance(exponent, (int, Fraction)):
        exponent = Fraction(exponent)
        base = Fraction(base)
        if exponent.denominator == 1:
            return base ** int(exponent)
        q = exponent.denominator
        sign = 1
        if base < 0:
            if q % 2 == 0:
                raise SeriesError("even root of a negative constant term")
            sign, base = -1, -base
        rn = _integer_root(base.numerator, q)
        rd = _integer_root(base.denominator, q)
        if rn is not None and rd is not None:
            return (sign * Fraction(rn, rd)) ** exponent.numerator
        base = sign * base
    b, e = float(base), float(exponent)
    if b < 0 and not e.is_integer():
        # odd-denominator roots of negative numbers
        if isinstance(exponent, Fraction) and exponent.denominator % 2 == 1:
            return -((-b) ** e) if exponent.numerator % 2 else (-b) ** e
        raise SeriesError("non-integer power of a negative constant term")
    return b**e


class PuiseuxSeries:
    """Truncated power series ``c_0 + c_1 t + ... + c_K t^K`` (``t`` named by ``base``)."""

    __slots__ = ("coeffs", "base")

    def __init__(self, coeffs: Sequence | np.ndarray, base: str = DEFAULT_BASE, *, exact: bool | None = None):
        if isinstance(coeffs, np.ndarray) and exact is None:
            arr = coeffs.copy()
            if arr.dtype != object:
                arr = arr.astype(np.float64)
        else:
            arr = _as_array(coeffs, exact)
        if arr.ndim != 1 or len(arr) == 0:
            raise SeriesError("a series needs at least the constant coefficient")
        arr.flags.writeable = False
        self.coeffs = arr
        self.base = base

    # -- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, base: str = DEFAULT_BASE) -> "PuiseuxSeries":
        exact = isinstance(value, (int, Fraction))
        arr = _zeros(order + 1, exact)
        arr[0] = Fraction(value) if exact else float(value)
        return cls(arr, base)

    @classmethod
    def variable(cls, order: int, base: str = DEFAULT_BASE, exact: bool = True) -> "PuiseuxSeries":
        arr = _zeros(order + 1, exact)
        if order >= 1:
            arr[1] = Fraction(1) if exact else 1.0
        return cls(arr, base)

    # -- basic properties -----------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    @property
    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient (None for the zero series)."""
        for k, v in enumerate(self.coeffs):
            if v != 0:
                return k
        return None

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k: int):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def to_float(self) -> "PuiseuxSeries":
        return PuiseuxSeries(np.asarray([float(v) for v in self.coeffs]), self.base)

    def floats(self) -> list[float]:
        return [float(v) for v in self.coeffs]

    def truncate(self, order: int) -> "PuiseuxSeries":
        if order > self.order:
            raise SeriesError(f"cannot extend a series of order {self.order} to {order}")
        return PuiseuxSeries(self.coeffs[: order + 1], self.base)

    def with_base(self, base: str) -> "PuiseuxSeries":
        return PuiseuxSeries(self.coeffs, base)

    def _check(self, other: "PuiseuxSeries") -> None:
        if self.base != other.base:
            raise SeriesError(f"base mismatch: {self.base!r} vs {other.base!r}")

    def _pair(self, other: "PuiseuxSeries") -> tuple[np.ndarray, np.ndarray, int, bool]:
        self._check(other)
        n = min(len(self), len(other))
        exact = _common_exact(self.coeffs, other.coeffs)
        return _coerce(self.coeffs[:n], exact), _coerce(other.coeffs[:n], exact), n, exact

    # -- ring operations ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, PuiseuxSeries):
            a, b, _, _ = self._pair(other)
            return PuiseuxSeries(a + b, self.base)
        if isinstance(other, Real):
            arr = self._scalar_ready(other).copy()
            arr[0] = arr[0] + other
            return PuiseuxSeries(arr, self.base)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(-self.coeffs, self.base)

    def __sub__(self, other):
        if isinstance(other, (PuiseuxSeries, Real)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def _scalar_ready(self, scalar) -> np.ndarray:
        if self.exact and not isinstance(scalar, (int, Fraction)):
            return self.coeffs.astype(np.float64)
        return self.coeffs

    def __mul__(self, other):
        if isinstance(other, PuiseuxSeries):
            return series_mul(self, other)
        if isinstance(other, Real):
            return PuiseuxSeries(self._scalar_ready(other) * other, self.base)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "PuiseuxSeries":
        """Multiplicative inverse; the constant term must be nonzero."""
        a = self.coeffs
        if a[0] == 0:
            raise SeriesError(
                "inverse of a series with zero constant term; factor out the valuation first"
            )
        n = len(a)
        b = _zeros(n, self.exact)
        inv0 = Fraction(1) / a[0] if self.exact else 1.0 / a[0]
        b[0] = inv0
        for k in range(1, n):
            b[k] = -inv0 * np.dot(a[1 : k + 1], b[k - 1 :: -1][:k])
        return PuiseuxSeries(b, self.base)

    def __truediv__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self * other.inverse()
        if isinstance(other, Real):
            if self.exact and isinstance(other, (int, Fraction)):
                return PuiseuxSeries(self.coeffs * Fraction(1, 1) / Fraction(other), self.base)
            return PuiseuxSeries(self._scalar_ready(other) / other, self.base)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Real):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, r):
        return series_pow(self, r)

    # -- monomial shifts, substitution ---------------------------------------
    def shift(self, k: int) -> "PuiseuxSeries":
        """Multiply by ``t^k`` (k >= 0); the truncation order grows by k."""
        if k < 0:
            return self.divide_monomial(-k)
        pad = _zeros(k, self.exact)
        return PuiseuxSeries(np.concatenate([pad, self.coeffs]), self.base)

    def divide_monomial(self, k: int) -> "PuiseuxSeries":
        """Divide by ``t^k``; the first ``k`` coefficients must vanish."""
        if k > self.order:
            raise SeriesError("not enough known coefficients to divide by the monomial")
        if any(v != 0 for v in self.coeffs[:k]):
            raise SeriesError(f"series is not divisible by t^{k}")
        return PuiseuxSeries(self.coeffs[k:], self.base)

    def rescale(self, factor) -> "PuiseuxSeries":
        """Substitute ``t -> factor * t``: coefficient k is multiplied by factor**k."""
        exact = self.exact and isinstance(factor, (int, Fraction))
        src = self.coeffs if exact else self.coeffs.astype(np.float64)
        out = _zeros(len(src), exact)
        p = Fraction(1) if exact else 1.0
        for k in range(len(src)):
            out[k] = src[k] * p
            p = p * factor
        return PuiseuxSeries(out, self.base)

    def compose(self, inner: "PuiseuxSeries") -> "PuiseuxSeries":
        """``self(inner(t))``; ``inner`` must have zero constant term.

        ``inner`` may carry a different base; the result lives in inner's base.
        """
        if inner.coeffs[0] != 0:
            raise SeriesError("composition needs an inner series with zero constant term")
        n = min(len(self), len(inner))
        exact = _common_exact(self.coeffs, inner.coeffs)
        a = _coerce(self.coeffs, exact)
        b = _coerce(inner.coeffs[:n], exact)
        acc = _zeros(n, exact)
        for k in range(len(a) - 1, -1, -1):
            acc = _convolve(acc, b, n)
            acc[0] = acc[0] + a[k]
        return PuiseuxSeries(acc, inner.base)

    def __call__(self, t: float) -> float:
        """Evaluate the truncated polynomial at a number."""
        acc = 0.0
        for v in reversed(self.coeffs):
            acc = acc * t + float(v)
        return acc

    def log1p(self) -> "PuiseuxSeries":
        """``log(1 + self)`` for a series with zero constant term."""
        if self.coeffs[0] != 0:
            raise SeriesError("log1p needs zero constant term")
        n = len(self)
        exact = self.exact
        acc = PuiseuxSeries(_zeros(n, exact), self.base)
        power = PuiseuxSeries.constant(Fraction(1) if exact else 1.0, self.order, self.base)
        for k in range(1, n):
            power = power * self
            term = power * (Fraction((-1) ** (k + 1), k) if exact else (-1) ** (k + 1) / k)
            acc = acc + term
        return acc

    # -- comparison / output --------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return (
            self.base == other.base
            and len(self) == len(other)
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    __hash__ = None  # type: ignore[assignment]

    def allclose(self, other: "PuiseuxSeries", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        n = min(len(self), len(other))
        return bool(
            np.allclose(
                np.asarray(self.floats()[:n]), np.asarray(other.floats()[:n]), atol=atol, rtol=rtol
            )
        )

    def to_json(self) -> dict:
        out = {"base": self.base, "order": self.order, "coeffs": self.floats()}
        if self.exact:
            out["exact"] = [str(v) for v in self.coeffs]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PuiseuxSeries":
        if "exact" in data:
            return cls([Fraction(v) for v in data["exact"]], data["base"])
        return cls(np.asarray(data["coeffs"], dtype=np.float64), data["base"])

    def __str__(self) -> str:
        terms = []
        for k, v in enumerate(self.coeffs):
            if k == 0:
                terms.append(f"{float(v):.10g}")
            else:
                sign = "-" if float(v) < 0 else "+"
                terms.append(f"{sign} {abs(float(v)):.10g}*{_power_symbol(self.base, k)}")
        terms.append(f"+ O({_power_symbol(self.base, self.order + 1)})")
        return " ".join(terms)

    def __repr__(self) -> str:
        return f"PuiseuxSeries({list(self.coeffs)!r}, base={self.base!r})"


_ROOT_BASE = re.compile(r"^(?P<var>.+)\^\((?P<num>\d+)/(?P<den>\d+)\)$")


def _power_symbol(base: str, k: int) -> str:
    """``base^k`` with rational exponents merged: lambda^(1/3), k=3 -> lambda."""
    m = _ROOT_BASE.match(base)
    if m is None:
        return base if k == 1 else f"{base}^{k}"
    var = m["var"]
    e = Fraction(int(m["num"]), int(m["den"])) * k
    if e == 1:
        return var
    if e.denominator == 1:
        return f"{var}^{e.numerator}"
    return f"{var}^({e.numerator}/{e.denominator})"


def series_mul(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    """Cauchy product truncated at the smaller order."""
    x, y, n, _ = a._pair(b)
    return PuiseuxSeries(_convolve(x, y, n), a.base)


def series_pow(a: PuiseuxSeries, r) -> PuiseuxSeries:
    """``a ** r`` for a real exponent.

    A leading monomial ``t^v`` is factored out when ``r * v`` is a nonnegative
    integer; the result then has order ``r v + K - v``.  Coefficients follow the
    power recurrence ``b_n = 1/(n a_0) sum_k ((r+1) k - n) a_k b_{n-k}``.
    """
    if isinstance(r, float) and r.is_integer():
        r = int(r)
    v = a.valuation
    if v is None:
        if r == 0:
            return PuiseuxSeries.constant(1 if a.exact else 1.0, a.order, a.base)
        if r > 0:
            return a
        raise SeriesError("negative power of the zero series")
    if r == 0:
        return PuiseuxSeries.constant(Fraction(1) if a.exact else 1.0, a.order, a.base)
    if v > 0:
        shift = r * v
        if isinstance(shift, float):
            ok = shift.is_integer() and shift >= 0
        else:
            ok = Fraction(shift).denominator == 1 and shift >= 0
        if not ok:
            raise SeriesError(
                f"cannot raise a series of valuation {v} to the power {r}: "
                "the monomial factor is not an integer power"
            )
        return series_pow(a.divide_monomial(v), r).shift(int(shift))
    exact = a.exact and isinstance(r, (int, Fraction))
    coeffs = a.coeffs if exact else a.coeffs.astype(np.float64)
    rr = Fraction(r) if exact else float(r)
    n = len(coeffs)
    b = _zeros(n, exact)
    b0 = exact_pow(coeffs[0], rr)
    if exact and not isinstance(b0, Fraction):
        # the root of the constant term is irrational: continue in floats
        return series_pow(a.to_float(), float(r))
    b[0] = b0
    a0 = coeffs[0]
    for k in range(1, n):
        acc = Fraction(0) if exact else 0.0
        for j in range(1, k + 1):
            acc += ((rr + 1) * j - k) * coeffs[j] * b[k - j]
        b[k] = acc / (k * a0)
    return PuiseuxSeries(b, a.base)


def lagrange_coefficients(phi: PuiseuxSeries, order: int) -> PuiseuxSeries:
    """Solve ``z = w * phi(z)`` for ``z(w)`` by Lagrange inversion.

    ``[w^k] z = (1/k) [u^(k-1)] phi(u)^k`` for ``k >= 1``.  ``phi`` needs a
    nonzero constant term and must be known to order ``order - 1``.
    """
    if phi.coeffs[0] == 0:
        raise SeriesError("Lagrange inversion needs phi(0) != 0")
    if phi.order < order - 1:
        raise SeriesError("phi is not known to sufficient order")
    exact = phi.exact
    out = _zeros(order + 1, exact)
    phi = phi.truncate(max(order - 1, 0))
    power = PuiseuxSeries.constant(Fraction(1) if exact else 1.0, phi.order, phi.base)
    for k in range(1, order + 1):
        power = power * phi
        out[k] = power.coeffs[k - 1] / k
    return PuiseuxSeries(out, phi.base)


def series_reversion(a: PuiseuxSeries) -> PuiseuxSeries:
    """Compositional inverse of ``a = a_1 t + a_2 t^2 + ...`` (``a_1 != 0``)."""
    if a.coeffs[0] != 0:
        raise SeriesError("reversion needs a zero constant term")
    if a.order < 1 or a.coeffs[1] == 0:
        raise SeriesError("reversion needs a nonzero linear coefficient")
    # w = a(z) = z * (a(z)/z)  <=>  z = w * phi(z) with phi = z / a(z)
    phi = a.divide_monomial(1).inverse()
    return lagrange_coefficients(phi, a.order)


class BivariateSeries:
    """Truncated series ``sum a[i, j] x^i y^j`` for ``i <= I``, ``j <= J``."""

    __slots__ = ("coeffs", "bases")

    def __init__(self, coeffs, bases: tuple[str, str] = ("x", "y")):
        arr = np.asarray(coeffs)
        if arr.dtype != object:
            arr = arr.astype(np.float64)
        if arr.ndim != 2:
            raise SeriesError("bivariate coefficients must be a 2-d array")
        self.coeffs = arr
        self.bases = tuple(bases)

    @classmethod
    def zeros(cls, orders: tuple[int, int], exact: bool, bases=("x", "y")) -> "BivariateSeries":
        return cls(_zeros((orders[0] + 1, orders[1] + 1), exact), bases)

    @classmethod
    def from_x(cls, s: PuiseuxSeries, order_y: int, bases=("x", "y")) -> "BivariateSeries":
        out = _zeros((len(s), order_y + 1), s.exact)
        out[:, 0] = s.coeffs
        return cls(out, bases)

    @classmethod
    def from_y(cls, s: PuiseuxSeries, order_x: int, bases=("x", "y")) -> "BivariateSeries":
        out = _zeros((order_x + 1, len(s)), s.exact)
        out[0, :] = s.coeffs
        return cls(out, bases)

    @property
    def orders(self) -> tuple[int, int]:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    def __getitem__(self, ij):
        return self.coeffs[ij]

    def row(self, i: int) -> PuiseuxSeries:
        """Coefficient of ``x^i`` as a series in ``y``."""
        return PuiseuxSeries(self.coeffs[i].copy(), self.bases[1])

    def transpose(self) -> "BivariateSeries":
        return BivariateSeries(self.coeffs.T.copy(), (self.bases[1], self.bases[0]))

    def truncate(self, orders: tuple[int, int]) -> "BivariateSeries":
        return BivariateSeries(self.coeffs[: orders[0] + 1, : orders[1] + 1].copy(), self.bases)

    def _pair(self, other: "BivariateSeries"):
        if self.bases != other.bases:
            raise SeriesError(f"base mismatch: {self.bases} vs {other.bases}")
        ni = min(self.coeffs.shape[0], other.coeffs.shape[0])
        nj = min(self.coeffs.shape[1], other.coeffs.shape[1])
        exact = self.exact and other.exact
        a = _coerce(self.coeffs[:ni, :nj], exact)
        b = _coerce(other.coeffs[:ni, :nj], exact)
        return a, b, ni, nj, exact

    def __add__(self, other):
        if isinstance(other, BivariateSeries):
            a, b, _, _, _ = self._pair(other)
            return BivariateSeries(a + b, self.bases)
        if isinstance(other, Real):
            arr = self.coeffs.copy() if (not self.exact or isinstance(other, (int, Fraction))) else self.coeffs.astype(np.float64)
            arr[0, 0] = arr[0, 0] + other
            return BivariateSeries(arr, self.bases)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return BivariateSeries(-self.coeffs, self.bases)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BivariateSeries):
            a, b, ni, nj, exact = self._pair(other)
            out = _zeros((ni, nj), exact)
            for i in range(ni):
                ai = a[i]
                if not any(v != 0 for v in ai):
                    continue
                for k in range(ni - i):
                    out[i + k] += _convolve(ai, b[k], nj)
            return BivariateSeries(out, self.bases)
        if isinstance(other, PuiseuxSeries):
            # series in y only
            return self * BivariateSeries.from_y(other, self.orders[0], self.bases)
        if isinstance(other, Real):
            arr = self.coeffs if (not self.exact or isinstance(other, (int, Fraction))) else self.coeffs.astype(np.float64)
            return BivariateSeries(arr * other, self.bases)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "BivariateSeries":
        """Multiplicative inverse, computed row by row in ``x``."""
        a = self.coeffs
        if a[0, 0] == 0:
            raise SeriesError("inverse needs a nonzero constant coefficient")
        ni, nj = a.shape
        inv0 = PuiseuxSeries(a[0].copy(), self.bases[1]).inverse().coeffs
        out = _zeros((ni, nj), self.exact)
        out[0] = inv0
        for i in range(1, ni):
            acc = _zeros(nj, self.exact)
            for k in range(1, i + 1):
                acc = acc + _convolve(a[k], out[i - k], nj)
            out[i] = -_convolve(inv0, acc, nj)
        return BivariateSeries(out, self.bases)

    def __truediv__(self, other):
        if isinstance(other, BivariateSeries):
            return self * other.inverse()
        if isinstance(other, Real):
            if self.exact and isinstance(other, (int, Fraction)):
                return BivariateSeries(self.coeffs * Fraction(1) / Fraction(other), self.bases)
            return BivariateSeries(self.coeffs.astype(np.float64) / other, self.bases)
        return NotImplemented

    def dx(self) -> "BivariateSeries":
        """Partial derivative in ``x``; the x-order drops by one."""
        ni = self.coeffs.shape[0]
        if ni < 2:
            raise SeriesError("derivative needs x-order >= 1")
        scale = np.arange(1, ni).reshape(-1, 1)
        if self.exact:
            scale = scale.astype(object)
        return BivariateSeries(self.coeffs[1:] * scale, self.bases)

    def substitute_x(self, p: PuiseuxSeries) -> PuiseuxSeries:
        """``F(p(y), y)`` for a series ``p`` in ``y`` with zero constant term."""
        if p.coeffs[0] != 0:
            raise SeriesError("substituted series must have zero constant term")
        ni, nj = self.coeffs.shape
        n = min(nj, len(p))
        exact = self.exact and p.exact
        rows = _coerce(self.coeffs[:, :n], exact)
        pc = _coerce(p.coeffs[:n], exact)
        acc = _zeros(n, exact)
        for i in range(ni - 1, -1, -1):
            acc = _convolve(acc, pc, n) + rows[i]
        return PuiseuxSeries(acc, p.base)

    def evaluate(self, x: float, y: float) -> float:
        xs = x ** np.arange(self.coeffs.shape[0])
        ys = y ** np.arange(self.coeffs.shape[1])
        return float(xs @ self.coeffs.astype(np.float64) @ ys)

    def to_float(self) -> "BivariateSeries":
        return BivariateSeries(self.coeffs.astype(np.float64), self.bases)

    def __repr__(self) -> str:
        return f"BivariateSeries(orders={self.orders}, bases={self.bases})"


def solve_implicit(F: BivariateSeries, order: int | None = None) -> PuiseuxSeries:
    """Series ``y(x)`` with ``y(0) = 0`` and ``F(x, y(x)) = 0`` up to truncation.

    Needs ``F[0, 0] == 0`` and ``F[0, 1] != 0``.  Uses the fixed-point map
    ``y <- y - F(x, y) / F_y(0, 0)``, which gains one order per sweep.
    """
    a = F.coeffs
    if a[0, 0] != 0:
        raise SeriesError("F(0, 0) must vanish")
    if a.shape[1] < 2 or a[0, 1] == 0:
        raise SeriesError("degenerate linear coefficient dF/dy(0, 0) = 0")
    I, J = F.orders
    order = min(I, J) if order is None else min(order, I, J)
    # view F as a series in y whose coefficients are series in x
    Ft = F.transpose().truncate((J, order))
    exact = F.exact
    y = PuiseuxSeries(_zeros(order + 1, exact), F.bases[0])
    fy = a[0, 1]
    for _ in range(order + 1):
        resid = Ft.substitute_x(y)
        y = y - resid / fy if exact else y - resid * (1.0 / float(fy))
        if all(v == 0 for v in resid.coeffs):
            break
    return y
