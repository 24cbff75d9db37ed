"""Exact scalars, dense polynomials, truncated Laurent tails and interval floats.

Rationals are plain :class:`fractions.Fraction` values (always reduced, with a
positive denominator).  Everything transcendental goes through
:class:`BigFloat`, a closed interval with an explicit working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from numbers import Rational
from typing import Iterable, Sequence

import mpmath
from mpmath import libmp
from mpmath.libmp import libmpi

Rat = Fraction

DEFAULT_PRECISION = 128

VARIABLES = ("t", "z", "eps", "x")


def rat(value) -> Fraction:
    """Coerce ints, Fractions and strings such as ``"-3/4"`` to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def rat_to_str(value: Fraction) -> str:
    value = rat(value)
    return f"{value.numerator}/{value.denominator}"


def rat_from_str(text: str) -> Fraction:
    return Fraction(text.strip())


# ---------------------------------------------------------------------------
# Polynomials


class Poly:
    """Dense univariate polynomial with Fraction coefficients.

    ``coeffs[k]`` is the coefficient of ``var**k``.  Trailing zeros are
    trimmed, and the zero polynomial has degree -1.  Instances are immutable
    and can themselves act as ring scalars (that is how :class:`EpsPoly`
    entries flow through the generic kernel-map code).
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "t"):
        if var not in VARIABLES:
            raise ValueError(f"unknown variable tag {var!r}")
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self.var = var

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, c, var: str = "t") -> "Poly":
        return cls([c], var)

    @classmethod
    def monomial(cls, k: int, c=1, var: str = "t") -> "Poly":
        return cls([0] * k + [c], var)

    @classmethod
    def from_roots(cls, roots: Sequence, multiplicity: int = 1, var: str = "t") -> "Poly":
        return cls(poly_from_roots(roots, multiplicity), var)

    def _like(self, coeffs) -> "Poly":
        return type(self)(coeffs, self.var)

    # basic queries -------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def leading_coefficient(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def valuation(self):
        """Index of the lowest nonzero coefficient (``None`` for zero)."""
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return None

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs and (
                self.var == other.var or self.degree <= 0
            )
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.var, self.coeffs))

    def __repr__(self):
        return f"{type(self).__name__}({[str(c) for c in self.coeffs]}, var={self.var!r})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else (self.var if k == 1 else f"{self.var}^{k}")
            if mono and c == 1:
                term = mono
            elif mono and c == -1:
                term = "-" + mono
            else:
                term = f"{c}*{mono}" if mono else str(c)
            parts.append(term)
        return " + ".join(parts).replace("+ -", "- ")

    # arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.var != self.var and other.degree > 0 and self.degree > 0:
                raise ValueError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        return self._like([other])

    def __add__(self, other):
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return self._like([self[k] + o[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._like([c * other for c in self.coeffs])
        if not isinstance(other, Poly):
            return NotImplemented
        o = self._coerce(other)
        if not self.coeffs or not o.coeffs:
            return self._like([])
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return self._like(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return self._like([c / other for c in self.coeffs])
        if isinstance(other, Poly):
            return self.exact_div(other)
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not polynomials")
        result = self._like([1])
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def divmod(self, other: "Poly"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.coeffs[-1]
        quo = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k]
            if c == 0:
                continue
            q = c / lead
            quo[k - dq] = q
            for i, b in enumerate(other.coeffs):
                rem[k - dq + i] -= q * b
        return self._like(quo), self._like(rem)

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    # calculus and evaluation -----------------------------------------------
    def __call__(self, value):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * value + c
        if isinstance(acc, int):
            acc = Fraction(acc)
        return acc

    def derivative(self, order: int = 1) -> "Poly":
        cs = list(self.coeffs)
        for _ in range(order):
            cs = [k * cs[k] for k in range(1, len(cs))]
        return self._like(cs)

    def compose(self, inner: "Poly") -> "Poly":
        acc = inner._like([])
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return type(self)(acc.coeffs, inner.var)

    def retag(self, var: str) -> "Poly":
        return Poly(self.coeffs, var)

    def to_json(self) -> list[str]:
        return [rat_to_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str], var: str = "t") -> "Poly":
        return cls([rat_from_str(c) for c in data], var)


class EpsPoly(Poly):
    """Polynomial in a collision parameter ``eps``.

    Used where one point is perturbed as ``alpha + eps``; the interesting
    quantity is :meth:`valuation`, the order of vanishing at ``eps = 0``.
    ``max_degree`` optionally truncates higher powers.
    """

    __slots__ = ("max_degree",)

    def __init__(self, coeffs: Iterable = (), var: str = "eps", max_degree: int | None = None):
        cs = list(coeffs)
        if max_degree is not None:
            cs = cs[: max_degree + 1]
        super().__init__(cs, "eps")
        self.max_degree = max_degree

    def _like(self, coeffs) -> "EpsPoly":
        return EpsPoly(coeffs, max_degree=self.max_degree)

    @classmethod
    def shift(cls, a) -> "EpsPoly":
        """The scalar ``a + eps``."""
        return cls([rat(a), 1])


def poly_from_roots(roots: Sequence, multiplicity: int = 1) -> list:
    """Coefficients (ascending) of ``prod (t - r)**multiplicity``.

    Works over any commutative ring whose elements support ``+``, ``-`` and
    ``*`` with each other and with ints, so roots may be EpsPoly values.
    """
    coeffs: list = [Fraction(1)]
    for r in roots:
        for _ in range(multiplicity):
            nxt = [None] * (len(coeffs) + 1)
            nxt[0] = -(r * coeffs[0])
            for k in range(1, len(coeffs)):
                nxt[k] = coeffs[k - 1] - r * coeffs[k]
            nxt[-1] = coeffs[-1]
            coeffs = nxt
    return coeffs


# ---------------------------------------------------------------------------
# Laurent tails


@dataclass(frozen=True)
class TruncatedSeries:
    """``sum_{k >= start} coeffs[k - start] * z**(-k)`` known up to ``truncation``."""

    start: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("start order must be nonnegative")
        object.__setattr__(self, "coeffs", tuple(rat(c) for c in self.coeffs))

    @property
    def truncation(self) -> int:
        return self.start + len(self.coeffs) - 1

    def coefficient(self, k: int) -> Fraction:
        """Coefficient of ``z**(-k)``; asking past the truncation is an error."""
        if k > self.truncation:
            raise IndexError(f"order {k} is beyond truncation {self.truncation}")
        if k < self.start:
            return Fraction(0)
        return self.coeffs[k - self.start]

    def ord_inf(self):
        """Smallest k with nonzero coefficient, or ``None`` if beyond truncation."""
        for offset, c in enumerate(self.coeffs):
            if c != 0:
                return self.start + offset
        return None

    def to_json(self) -> dict:
        return {"start": self.start, "coeffs": [rat_to_str(c) for c in self.coeffs]}


# ---------------------------------------------------------------------------
# Interval floats


def _ceil_log2(q: Fraction) -> int:
    return q.numerator.bit_length() - q.denominator.bit_length() + 1


class BigFloat:
    """Real number known to lie in ``[lower, upper]``.

    Endpoints are mpmath raw floats rounded outward at ``prec`` bits, so the
    enclosure is rigorous.  The error bound is the interval radius.
    """

    __slots__ = ("_iv", "prec")

    def __init__(self, interval, prec: int = DEFAULT_PRECISION):
        self._iv = interval
        self.prec = prec

    # construction ---------------------------------------------------------
    @classmethod
    def from_rational(cls, q, prec: int = DEFAULT_PRECISION) -> "BigFloat":
        q = rat(q)
        lo = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_floor)
        hi = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_ceiling)
        return cls((lo, hi), prec)

    @classmethod
    def from_bounds(cls, lower, upper, prec: int = DEFAULT_PRECISION) -> "BigFloat":
        lo = cls._coerce_endpoint(lower, prec, libmp.round_floor)
        hi = cls._coerce_endpoint(upper, prec, libmp.round_ceiling)
        return cls((lo, hi), prec)

    @staticmethod
    def _coerce_endpoint(value, prec, rnd):
        if isinstance(value, (int, Fraction)):
            q = Fraction(value)
            return libmp.from_rational(q.numerator, q.denominator, prec, rnd)
        if isinstance(value, mpmath.mpf):
            return libmp.mpf_pos(value._mpf_, prec, rnd)
        if isinstance(value, float):
            return libmp.mpf_pos(libmp.from_float(value), prec, rnd)
        raise TypeError(f"cannot use {type(value).__name__} as an interval endpoint")

    @classmethod
    def log_of(cls, q, prec: int = DEFAULT_PRECISION) -> "BigFloat":
        q = rat(q)
        if q <= 0:
            raise ValueError("log of a nonpositive number")
        return cls.from_rational(q, prec + 8).log().with_prec(prec)

    @classmethod
    def pi(cls, prec: int = DEFAULT_PRECISION) -> "BigFloat":
        return cls((libmp.mpf_pi(prec, libmp.round_floor), libmp.mpf_pi(prec, libmp.round_ceiling)), prec)

    @classmethod
    def zero(cls, prec: int = DEFAULT_PRECISION) -> "BigFloat":
        return cls((libmp.fzero, libmp.fzero), prec)

    def with_prec(self, prec: int) -> "BigFloat":
        lo, hi = self._iv
        return BigFloat((libmp.mpf_pos(lo, prec, libmp.round_floor), libmp.mpf_pos(hi, prec, libmp.round_ceiling)), prec)

    # arithmetic -------------------------------------------------------------
    def _other(self, other) -> "BigFloat":
        if isinstance(other, BigFloat):
            return other
        if isinstance(other, (int, Fraction)):
            return BigFloat.from_rational(other, self.prec)
        raise TypeError(f"unsupported operand {other!r}")

    def _wrap(self, other, op):
        try:
            o = self._other(other)
        except TypeError:
            return NotImplemented
        prec = max(self.prec, o.prec)
        return BigFloat(op(self._iv, o._iv, prec), prec)

    def __add__(self, other):
        return self._wrap(other, libmpi.mpi_add)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self._wrap(other, libmpi.mpi_sub)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        return self._wrap(other, libmpi.mpi_mul)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return self._wrap(other, libmpi.mpi_div)

    def __rtruediv__(self, other):
        return self._other(other).__truediv__(self)

    def __neg__(self):
        return BigFloat(libmpi.mpi_neg(self._iv, self.prec), self.prec)

    def __abs__(self):
        return BigFloat(libmpi.mpi_abs(self._iv, self.prec), self.prec)

    def log(self) -> "BigFloat":
        if not self.is_positive():
            raise ValueError("log of an interval that is not strictly positive")
        return BigFloat(libmpi.mpi_log(self._iv, self.prec), self.prec)

    def exp(self) -> "BigFloat":
        return BigFloat(libmpi.mpi_exp(self._iv, self.prec), self.prec)

    # inspection -------------------------------------------------------------
    @property
    def lower(self):
        return self._exact(self._iv[0])

    @property
    def upper(self):
        return self._exact(self._iv[1])

    @property
    def mid(self):
        lo, hi = self._iv
        return self._exact(libmp.mpf_shift(libmp.mpf_add(lo, hi, self.prec + 2), -1))

    @staticmethod
    def _exact(raw):
        """An mpf holding the raw value exactly, whatever the global precision."""
        value = mpmath.mpf(0)
        value._mpf_ = raw
        return value

    @property
    def error_bound(self):
        lo, hi = self._iv
        m = libmp.mpf_shift(libmp.mpf_add(lo, hi, self.prec + 2), -1)
        r = max(
            libmp.mpf_sub(hi, m, 53, libmp.round_ceiling),
            libmp.mpf_sub(m, lo, 53, libmp.round_ceiling),
            key=lambda v: mpmath.mpf(v),
        )
        return mpmath.mpf(r)

    def is_positive(self) -> bool:
        return libmp.mpf_gt(self._iv[0], libmp.fzero)

    def is_negative(self) -> bool:
        return libmp.mpf_lt(self._iv[1], libmp.fzero)

    def contains(self, value) -> bool:
        if isinstance(value, BigFloat):
            return libmp.mpf_le(self._iv[0], value._iv[0]) and libmp.mpf_le(value._iv[1], self._iv[1])
        if isinstance(value, (int, Fraction)):
            q = Fraction(value)
            lo = Fraction(*libmp.to_rational(self._iv[0]))
            hi = Fraction(*libmp.to_rational(self._iv[1]))
            return lo <= q <= hi
        # mpf and mpmath constants both expose _mpf_; a constant is evaluated at the current context precision
        raw = getattr(value, "_mpf_", None)
        if raw is None:
            raw = libmp.from_float(float(value))
        return libmp.mpf_le(self._iv[0], raw) and libmp.mpf_le(raw, self._iv[1])

    def overlaps(self, other: "BigFloat") -> bool:
        return not (libmp.mpf_lt(self._iv[1], other._iv[0]) or libmp.mpf_lt(other._iv[1], self._iv[0]))

    def __float__(self):
        return float(self.mid)

    def to_str(self, digits: int | None = None) -> str:
        if digits is None:
            digits = max(int(self.prec * 0.30103), 1)
        lo, hi = self._iv
        m = libmp.mpf_shift(libmp.mpf_add(lo, hi, self.prec + 2), -1)
        return libmp.to_str(m, digits, min_fixed=-math.inf, max_fixed=math.inf)

    def to_json(self, digits: int = 30) -> dict:
        return {
            "value": self.to_str(digits),
            "error_bound": mpmath.nstr(self.error_bound, 3),
            "precision_bits": self.prec,
        }

    def __repr__(self):
        return f"BigFloat({self.to_str(20)} +/- {mpmath.nstr(self.error_bound, 3)})"


def bigfloat_sum(values: Iterable[BigFloat], prec: int = DEFAULT_PRECISION) -> BigFloat:
    return reduce(lambda a, b: a + b, values, BigFloat.zero(prec))


# ---------------------------------------------------------------------------
# Arithmetic helpers


def rising_factorial(a, n: int) -> Fraction:
    """``a (a+1) ... (a+n-1)``; the empty product for ``n == 0``."""
    if n < 0:
        raise ValueError("rising factorial length must be nonnegative")
    a = rat(a)
    out = Fraction(1)
    for k in range(n):
        out *= a + k
    return out


def lcm_dN(a: int, b: int, N: int) -> int:
    """lcm of the nonzero members of ``a, a+b, ..., a+bN``."""
    if b == 0:
        raise ValueError("b must be positive")
    if N < 0:
        raise ValueError("N must be nonnegative")
    out = 1
    for k in range(N + 1):
        term = abs(a + b * k)
        if term:
            out = math.lcm(out, term)
    return out


def _prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def log_mu(x, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """``log`` of the product of ``q**(q/(q-1))`` over primes q dividing den(x)."""
    x = rat(x)
    total = BigFloat.zero(precision)
    for q in _prime_factors(x.denominator):
        total = total + BigFloat.log_of(q, precision) * Fraction(q, q - 1)
    return total


def primitive_integer_vector(coords: Sequence) -> list[int]:
    """Scale rational coordinates to coprime integers (same projective point)."""
    qs = [rat(c) for c in coords]
    if all(q == 0 for q in qs):
        raise ValueError("projective point with all coordinates zero")
    den = denominator_lcm(qs)
    ints = [int(q * den) for q in qs]
    g = reduce(math.gcd, ints)
    return [v // g for v in ints]


def projective_height(coords: Sequence, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """Absolute logarithmic Weil height of a rational projective point."""
    ints = primitive_integer_vector(coords)
    return BigFloat.log_of(max(abs(v) for v in ints), precision)


def denominator_lcm(values: Iterable) -> int:
    return reduce(math.lcm, (rat(v).denominator for v in values), 1)


# ---------------------------------------------------------------------------
# Rational functions and determinants


class RationalFunction:
    """Quotient ``num / den`` of two Polys in one variable (not reduced)."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = num._like([1])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return RationalFunction(self.num * other.num, self.den * other.den)
        return RationalFunction(self.num * other, self.den)

    __rmul__ = __mul__

    def derivative(self, order: int = 1) -> "RationalFunction":
        f = self
        for _ in range(order):
            f = RationalFunction(
                f.num.derivative() * f.den - f.num * f.den.derivative(), f.den * f.den
            )
        return f

    def __call__(self, value) -> Fraction:
        d = self.den(value)
        if d == 0:
            raise ZeroDivisionError(f"pole at {value}")
        return self.num(value) / d


def det_bareiss(matrix: Sequence[Sequence]):
    """Determinant by fraction-free (Bareiss) elimination.

    Entries may be Fractions, ints or Polys; for Polys every intermediate
    division is exact, which is what keeps the method fraction free.
    """
    a = [list(row) for row in matrix]
    size = len(a)
    if size == 0:
        return Fraction(1)
    if any(len(row) != size for row in a):
        raise ValueError("determinant of a non-square matrix")

    def nonzero(v):
        return not (v.is_zero() if isinstance(v, Poly) else v == 0)

    sign = 1
    prev = Fraction(1)
    for k in range(size - 1):
        pivot_row = next((i for i in range(k, size) if nonzero(a[i][k])), None)
        if pivot_row is None:
            return a[0][0] * 0
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        piv = a[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                val = a[i][j] * piv - a[i][k] * a[k][j]
                a[i][j] = val / prev
            a[i][k] = a[i][k] * 0
        prev = piv
    result = a[size - 1][size - 1]
    return -result if sign < 0 else result


def det_laplace(matrix: Sequence[Sequence]):
    """Cofactor expansion along the first row; a slow, independent oracle."""
    size = len(matrix)
    if size == 0:
        return Fraction(1)
    if size == 1:
        return matrix[0][0]
    total = None
    for j in range(size):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = matrix[0][j] * det_laplace(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total
