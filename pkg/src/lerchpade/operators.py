"""Shifted divided derivatives, formal primitives and kernel maps on K[t].

Every operator here is diagonal on the monomial basis, so each is applied by
rescaling coefficients:

* ``S_{n,x}``:  t^k -> (k+x+1)_n / n! * t^k
* ``Deri_x``:   t^k -> (k+x+1) t^k          (= S_{1,x})
* ``Prim_x``:   t^k -> t^k / (k+x+1)        (inverse of Deri_x)
* ``phi_{a,x,s}``: t^k -> a^(k+1) / (k+x+1)^s   (a linear form, not a map to K[t])
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .exact_core import Poly, rat, rising_factorial


@dataclass(frozen=True, order=True)
class ShiftParam:
    """A shift x that is not a negative integer, so k+x+1 never vanishes for k >= 0."""

    x: Fraction

    def __post_init__(self):
        x = rat(self.x)
        if x.denominator == 1 and x < 0:
            raise ValueError(f"shift {x} is a negative integer")
        object.__setattr__(self, "x", x)

    @classmethod
    def of(cls, value) -> "ShiftParam":
        return value if isinstance(value, ShiftParam) else cls(rat(value))

    def __str__(self):
        return str(self.x)


def _scale(p: Poly, factor: Callable[[int], Fraction]) -> Poly:
    return Poly([c * factor(k) for k, c in enumerate(p.coeffs)], p.var)


def apply_S(n: int, x, p: Poly) -> Poly:
    if n < 0:
        raise ValueError("S_{n,x} needs n >= 0")
    if n == 0:
        return p
    x = ShiftParam.of(x).x
    nf = math.factorial(n)
    return _scale(p, lambda k: rising_factorial(k + x + 1, n) / nf)


def apply_deri(x, p: Poly) -> Poly:
    x = ShiftParam.of(x).x
    return _scale(p, lambda k: k + x + 1)


def apply_prim(x, p: Poly) -> Poly:
    x = ShiftParam.of(x).x
    return _scale(p, lambda k: 1 / (k + x + 1))


def apply_power(op: Callable[[Poly], Poly], times: int, p: Poly) -> Poly:
    for _ in range(times):
        p = op(p)
    return p


def phi_coefficients(alpha, x, s: int, coeffs: Sequence):
    """``sum_k coeffs[k] * alpha**(k+1) / (k+x+1)**s`` over any coefficient ring.

    ``coeffs`` may hold Fractions or Polys (for the difference quotient, where
    z rides along as a scalar); ``alpha`` may be a Fraction or an EpsPoly.
    """
    x = ShiftParam.of(x).x
    if s < 0:
        raise ValueError("depth s must be nonnegative")
    total = None
    power = alpha
    for k, c in enumerate(coeffs):
        if not _is_zero(c):
            term = c * power
            if s:
                term = term / (k + x + 1) ** s
            total = term if total is None else total + term
        power = power * alpha
    if total is None:
        return Fraction(0)
    return total


def _is_zero(c) -> bool:
    if isinstance(c, Poly):
        return c.is_zero()
    return c == 0


def apply_phi(alpha, x, s: int, p: Poly) -> Fraction:
    """The kernel map phi_{alpha,x,s} on a polynomial in t."""
    if rat(alpha) == 0:
        raise ValueError("alpha must be nonzero")
    return phi_coefficients(rat(alpha), x, s, p.coeffs)


def key1_coefficients(n: int, m: int, x) -> list[Fraction]:
    """Solve ``[t^m] o S_{n,x} = sum_l b_l S_{1,x}^(l) o [t^m]`` for b_0..b_n.

    Both sides are applied to t^k for k = 0..n and the resulting square system
    (a Vandermonde system in the eigenvalues k+m+x+1) is solved exactly.
    """
    x = ShiftParam.of(x).x
    nf = math.factorial(n)
    rows = []
    rhs = []
    for k in range(n + 1):
        eig = k + m + x + 1
        rows.append([eig**l for l in range(n + 1)])
        rhs.append(rising_factorial(k + x + 1, n) / nf)
    return solve_linear(rows, rhs)


def solve_linear(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """Exact Gauss-Jordan solve of a nonsingular square system."""
    size = len(matrix)
    a = [list(map(rat, row)) + [rat(b)] for row, b in zip(matrix, rhs)]
    for col in range(size):
        piv = next((r for r in range(col, size) if a[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(size):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][size] for r in range(size)]
