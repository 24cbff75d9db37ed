"""Type-II Padé approximants for the Lerch family Phi_s(x_j, alpha_i / z).

For ``0 <= l <= rho*m``::

    A_l(t)      = t^l * prod_i (t - alpha_i)^(rho*n)
    P_l(z)      = (S_{n,x_1}^(r_1) o ... o S_{n,x_d}^(r_d))(A_l) with t -> z
    P_l,i,s(z)  = phi_{alpha_i,x_j,s}((P_l(z) - P_l(t)) / (z - t))

and the remainder ``P_l(z) Phi_s(x_j, alpha_i/z) - P_l,i,s(z)`` has
``z^-(k+1)`` coefficient ``phi_{alpha_i,x_j,s}(t^k P_l)``, which vanishes for
``k < n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .exact_core import Poly, TruncatedSeries, poly_from_roots, rat, rat_to_str
from .operators import ShiftParam, apply_S, phi_coefficients


class InvalidInstanceError(ValueError):
    pass


class OrderVerificationError(AssertionError):
    """Raised with the first violated cell; ``violation`` holds its details."""

    def __init__(self, message: str, violation: dict):
        super().__init__(message)
        self.violation = violation


@dataclass(frozen=True)
class Instance:
    """Points alpha_1..alpha_m, shifts (x_j, r_j) and the Padé index n."""

    alphas: tuple[Fraction, ...]
    shifts: tuple[tuple[ShiftParam, int], ...]
    n: int

    def __post_init__(self):
        alphas = tuple(rat(a) for a in self.alphas)
        shifts = tuple((ShiftParam.of(x), int(r)) for x, r in self.shifts)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "shifts", shifts)
        if not alphas:
            raise InvalidInstanceError("need at least one alpha")
        if any(a == 0 for a in alphas):
            raise InvalidInstanceError("alphas must be nonzero")
        if len(set(alphas)) != len(alphas):
            raise InvalidInstanceError("alphas must be pairwise distinct")
        if not shifts:
            raise InvalidInstanceError("need at least one shift")
        for x, r in shifts:
            if r < 1:
                raise InvalidInstanceError(f"multiplicity r must be positive, got {r}")
            if not 0 <= x.x < 1:
                raise InvalidInstanceError(f"shift {x.x} is outside [0, 1)")
        xs = [x.x for x, _ in shifts]
        for a in range(len(xs)):
            for b in range(a + 1, len(xs)):
                if (xs[a] - xs[b]).denominator == 1:
                    raise InvalidInstanceError(f"shifts {xs[a]} and {xs[b]} differ by an integer")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidInstanceError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def make(cls, alphas: Sequence, shifts: Sequence, n: int) -> "Instance":
        return cls(tuple(alphas), tuple(tuple(s) for s in shifts), n)

    @property
    def m(self) -> int:
        return len(self.alphas)

    @property
    def d(self) -> int:
        return len(self.shifts)

    @property
    def rho(self) -> int:
        return sum(r for _, r in self.shifts)

    @property
    def rho_m(self) -> int:
        return self.rho * self.m

    def cells(self) -> list[tuple[int, int, int]]:
        """Row labels (i, j, s), 1-based, in lexicographic order."""
        return [
            (i, j, s)
            for i in range(1, self.m + 1)
            for j in range(1, self.d + 1)
            for s in range(1, self.shifts[j - 1][1] + 1)
        ]

    def alpha(self, i: int) -> Fraction:
        return self.alphas[i - 1]

    def x(self, j: int) -> Fraction:
        return self.shifts[j - 1][0].x

    def to_json(self) -> dict:
        return {
            "alphas": [rat_to_str(a) for a in self.alphas],
            "shifts": [{"x": rat_to_str(x.x), "r": r} for x, r in self.shifts],
            "n": self.n,
            "rho": self.rho,
            "m": self.m,
        }


def _check_l(l: int, inst: Instance):
    if not 0 <= l <= inst.rho_m:
        raise ValueError(f"l={l} outside 0..{inst.rho_m}")


def build_A(l: int, inst: Instance) -> Poly:
    _check_l(l, inst)
    base = poly_from_roots(inst.alphas, inst.rho * inst.n)
    return Poly([0] * l + base, "t")


def apply_P_operator(p: Poly, inst: Instance) -> Poly:
    """The composite of S_{n,x_j}^(r_j) over all shifts."""
    for x, r in inst.shifts:
        for _ in range(r):
            p = apply_S(inst.n, x, p)
    return p


def build_P(l: int, inst: Instance) -> Poly:
    return apply_P_operator(build_A(l, inst), inst).retag("z")


def difference_quotient(p: Poly) -> list[Poly]:
    """``(p(z) - p(t)) / (z - t)`` as t-coefficients that are Polys in z.

    Entry b is ``sum_{k > b} p_k z^(k-1-b)``.
    """
    cs = p.coeffs
    return [Poly(cs[b + 1:], "z") for b in range(len(cs) - 1)]


def build_P_lis(l: int, i: int, j: int, s: int, inst: Instance, P: Poly | None = None) -> Poly:
    _check_l(l, inst)
    if (i, j, s) not in inst.cells():
        raise ValueError(f"cell {(i, j, s)} out of range")
    if P is None:
        P = build_P(l, inst)
    value = phi_coefficients(inst.alpha(i), inst.x(j), s, difference_quotient(P))
    if isinstance(value, Poly):
        return value
    return Poly([value], "z")


def remainder_coefficient(k: int, alpha, x, s: int, P: Poly) -> Fraction:
    """``phi_{alpha,x,s}(t^k P)``, the coefficient of z^-(k+1) in the remainder."""
    x = ShiftParam.of(x).x
    total = Fraction(0)
    power = alpha ** (k + 1)
    for e, c in enumerate(P.coeffs):
        if c:
            total += c * power / (e + k + x + 1) ** s
        power *= alpha
    return total


def remainder_series(l: int, i: int, j: int, s: int, inst: Instance, terms: int | None = None,
                     P: Poly | None = None) -> TruncatedSeries:
    """Coefficients of z^-1 .. z^-terms of R_{l,i,s}."""
    if terms is None:
        terms = inst.n + inst.rho_m + 4
    if terms < inst.n + 2:
        raise ValueError(f"need at least n+2 = {inst.n + 2} terms")
    if P is None:
        P = build_P(l, inst)
    coeffs = [remainder_coefficient(k, inst.alpha(i), inst.x(j), s, P) for k in range(terms)]
    return TruncatedSeries(1, tuple(coeffs))


@dataclass
class PadeSystem:
    """All approximants of one instance, built lazily and cached."""

    instance: Instance
    _P: dict = field(default_factory=dict, repr=False)
    _Pnum: dict = field(default_factory=dict, repr=False)

    def P(self, l: int) -> Poly:
        if l not in self._P:
            self._P[l] = build_P(l, self.instance)
        return self._P[l]

    def Pnum(self, l: int, i: int, j: int, s: int) -> Poly:
        key = (l, i, j, s)
        if key not in self._Pnum:
            self._Pnum[key] = build_P_lis(l, i, j, s, self.instance, P=self.P(l))
        return self._Pnum[key]

    def remainder(self, l: int, i: int, j: int, s: int, terms: int | None = None) -> TruncatedSeries:
        return remainder_series(l, i, j, s, self.instance, terms, P=self.P(l))

    def keys(self) -> Iterator[tuple[int, int, int, int]]:
        for l in range(self.instance.rho_m + 1):
            for i, j, s in self.instance.cells():
                yield l, i, j, s

    def to_json(self, terms: int | None = None) -> dict:
        inst = self.instance
        return {
            "instance": inst.to_json(),
            "P": [self.P(l).to_json() for l in range(inst.rho_m + 1)],
            "Pnum": [
                {"l": l, "i": i, "j": j, "s": s, "poly": self.Pnum(l, i, j, s).to_json()}
                for l, i, j, s in self.keys()
            ],
            "remainders": [
                {"l": l, "i": i, "j": j, "s": s, **self.remainder(l, i, j, s, terms).to_json()}
                for l, i, j, s in self.keys()
            ],
        }


def _laurent_residual(P: Poly, Pnum: Poly, alpha, x, s: int, depth: int) -> dict[int, Fraction]:
    """Coefficients of ``P(z) Phi_s(x, alpha/z) - Pnum(z)`` for z^e, -depth <= e <= deg P - 1.

    Built by multiplying P against the Phi series term by term, independent
    of the closed remainder formula.
    """
    series = [alpha ** (k + 1) / (k + x + 1) ** s for k in range(P.degree + depth + 1)]
    out = {}
    for e in range(-depth, P.degree):
        acc = Fraction(0)
        for jdx, c in enumerate(P.coeffs):
            k = jdx - e - 1
            if k >= 0 and c:
                acc += c * series[k]
        if e >= 0:
            acc -= Pnum[e]
        out[e] = acc
    return out


@dataclass
class OrderReport:
    instance: Instance
    passed: bool
    min_order: int
    degree_ok: bool
    cells_checked: int
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "instance": self.instance.to_json(),
            "passed": self.passed,
            "required_order": self.instance.n + 1,
            "min_order": self.min_order,
            "degree_ok": self.degree_ok,
            "cells_checked": self.cells_checked,
            "failures": self.failures,
        }


def verify_order(inst: Instance, system: PadeSystem | None = None, raise_on_failure: bool = True) -> OrderReport:
    """Check degrees and the order of every remainder exactly.

    The polynomial part of the product must cancel against P_l,i,s and the
    coefficients of z^-1..z^-n must vanish.  The observed order (first
    nonzero coefficient) is read from the remainder series.
    """
    system = system or PadeSystem(inst)
    n = inst.n
    failures = []
    degree_ok = True
    min_order = None
    count = 0
    for l in range(inst.rho_m + 1):
        P = system.P(l)
        want = inst.rho_m * n + l
        if P.degree != want:
            degree_ok = False
            failures.append({"kind": "degree", "l": l, "expected": want, "got": P.degree})
        for i, j, s in inst.cells():
            count += 1
            Pnum = system.Pnum(l, i, j, s)
            if Pnum.degree > want:
                degree_ok = False
                failures.append({"kind": "numerator-degree", "l": l, "i": i, "j": j, "s": s,
                                 "bound": want, "got": Pnum.degree})
            resid = _laurent_residual(P, Pnum, inst.alpha(i), inst.x(j), s, n)
            bad = next((e for e in sorted(resid, reverse=True) if resid[e] != 0), None)
            if bad is not None:
                failures.append({"kind": "order", "l": l, "i": i, "j": j, "s": s,
                                 "k": -bad - 1, "coefficient": rat_to_str(resid[bad])})
            series = system.remainder(l, i, j, s)
            order = series.ord_inf()
            if order is not None:
                min_order = order if min_order is None else min(min_order, order)
    passed = not failures
    report = OrderReport(inst, passed, min_order if min_order is not None else -1, degree_ok, count, failures)
    if not passed and raise_on_failure:
        first = failures[0]
        raise OrderVerificationError(f"order/degree check failed: {first}", first)
    return report
