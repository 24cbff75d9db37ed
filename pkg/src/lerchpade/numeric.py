"""High-precision evaluation and numeric cross-checks.

* Phi_s(x, z) at rational |z| < 1 with a rigorous geometric tail bound.
* f_{b,w,x,s}(beta), the Lerch function whose coefficients come from the
  expansion of w(z)/b(z), via partial fractions and via the direct series.
* The remainder estimate |R_{l,i,s}(beta)| versus its analytic upper bound.
* An exhaustive search for small integer linear forms in the values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .criterion import CriterionInput, bracket_term, compute_measure, compute_V
from .exact_core import DEFAULT_PRECISION, BigFloat, Poly, rat, rat_to_str
from .operators import ShiftParam
from .pade import Instance, PadeSystem, remainder_coefficient


# ---------------------------------------------------------------------------
# Phi_s(x, z)


def lerch_tail_bound(x: Fraction, s: int, z: Fraction, K: int) -> Fraction:
    """Bound on |sum_{k > K} z^(k+1) / (k+x+1)^s| for |z| < 1, x >= 0 or s = 0."""
    az = abs(z)
    denom = (K + x + 2) ** s if s else Fraction(1)
    return az ** (K + 2) / (denom * (1 - az))


def _terms_needed(x: Fraction, s: int, z: Fraction, target: Fraction) -> int:
    """Smallest K with tail bound below target (doubling then bisection)."""
    if z == 0:
        return 0
    hi = 1
    while lerch_tail_bound(x, s, z, hi) > target:
        hi *= 2
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if lerch_tail_bound(x, s, z, mid) > target:
            lo = mid + 1
        else:
            hi = mid
    return lo


def eval_lerch(x, s: int, z, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """Phi_s(x, z) = sum_{k >= 0} z^(k+1) / (k+x+1)^s as an enclosing interval."""
    x = ShiftParam.of(x).x
    z = rat(z)
    if abs(z) >= 1:
        raise ValueError("need |z| < 1")
    if s < 0:
        raise ValueError("depth s must be nonnegative")
    if x < 0 and s:
        # tail bound assumes k+x+1 >= 1; shift the first terms out exactly
        raise ValueError("negative shifts are not supported for evaluation")
    work = precision + 16
    if z == 0:
        return BigFloat.zero(precision)
    target = Fraction(1, 2 ** (precision + 4))
    K = _terms_needed(x, s, z, target)
    zf = BigFloat.from_rational(z, work)
    power = zf
    total = BigFloat.zero(work)
    for k in range(K + 1):
        term = power if s == 0 else power / BigFloat.from_rational((k + x + 1) ** s, work)
        total = total + term
        power = power * zf
    tail = lerch_tail_bound(x, s, z, K)
    total = total + BigFloat.from_bounds(-tail, tail, work)
    return total.with_prec(precision)


# ---------------------------------------------------------------------------
# Periodic-coefficient functions


def rational_roots(b: Poly) -> list[Fraction]:
    """All rational roots of b, with multiplicity, by the rational root test."""
    if b.degree < 1:
        return []
    den = math.lcm(*(c.denominator for c in b.coeffs))
    ints = [int(c * den) for c in b.coeffs]
    roots = []
    while ints and ints[0] == 0:
        roots.append(Fraction(0))
        ints = ints[1:]
    if len(ints) <= 1:
        return roots
    a0, an = abs(ints[0]), abs(ints[-1])
    cands = set()
    for pdiv in _divisors(a0):
        for qdiv in _divisors(an):
            cands.add(Fraction(pdiv, qdiv))
            cands.add(Fraction(-pdiv, qdiv))
    poly = Poly(ints, b.var)
    for c in sorted(cands):
        while poly.degree >= 1 and poly(c) == 0:
            roots.append(c)
            poly = poly.exact_div(Poly([-c, 1], b.var))
    return sorted(roots)


def _divisors(n: int) -> list[int]:
    out = []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            out.append(d)
            out.append(n // d)
    return sorted(set(out))


@dataclass(frozen=True)
class PeriodicSpec:
    """b(z) with simple nonzero rational roots and w(z) of lower degree."""

    b: Poly
    w: Poly
    roots: tuple[Fraction, ...] = ()
    gammas: tuple[Fraction, ...] = ()

    def __post_init__(self):
        b = self.b.retag("z")
        w = self.w.retag("z")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "w", w)
        if b.degree < 1:
            raise ValueError("b must have degree at least 1")
        if w.degree >= b.degree:
            raise ValueError("need deg w < deg b")
        roots = rational_roots(b)
        if len(set(roots)) != len(roots):
            raise ValueError("b has a repeated root")
        if len(roots) != b.degree:
            raise ValueError("b must split over Q (only rational roots are supported)")
        if any(r == 0 for r in roots):
            raise ValueError("roots of b must be nonzero")
        object.__setattr__(self, "roots", tuple(roots))
        db = b.derivative()
        object.__setattr__(self, "gammas", tuple(w(r) / db(r) for r in roots))

    @classmethod
    def make(cls, b: Sequence, w: Sequence) -> "PeriodicSpec":
        return cls(Poly(b, "z"), Poly(w, "z"))

    def to_json(self) -> dict:
        return {
            "b": self.b.to_json(),
            "w": self.w.to_json(),
            "roots": [rat_to_str(r) for r in self.roots],
            "gammas": [rat_to_str(g) for g in self.gammas],
        }


def partial_fractions(spec: PeriodicSpec) -> list[Fraction]:
    """gamma_i = w(alpha_i) / b'(alpha_i), so that w/b = sum gamma_i / (z - alpha_i)."""
    return list(spec.gammas)


def expansion_coefficients(spec: PeriodicSpec, count: int) -> list[Fraction]:
    """b_k in w(z)/b(z) = sum_k b_k z^-(k+1), by long division in 1/z."""
    q = spec.b.degree
    lead = spec.b.leading_coefficient()
    # match the z^(q-1-k) coefficient of b(z) * sum_k c_k z^-(k+1) = w(z)
    out: list[Fraction] = []
    for k in range(count):
        acc = spec.w[q - 1 - k] if q - 1 - k >= 0 else Fraction(0)
        for i in range(q):
            idx = k - (q - i)
            if idx >= 0:
                acc -= spec.b[i] * out[idx]
        out.append(acc / lead)
    return out


def eval_periodic(spec: PeriodicSpec, x, s: int, beta, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """f_{b,w,x,s}(beta) = sum (gamma_i / alpha_i) Phi_s(x, alpha_i / beta).

    The factor 1/alpha_i appears because 1/(z - a) = sum a^k z^-(k+1) while
    Phi_s(x, a/z) carries a^(k+1).
    """
    beta = rat(beta)
    total = BigFloat.zero(precision)
    for g, a in zip(spec.gammas, spec.roots):
        total = total + eval_lerch(x, s, a / beta, precision) * (g / a)
    return total


def eval_periodic_series(spec: PeriodicSpec, x, s: int, beta, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """The same value from the expansion coefficients of w/b directly."""
    x = ShiftParam.of(x).x
    beta = rat(beta)
    ratio = max(abs(a / beta) for a in spec.roots)
    if ratio >= 1:
        raise ValueError("need |alpha_i| < |beta| for every root")
    scale = sum(abs(g) for g in spec.gammas)
    target = Fraction(1, 2 ** (precision + 4))
    K = _terms_needed(x, s, ratio, target / max(scale, Fraction(1)))
    coeffs = expansion_coefficients(spec, K + 1)
    work = precision + 16
    inv = BigFloat.from_rational(1 / beta, work)
    power = inv
    total = BigFloat.zero(work)
    for k, c in enumerate(coeffs):
        if c:
            term = power * c
            if s:
                term = term / BigFloat.from_rational((k + x + 1) ** s, work)
            total = total + term
        power = power * inv
    # |b_k| <= sum |gamma_i| |alpha_i|^k, so the tail is bounded through the largest ratio
    tail = scale * lerch_tail_bound(x, s, ratio, K)
    return (total + BigFloat.from_bounds(-tail, tail, work)).with_prec(precision)


# ---------------------------------------------------------------------------
# Remainder estimates


@dataclass
class RemainderCell:
    l: int
    i: int
    j: int
    s: int
    lhs_log_abs_R: float
    rhs_bound: float
    margin: float
    holds: bool
    error_bound: float
    routes_agree: bool

    def to_json(self) -> dict:
        return {
            "l": self.l, "i": self.i, "j": self.j, "s": self.s,
            "log_abs_R": _fmt(self.lhs_log_abs_R), "bound": _fmt(self.rhs_bound),
            "margin": _fmt(self.margin), "holds": self.holds,
            "error_bound": mpmath.nstr(self.error_bound, 3), "routes_agree": self.routes_agree,
        }


def _fmt(v) -> str:
    return mpmath.nstr(mpmath.mpf(v), 15)


@dataclass
class RemainderReport:
    instance: Instance
    beta: Fraction
    passed: bool
    cells: list[RemainderCell] = field(default_factory=list)

    @property
    def min_margin(self):
        return min(c.margin for c in self.cells)

    def to_json(self) -> dict:
        return {
            "instance": self.instance.to_json(),
            "beta": rat_to_str(self.beta),
            "passed": self.passed,
            "min_margin": _fmt(self.min_margin),
            "max_error_bound": mpmath.nstr(max(c.error_bound for c in self.cells), 3),
            "cells": [c.to_json() for c in self.cells],
        }


def remainder_upper_bound(inst: Instance, beta: Fraction, precision: int) -> BigFloat:
    """The analytic bound on log|R_{l,i,s}(beta)| at the archimedean place.

    rho m (n+1) log||alpha|| + (n+1) log(||alpha||/|beta|)
    + log(|beta| / (|beta| - ||alpha||)) + n * bracket; the o(1) inside the
    bracket is taken to be zero.
    """
    na = max(abs(a) for a in inst.alphas)
    ab = abs(beta)
    log = lambda q: BigFloat.log_of(q, precision)  # noqa: E731
    n = inst.n
    return (log(na) * (inst.rho_m * (n + 1)) + log(na / ab) * (n + 1)
            + log(ab / (ab - na)) + bracket_term(inst.rho, inst.m, precision) * n)


def remainder_value(P: Poly, alpha: Fraction, x: Fraction, s: int, n: int, beta: Fraction,
                    precision: int, tolerance: Fraction) -> BigFloat:
    """R(beta) = sum_{k >= n} phi(t^k P) / beta^(k+1): fixed-point prefix plus a tail bound.

    Every coefficient satisfies |phi(t^k P)| <= L |alpha|^k with
    L = sum_e |c_e| |alpha|^(e+1), since k+e+x+1 >= 1.
    """
    ratio = abs(alpha / beta)
    L = sum(abs(c) * abs(alpha) ** (e + 1) for e, c in enumerate(P.coeffs))
    K = n
    # tail after k = K: L |alpha/beta|^(K+1) / (|beta| (1 - ratio))
    while L * ratio ** (K + 1) / (abs(beta) * (1 - ratio)) > tolerance:
        K += 1
    tail = L * ratio ** (K + 1) / (abs(beta) * (1 - ratio))
    # fixed point: every term is floored at scale 2^W, an error below one unit each
    W = precision + 64
    a, q = alpha.numerator, alpha.denominator
    u, v = x.numerator, x.denominator
    bn, bd = beta.numerator, beta.denominator
    terms = [(e, c.numerator, c.denominator) for e, c in enumerate(P.coeffs) if c]
    acc = 0
    count = 0
    for k in range(n, K + 1):
        num_k = bd ** (k + 1) * v**s << W
        den_k = bn ** (k + 1)
        for e, cn, cd in terms:
            num = cn * a ** (e + k + 1) * num_k
            den = cd * q ** (e + k + 1) * ((e + k + 1) * v + u) ** s * den_k
            if den < 0:
                num, den = -num, -den
            acc += num // den
            count += 1
    scale = Fraction(1, 2**W)
    lo = acc * scale - tail
    hi = (acc + count) * scale + tail
    return BigFloat.from_bounds(lo, hi, precision)


def remainder_direct(P: Poly, Pnum: Poly, alpha: Fraction, x: Fraction, s: int, beta: Fraction,
                     precision: int) -> BigFloat:
    """R(beta) = P(beta) Phi_s(x, alpha/beta) - Pnum(beta) at enough precision to absorb cancellation."""
    Pb = P(beta)
    extra = max(abs(Pb), Fraction(1))
    work = precision + extra.numerator.bit_length() - extra.denominator.bit_length() + 32
    phi = eval_lerch(x, s, alpha / beta, work)
    return (phi * Pb - Pnum(beta)).with_prec(precision)


def remainder_bound_check(inst: Instance, beta, precision: int = 256,
                          tolerance: Fraction = Fraction(1, 10**35),
                          system: PadeSystem | None = None, second_route: bool = True) -> RemainderReport:
    beta = rat(beta)
    na = max(abs(a) for a in inst.alphas)
    if na >= abs(beta):
        raise ValueError("need ||alpha|| < |beta|")
    system = system or PadeSystem(inst)
    bound = remainder_upper_bound(inst, beta, precision)
    cells = []
    for l, i, j, s in system.keys():
        P = system.P(l)
        alpha = inst.alpha(i)
        x = inst.x(j)
        R = remainder_value(P, alpha, x, s, inst.n, beta, precision, tolerance)
        absR = abs(R)
        upper = BigFloat.from_bounds(absR.upper, absR.upper, precision)
        if upper.is_positive():
            lhs = upper.log()
            holds = lhs.upper <= bound.lower
            lhs_val = lhs.upper
        else:
            holds = True
            lhs_val = mpmath.mpf("-inf")
        agree = True
        if second_route:
            D = remainder_direct(P, system.Pnum(l, i, j, s), alpha, x, s, beta, precision)
            agree = D.overlaps(R)
        cells.append(RemainderCell(l, i, j, s, lhs_val, bound.mid, bound.lower - lhs_val,
                                   holds, R.error_bound, agree))
    passed = all(c.holds and c.routes_agree for c in cells)
    return RemainderReport(inst, beta, passed, cells)


# ---------------------------------------------------------------------------
# Small linear forms


@dataclass
class LinearFormReport:
    input: CriterionInput
    cap: int
    vectors: int
    minimum: mpmath.mpf
    argmin: tuple[int, ...]
    violations: int
    per_height: list[dict]
    lambda0_reduced: bool
    mu_exponent: mpmath.mpf
    C_constant: mpmath.mpf

    @property
    def passed(self) -> bool:
        return self.minimum > 0 and self.violations == 0

    def to_json(self) -> dict:
        return {
            "input": self.input.to_json(),
            "cap": self.cap,
            "vectors_checked": self.vectors,
            "minimum": mpmath.nstr(self.minimum, 20),
            "argmin": list(self.argmin),
            "violations": self.violations,
            "lambda0_reduced": self.lambda0_reduced,
            "mu_exponent": mpmath.nstr(self.mu_exponent, 15),
            "C_constant": mpmath.nstr(self.C_constant, 15),
            "h0_known": False,
            "per_height": [
                {"height": row["height"], "min_abs_form": mpmath.nstr(row["min"], 15),
                 "bound": mpmath.nstr(row["bound"], 15)}
                for row in self.per_height
            ],
            "passed": self.passed,
        }


def linear_form_values(inp: CriterionInput, precision: int) -> list[BigFloat]:
    """Phi_s(x_j, alpha_i / beta) in the row order (i, j, s)."""
    return [
        eval_lerch(x, s, a / inp.beta, precision)
        for a in inp.alphas
        for x, r in inp.shifts
        for s in range(1, r + 1)
    ]


def linear_form(lams: Sequence[int], thetas: Sequence) -> mpmath.mpf:
    out = mpmath.mpf(lams[0])
    for lam, th in zip(lams[1:], thetas):
        out += lam * th
    return out


def bruteforce_linear_form_min(inp: CriterionInput, cap: int, precision: int = DEFAULT_PRECISION,
                               epsilon=Fraction(1, 2)) -> LinearFormReport:
    """Minimum of |lambda_0 + sum lambda Phi| over nonzero integer vectors with entries in [-cap, cap].

    Each vector is compared to C * H_v0(lambda) * H(lambda)^(-mu); H_v0 is the
    max norm and H divides it by the gcd.  The regime H >= H_0 is unknown, so
    violations are reported, not raised.  When the bound stays below 1/4, only
    the two lambda_0 nearest to -sum lambda Phi can come close, and the rest are skipped.
    """
    if cap < 1 or cap > 50:
        raise ValueError("height cap must be in 1..50")
    if inp.rho_m + 1 > 4:
        raise ValueError("search is limited to rho m + 1 <= 4 numbers")
    report = compute_V(inp)
    if not report.V.is_positive():
        raise ValueError("V must be positive")
    report = compute_measure(inp, epsilon, report)
    mu = report.mu_exponent.mid
    C = report.C_constant.mid
    with mpmath.workprec(precision):
        thetas = [v.mid for v in linear_form_values(inp, precision)]
        k = len(thetas)
        reduce0 = C * cap < mpmath.mpf(1) / 4
        best = None
        best_vec: tuple[int, ...] = ()
        violations = 0
        count = 0
        per_h = {h: mpmath.inf for h in range(1, cap + 1)}
        rng = range(-cap, cap + 1)
        for tail in itertools.product(rng, repeat=k):
            S = linear_form((0, *tail), thetas)
            if reduce0:
                c0 = int(mpmath.floor(-S))
                lam0s = [v for v in (c0, c0 + 1) if -cap <= v <= cap]
            else:
                lam0s = rng
            for lam0 in lam0s:
                vec = (lam0, *tail)
                hv = max(abs(v) for v in vec)
                if hv == 0:
                    continue
                count += 1
                val = abs(lam0 + S)
                g = math.gcd(*vec)
                bound = C * hv * mpmath.mpf(hv // g) ** (-mu)
                if val <= bound:
                    violations += 1
                if best is None or val < best:
                    best, best_vec = val, vec
                if val < per_h[hv]:
                    per_h[hv] = val
        rows = [{"height": h, "min": per_h[h], "bound": C * mpmath.mpf(h) ** (1 - mu)} for h in range(1, cap + 1)]
    if not reduce0:
        count = (2 * cap + 1) ** (k + 1) - 1
    return LinearFormReport(inp, cap, count, best, best_vec, violations, rows, reduce0, mu, C)
