"""The effective linear-independence criterion over Q.

V(alpha, x, beta) > 0 certifies that 1 and the values Phi_s(x_j, alpha_i/beta)
are linearly independent over Q; the measure exponent mu and constant C
quantify it.  All logarithms are carried as :class:`BigFloat` intervals, so
the verdict is only "independent" when V is provably positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact_core import (
    DEFAULT_PRECISION,
    BigFloat,
    _prime_factors,
    bigfloat_sum,
    lcm_dN,
    log_mu,
    projective_height,
    rat,
    rat_to_str,
)
from .operators import ShiftParam

INDEPENDENT = "independent-if-V-positive"
INCONCLUSIVE = "inconclusive"

ARCHIMEDEAN = "archimedean"


class CriterionInputError(ValueError):
    pass


def _abs_at(q: Fraction, place) -> Fraction:
    """|q| at the archimedean place or the normalized p-adic |q|_p."""
    if place == ARCHIMEDEAN:
        return abs(q)
    p = int(place)
    if q == 0:
        return Fraction(0)
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return Fraction(1, p**v) if v >= 0 else Fraction(p ** (-v))


@dataclass(frozen=True)
class CriterionInput:
    """alpha_1..alpha_m, shifts (x_j, r_j) and beta with ||alpha|| < |beta| at v0.

    ``place`` is ``"archimedean"`` or, behind ``experimental=True``, a prime p.
    """

    alphas: tuple[Fraction, ...]
    shifts: tuple[tuple[ShiftParam, int], ...]
    beta: Fraction
    place: object = ARCHIMEDEAN
    precision: int = DEFAULT_PRECISION
    experimental: bool = False

    def __post_init__(self):
        alphas = tuple(rat(a) for a in self.alphas)
        shifts = tuple((ShiftParam.of(x), int(r)) for x, r in self.shifts)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "beta", rat(self.beta))
        if not alphas or any(a == 0 for a in alphas) or len(set(alphas)) != len(alphas):
            raise CriterionInputError("alphas must be nonzero and pairwise distinct")
        if not shifts or any(r < 1 for _, r in shifts):
            raise CriterionInputError("need shifts with positive multiplicities")
        for x, _ in shifts:
            if not 0 <= x.x < 1:
                raise CriterionInputError(f"shift {x.x} is outside [0, 1)")
        xs = [x.x for x, _ in shifts]
        for a in range(len(xs)):
            for b in range(a + 1, len(xs)):
                if (xs[a] - xs[b]).denominator == 1:
                    raise CriterionInputError("shifts must differ by non-integers")
        if self.place != ARCHIMEDEAN:
            if not self.experimental:
                raise CriterionInputError("finite places need the experimental flag")
            p = int(self.place)
            if p < 2 or _prime_factors(p) != [p]:
                raise CriterionInputError(f"place {self.place} is not a prime")
            object.__setattr__(self, "place", p)
        if self.norm_alpha >= self.abs_beta:
            raise CriterionInputError("need ||alpha|| < |beta| at the chosen place")

    @classmethod
    def make(cls, alphas: Sequence, shifts: Sequence, beta, **kw) -> "CriterionInput":
        return cls(tuple(alphas), tuple(tuple(s) for s in shifts), beta, **kw)

    @property
    def m(self) -> int:
        return len(self.alphas)

    @property
    def rho(self) -> int:
        return sum(r for _, r in self.shifts)

    @property
    def rho_m(self) -> int:
        return self.rho * self.m

    @property
    def b(self) -> int:
        return max(x.x.denominator for x, _ in self.shifts)

    @property
    def max_r(self) -> int:
        return max(r for _, r in self.shifts)

    @property
    def abs_beta(self) -> Fraction:
        return _abs_at(self.beta, self.place)

    @property
    def norm_alpha(self) -> Fraction:
        return max(_abs_at(a, self.place) for a in self.alphas)

    @property
    def norm_alpha_beta(self) -> Fraction:
        return max(self.norm_alpha, self.abs_beta)

    @property
    def local_height(self) -> Fraction:
        """exp of h_v0(alpha, beta): the max of 1, |alpha_i|, |beta| at v0."""
        return max(Fraction(1), self.norm_alpha_beta)

    def to_json(self) -> dict:
        return {
            "alphas": [rat_to_str(a) for a in self.alphas],
            "shifts": [{"x": rat_to_str(x.x), "r": r} for x, r in self.shifts],
            "beta": rat_to_str(self.beta),
            "place": self.place if self.place == ARCHIMEDEAN else f"p={self.place}",
            "precision_bits": self.precision,
            "experimental": self.experimental,
        }


def bracket_term(rho: int, m: int, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """rho m log 2 + rho (log(rho m + 1) + rho m log((rho m + 1) / (rho m)))."""
    rm = rho * m
    log = lambda q: BigFloat.log_of(q, precision)  # noqa: E731
    return log(2) * rm + (log(rm + 1) + log(Fraction(rm + 1, rm)) * rm) * rho


def dn_value(shifts: Sequence, rho_m: int, n: int) -> int:
    """D_n = lcm over j of a_j, a_j + b_j, ..., a_j + b_j (rho m (n+1) + 1)."""
    out = 1
    for x, _ in shifts:
        x = ShiftParam.of(x).x
        out = math.lcm(out, lcm_dN(x.numerator, x.denominator, rho_m * (n + 1) + 1))
    return out


def dn_diagnostic(inp: "CriterionInput", ns: Sequence[int] = (200, 400, 800)) -> list[dict]:
    """log D_n / n at finite n, to set beside the bound max r_j * b * rho * m."""
    out = []
    for n in ns:
        D = dn_value(inp.shifts, inp.rho_m, n)
        val = BigFloat.log_of(D, inp.precision) / n
        out.append({"n": n, "log_Dn_over_n": val})
    return out


@dataclass
class CriterionReport:
    input: CriterionInput
    V: BigFloat
    terms: dict[str, BigFloat]
    c_x_v0: BigFloat
    verdict: str
    A: BigFloat | None = None
    U: BigFloat | None = None
    epsilon: Fraction | None = None
    mu_exponent: BigFloat | None = None
    C_constant: BigFloat | None = None
    provenance: dict[str, str] = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def terms_sum(self) -> BigFloat:
        return bigfloat_sum(self.terms.values(), self.input.precision)

    def to_json(self, digits: int = 30) -> dict:
        def enc(v):
            return None if v is None else v.to_json(digits)

        data = {
            "input": self.input.to_json(),
            "V": enc(self.V),
            "verdict": self.verdict,
            "terms": {k: enc(v) for k, v in self.terms.items()},
            "c_x_v0": enc(self.c_x_v0),
            "A": enc(self.A),
            "U": enc(self.U),
            "epsilon": None if self.epsilon is None else rat_to_str(self.epsilon),
            "mu_exponent": enc(self.mu_exponent),
            "C_constant": enc(self.C_constant),
            "provenance": self.provenance,
        }
        if self.diagnostics:
            data["diagnostics"] = [
                {"n": d["n"], "log_Dn_over_n": enc(d["log_Dn_over_n"])} for d in self.diagnostics
            ]
        return data


def _c_x_v0(inp: CriterionInput) -> BigFloat:
    prec = inp.precision
    if inp.place == ARCHIMEDEAN:
        return bracket_term(inp.rho, inp.m, prec)
    # finite place: sum_j r_j log |mu(x_j)|_p^{-1}; mu(x) = prod q^(q/(q-1)) contributes only for q = p
    p = inp.place
    total = BigFloat.zero(prec)
    for x, r in inp.shifts:
        if x.x.denominator % p == 0:
            total = total - BigFloat.log_of(p, prec) * Fraction(p * r, p - 1)
    return total


def compute_V(inp: CriterionInput, diagnostics: bool = False) -> CriterionReport:
    prec = inp.precision
    rm = inp.rho_m
    log = lambda q: BigFloat.log_of(q, prec)  # noqa: E731
    height = projective_height([1, *inp.alphas, inp.beta], prec)
    mu_sum = bigfloat_sum((log_mu(x.x, prec) * r for x, r in inp.shifts), prec)
    terms = {
        "log_abs_beta": log(inp.abs_beta),
        "minus_rho_m_height": -(height * rm),
        "minus_rho_m_log_norm_alpha": -(log(inp.norm_alpha) * rm),
        "plus_rho_m_log_norm_alpha_beta": log(inp.norm_alpha_beta) * rm,
        "minus_sum_r_log_mu": -mu_sum,
        "minus_bracket": -bracket_term(inp.rho, inp.m, prec),
        "minus_max_r_b_rho_m": BigFloat.from_rational(-inp.max_r * inp.b * rm, prec),
    }
    V = bigfloat_sum(terms.values(), prec)
    verdict = INDEPENDENT if V.is_positive() else INCONCLUSIVE
    provenance = {
        "V": "log|beta| - rho m h(1:alpha:beta) - rho m log||alpha|| + rho m log||(alpha,beta)|| "
             "- sum r_j log mu(x_j) - bracket - max r_j * b * rho m",
        "bracket": "rho m log 2 + rho (log(rho m + 1) + rho m log((rho m + 1)/(rho m)))",
        "denominator_limit": "replaced by its upper bound max r_j * b * rho m",
    }
    report = CriterionReport(inp, V, terms, _c_x_v0(inp), verdict, provenance=provenance)
    if diagnostics:
        report.diagnostics = dn_diagnostic(inp)
    return report


def compute_measure(inp: CriterionInput, epsilon, report: CriterionReport | None = None) -> CriterionReport:
    """Add A, U, the exponent mu and the constant C for a given 0 < epsilon < V."""
    prec = inp.precision
    report = report or compute_V(inp)
    eps = rat(epsilon)
    if eps <= 0:
        raise CriterionInputError("epsilon must be positive")
    gap = report.V - eps
    if not gap.is_positive():
        raise CriterionInputError("need epsilon < V (V - epsilon must be provably positive)")
    rm = inp.rho_m
    c = report.c_x_v0
    A = BigFloat.log_of(inp.abs_beta, prec) - BigFloat.log_of(inp.norm_alpha, prec) * (rm + 1) - c
    # at a finite place the denominator limit lim log|D_n|_p / n is 0
    U = BigFloat.log_of(inp.local_height, prec) * rm + c
    mu = (A + U) / gap
    C = (-((BigFloat.log_of(2, prec) / gap + 1) * (A + U))).exp()
    report.A, report.U, report.epsilon = A, U, eps
    report.mu_exponent, report.C_constant = mu, C
    report.provenance.update({
        "A": "log|beta| - (rho m + 1) log||alpha|| - c(x, v0)",
        "U": "rho m h_v0(alpha, beta) + c(x, v0), h_v0 = log max(1, |alpha_i|, |beta|)",
        "mu_exponent": "(A + U) / (V - epsilon)",
        "C_constant": "exp(-(log 2 / (V - epsilon) + 1)(A + U))",
    })
    return report


# ---------------------------------------------------------------------------
# The worked example with g, p, q


PUBLISHED_TABLES: dict[int, dict[int, tuple[int, int, int, int]]] = {
    2: {2: (3158, 5816, 8449, 11072), 3: (4509, 8466, 12398, 16320),
        5: (7192, 13748, 20278, 26798), 7: (9868, 19021, 28150, 37268)},
    3: {2: (4427, 8104, 11744, 15368), 3: (6298, 11769, 17202, 22620),
        5: (10013, 19071, 28092, 37097), 7: (13717, 26362, 38969, 51562)},
    4: {2: (5695, 10391, 15038, 19664), 3: (8087, 15071, 22006, 28920),
        5: (12834, 24394, 35905, 47395), 7: (17565, 33702, 49789, 65855)},
    5: {2: (6964, 12679, 18332, 23960), 3: (9876, 18374, 26809, 35219),
        5: (15655, 29718, 43719, 57694), 7: (21414, 41042, 60608, 80148)},
    6: {2: (8233, 14967, 21627, 28256), 3: (11665, 21676, 31613, 41519),
        5: (18476, 35041, 51532, 67992), 7: (25263, 48382, 71427, 94441)},
}

TABLE_PRIMES = (2, 3, 5, 7)
TABLE_QS = (1, 2, 3, 4)


def published_table_value(g: int, p: int, q: int) -> int:
    return PUBLISHED_TABLES[g][p][q - 1]


def example_subtrahends(g: int, p: int, q: int, precision: int = DEFAULT_PRECISION) -> dict[str, BigFloat]:
    """The four quantities subtracted from (1/g) log|beta_M| in the example's lower bound for V."""
    if g < 2 or q < 1 or _prime_factors(p) != [p]:
        raise ValueError("need g >= 2, p prime, q >= 1")
    log = lambda v: BigFloat.log_of(v, precision)  # noqa: E731
    N = 100 * p * q
    return {
        "heights": (log(2) * (g - 1) + log(2520)) * Fraction(N, g),
        "mu": log(p) * (10 * p),
        "bracket": log(2) * N + (log(N + 1) + log(Fraction(N + 1, N)) * N) * 100,
        "denominators": BigFloat.from_rational(1000 * p * q, precision),
    }


def example6_threshold(g: int, p: int, q: int, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """Smallest log|beta_M| making the example's lower bound for V positive.

    The bound reads (1/g) log|beta_M| - S, so the threshold is g * S.
    """
    return bigfloat_sum(example_subtrahends(g, p, q, precision).values(), precision) * g


def table_rows(precision: int = DEFAULT_PRECISION) -> list[dict]:
    rows = []
    for g in sorted(PUBLISHED_TABLES):
        for p in TABLE_PRIMES:
            for q in TABLE_QS:
                T = example6_threshold(g, p, q, precision)
                published = published_table_value(g, p, q)
                rows.append({"g": g, "p": p, "q": q, "paper_value": published,
                             "computed_threshold": T, "difference": T - published})
    return rows


def table_emit(precision: int = DEFAULT_PRECISION, digits: int = 12) -> str:
    """CSV with one row per (g, p, q) cell of the five tables."""
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["g", "p", "q", "paper_value", "computed_threshold", "difference", "error_bound"])
    for row in table_rows(precision):
        T = row["computed_threshold"]
        writer.writerow([row["g"], row["p"], row["q"], row["paper_value"], T.to_str(digits),
                         row["difference"].to_str(digits), _fmt_err(T)])
    return buf.getvalue()


def _fmt_err(x: BigFloat) -> str:
    import mpmath

    return mpmath.nstr(x.error_bound, 3)
