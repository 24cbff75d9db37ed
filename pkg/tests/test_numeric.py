import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lerchpade.criterion import CriterionInput
from lerchpade.exact_core import Poly
from lerchpade.numeric import (
    PeriodicSpec, bruteforce_linear_form_min, eval_lerch, eval_periodic, eval_periodic_series,
    expansion_coefficients, linear_form, linear_form_values, partial_fractions, rational_roots,
    remainder_bound_check,
)
from lerchpade.pade import Instance


def lerch_oracle(x, s, z, prec):
    # mpmath's lerchphi(z, s, a) = sum z^k / (k + a)^s
    with mpmath.workprec(prec + 40):
        zz = mpmath.mpf(z.numerator) / z.denominator
        return zz * mpmath.lerchphi(zz, s, mpmath.mpf(x.numerator) / x.denominator + 1)


def test_lerch_at_zero():
    assert eval_lerch(0, 1, 0).contains(0)


@pytest.mark.parametrize("x, s, z", [
    (Fraction(0), 1, Fraction(1, 2)),
    (Fraction(1, 3), 2, Fraction(-2, 3)),
    (Fraction(1, 2), 3, Fraction(9, 10)),
    (Fraction(2, 3), 1, Fraction(-1, 7)),
])
def test_lerch_against_library_oracle(x, s, z):
    value = eval_lerch(x, s, z, 200)
    with mpmath.workprec(260):
        assert value.contains(lerch_oracle(x, s, z, 200))
    assert value.error_bound < mpmath.mpf(2) ** -190


def test_lerch_known_constants_to_fifty_digits():
    with mpmath.workprec(400):
        log2 = mpmath.log(2)
        li2 = mpmath.pi**2 / 12 - log2**2 / 2
        one = eval_lerch(0, 1, Fraction(1, 2), 256)
        two = eval_lerch(0, 2, Fraction(1, 2), 256)
        assert abs(one.mid - log2) < mpmath.mpf(10) ** -50
        assert abs(two.mid - li2) < mpmath.mpf(10) ** -50


@pytest.mark.parametrize("z", [Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3), Fraction(-1, 3), Fraction(9, 10)])
def test_lerch_depth_one_is_a_logarithm(z):
    value = eval_lerch(0, 1, z, 160)
    with mpmath.workprec(300):
        assert value.contains(-mpmath.log(1 - mpmath.mpf(z.numerator) / z.denominator))


@pytest.mark.parametrize("x, s, z", list(itertools.product(
    (Fraction(0), Fraction(1, 3), Fraction(5, 2)), (0, 1, 3), (Fraction(1, 2), Fraction(-4, 5), Fraction(1, 10)))))
def test_error_bounds_are_sound_under_refinement(x, s, z):
    coarse = eval_lerch(x, s, z, 64)
    fine = eval_lerch(x, s, z, 128)
    assert coarse.contains(fine.mid)
    assert coarse.lower <= fine.lower and fine.upper <= coarse.upper


def test_lerch_rejects_unit_disc_boundary():
    with pytest.raises(ValueError):
        eval_lerch(0, 1, 1)
    with pytest.raises(ValueError):
        eval_lerch(0, 1, Fraction(-3, 2))


def test_partial_fraction_examples():
    spec = PeriodicSpec.make([-1, 0, 1], [1])
    gam = dict(zip(spec.roots, partial_fractions(spec)))
    assert gam == {Fraction(1): Fraction(1, 2), Fraction(-1): Fraction(-1, 2)}
    spec = PeriodicSpec.make([-1, 0, 1], [0, 1])
    assert dict(zip(spec.roots, spec.gammas)) == {Fraction(1): Fraction(1, 2), Fraction(-1): Fraction(1, 2)}


@pytest.mark.parametrize("b, w", [
    ([1, -2, 1], [1]),      # repeated root
    ([-2, 0, 1], [1]),      # irrational roots
    ([0, -1, 1], [1]),      # zero root
    ([-1, 1], [1, 1]),      # deg w >= deg b
])
def test_periodic_spec_validation(b, w):
    with pytest.raises(ValueError):
        PeriodicSpec.make(b, w)


def test_rational_roots():
    assert rational_roots(Poly.from_roots([Fraction(2, 3), Fraction(-5), Fraction(1, 4)], var="z")) == [
        Fraction(-5), Fraction(1, 4), Fraction(2, 3)]


roots_strategy = st.lists(st.fractions(min_value=-6, max_value=6, max_denominator=4).filter(lambda q: q != 0),
                          min_size=1, max_size=4, unique=True)


@given(roots_strategy, st.data())
def test_partial_fractions_recombine(roots, data):
    b = Poly.from_roots(roots, var="z")
    w = Poly(data.draw(st.lists(st.integers(-9, 9), max_size=len(roots))), "z")
    spec = PeriodicSpec(b, w)
    total = Poly([], "z")
    for g, a in zip(spec.gammas, spec.roots):
        total = total + b.exact_div(Poly([-a, 1], "z")) * g
    assert total == w


@given(roots_strategy, st.data())
def test_depth_zero_is_the_rational_function(roots, data):
    b = Poly.from_roots(roots, var="z")
    w = Poly(data.draw(st.lists(st.integers(-9, 9), max_size=len(roots))), "z")
    spec = PeriodicSpec(b, w)
    beta = Fraction(20)
    want = w(beta) / b(beta)
    assert eval_periodic(spec, Fraction(1, 3), 0, beta, 96).contains(want)
    assert eval_periodic_series(spec, Fraction(1, 3), 0, beta, 96).contains(want)


@pytest.mark.parametrize("a1, a2", [(3, 5), (1, -1), (Fraction(1, 2), 7)])
def test_two_periodic_recovery(a1, a2):
    spec = PeriodicSpec.make([-1, 0, 1], [a2, a1])
    coeffs = expansion_coefficients(spec, 30)
    assert coeffs == [a1 if k % 2 == 0 else a2 for k in range(30)]
    x, s, beta = Fraction(1, 3), 2, Fraction(7)
    with mpmath.workprec(300):
        amp = [mpmath.mpf(Fraction(a).numerator) / Fraction(a).denominator for a in (a1, a2)]
        brute = mpmath.fsum(amp[k % 2] / (7 ** (k + 1) * (k + mpmath.mpf(1) / 3 + 1) ** s) for k in range(400))
        pf = eval_periodic(spec, x, s, beta, 200)
        ds = eval_periodic_series(spec, x, s, beta, 200)
        assert pf.contains(brute) and ds.contains(brute)


def test_remainder_bound_example():
    rep = remainder_bound_check(Instance.make([1, Fraction(-1, 2)], [(Fraction(1, 3), 2)], 2), 10)
    assert rep.passed
    assert all(c.routes_agree and c.holds for c in rep.cells)
    assert max(c.error_bound for c in rep.cells) < mpmath.mpf(10) ** -30
    assert rep.to_json()["passed"] is True


def test_remainder_bound_needs_beta_outside_the_points():
    with pytest.raises(ValueError):
        remainder_bound_check(Instance.make([1, 3], [(0, 1)], 1), 2)


def test_linear_form_is_linear():
    thetas = [mpmath.mpf(1) / 3, mpmath.sqrt(2)]
    lam = (4, -3, 5)
    assert linear_form([2 * v for v in lam], thetas) == 2 * linear_form(lam, thetas)


def test_bruteforce_minimum_matches_direct_enumeration():
    inp = CriterionInput.make([1], [(0, 1)], 100)
    cap = 6
    rep = bruteforce_linear_form_min(inp, cap)
    theta = linear_form_values(inp, 128)[0].mid
    with mpmath.workprec(128):
        direct = min(abs(a + b * theta) for a in range(-cap, cap + 1) for b in range(-cap, cap + 1) if (a, b) != (0, 0))
        assert abs(rep.minimum - direct) < mpmath.mpf(10) ** -30
    assert rep.passed and rep.violations == 0
    assert len(rep.per_height) == cap


def test_bruteforce_limits():
    inp = CriterionInput.make([1], [(0, 1)], 100)
    with pytest.raises(ValueError):
        bruteforce_linear_form_min(inp, 51)
    with pytest.raises(ValueError):
        bruteforce_linear_form_min(CriterionInput.make([1], [(0, 1)], 10), 3)
