import itertools
from fractions import Fraction

import pytest

from kmlab.enumeration import Budget, Estimator
from kmlab.environments import bernoulli, zeros
from kmlab.machine import CopyMachine, V5Machine
from kmlab.predictive import (NoContinuation, PosteriorVector, UndefinedContext,
                              check_monotone, check_semimeasure, dominance_ratio,
                              explicit, from_K, from_km, from_M, normalize, normalized,
                              posterior, posterior_vector, simple_mdl)

V5 = V5Machine(4)
B = Budget(6, 100)


def test_posteriors_v5():
    assert posterior(from_km(V5, B), "000", 1) == 1
    assert posterior(from_M(V5, B), "000", 1) == Fraction(1, 12)
    M = from_M(V5, B)
    assert posterior(M, "", 0) == M("0") / M("")


def test_undefined_context():
    with pytest.raises(UndefinedContext):
        posterior(from_km(V5, B), "11", 0)
    with pytest.raises(UndefinedContext):
        normalize(from_km(V5, B), "11")


def test_normalize_copy():
    m = from_km(CopyMachine(), Budget(12, 100))
    for n in range(5):
        for x in itertools.product((0, 1), repeat=n):
            assert normalize(m, x).values == (Fraction(2, 3), Fraction(1, 3))


def test_normalize_v5_and_uniform():
    assert normalize(from_km(V5, B), "000").values == (Fraction(1, 2),) * 2
    b = explicit(lambda x: 1 if len(x) < 2 else 0)
    assert normalize(b, "0").values == (Fraction(1, 2),) * 2


def test_posterior_vector_validates():
    with pytest.raises(ValueError):
        PosteriorVector((), (Fraction(1, 3), Fraction(1, 3)), True)
    v = posterior_vector(from_M(V5, B), "000")
    assert v.values == (Fraction(11, 12), Fraction(1, 12)) and not v.normalized


def test_semimeasure_checks():
    rep = check_semimeasure(from_km(V5, B), 3)
    assert [v[0] for v in rep.violations] == [(0,), (0, 0)]
    assert rep.violations[1][1:] == (Fraction(2, 16), Fraction(1, 16))
    assert check_semimeasure(from_M(V5, B), 5).ok
    rep = check_semimeasure(bernoulli(Fraction(1, 2)).as_predictive(), 5)
    assert rep.ok and all(g == 0 for g in rep.gaps.values())


def test_semimeasure_gaps_of_M(ref):
    rep = check_semimeasure(from_M(ref, Budget(12, 200)), 4)
    assert rep.ok
    gaps = [rep.gaps[j] for j in range(1, 5)]
    assert gaps == sorted(gaps) and gaps[0] > 0


def test_monotone_checks(ref):
    assert check_monotone(from_km(ref, Budget(12, 200)), 5) == []
    assert check_monotone(from_km(V5, B), 6) == []
    assert check_monotone(explicit(lambda x: 1), 4) == []
    b = Budget(16, 10_000)
    k = from_K(ref, b)
    assert k("0" * 8) > k("0" * 7)


def test_from_K_needs_halting():
    with pytest.raises(ValueError):
        from_K(V5, B)


def test_dominance_ratio():
    m = from_km(V5, Budget(4, 20))
    mu = zeros().as_predictive()
    assert dominance_ratio(m, mu, ["0" * j for j in range(15)]) == Fraction(1, 16)
    assert dominance_ratio(mu, mu, ["0", "00"]) == 1
    with pytest.raises(ValueError):
        dominance_ratio(m, mu, ["1"])


def test_from_K_dominance_decreases(ref):
    k = from_K(ref, Budget(16, 10_000))
    mu = zeros().as_predictive()
    ratios = [dominance_ratio(k, mu, ["0" * j]) for j in range(1, 5)]
    assert ratios == sorted(ratios, reverse=True) and ratios[-1] < ratios[0]


def test_simple_mdl():
    mdl = simple_mdl(V5, B)
    assert mdl("") == 1
    # 0000 is the lexicographically first of the twelve 4-bit programs for 00*
    assert mdl.next_symbol((0, 0)) == 0
    # the empty program is the shortest one for the empty context
    with pytest.raises(NoContinuation):
        mdl((0,))
    lazy = simple_mdl(V5, B, lazy=True)
    assert lazy.next_symbol(()) == 0
    assert posterior(lazy, "00", 0) == 1
    assert lazy("0001") == 0


def test_simple_mdl_is_deterministic_measure(ref):
    mdl = simple_mdl(ref, Budget(14, 500), lazy=True)
    defined = 0
    for n in range(5):
        for x in itertools.product((0, 1), repeat=n):
            try:
                vals = [posterior(mdl, x, a) for a in (0, 1)]
            except (UndefinedContext, NoContinuation):
                continue
            assert sorted(vals) == [0, 1]
            defined += 1
    assert defined >= 5


def test_normalized_is_a_measure():
    nm = normalized(from_km(CopyMachine(), Budget(10, 100)))
    rep = check_semimeasure(nm, 4)
    assert rep.ok and all(g == 0 for g in rep.gaps.values())


def test_memo_is_consistent():
    est = Estimator(V5, B)
    m = from_km(V5, B)
    assert m("000") == Fraction(1, 2 ** est.km("000"))
    assert m("000") is m((0, 0, 0))


def test_negative_values_rejected():
    with pytest.raises(ValueError):
        explicit(lambda x: -1)("0")
