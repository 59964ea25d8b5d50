import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from translen.brooks import (
    CombinationSpec,
    EmptyPattern,
    bbf_family_word,
    brooks,
    combine,
    count_disjoint,
    count_disjoint_bruteforce,
    defect_sample,
    homogenize,
    pullback,
    random_reduced_word,
    random_word_pairs,
)
from translen.extension import CentralExtension, zero_cocycle
from translen.groups import FreeGroup, FreeWord, LatticeGroup, power, reduce

F2 = FreeGroup(2)


def all_reduced_words(max_len, alphabet=(1, -1, 2, -2)):
    out = [FreeWord(())]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for s in alphabet:
                if w and w[-1] == -s:
                    continue
                nxt.append(w + (s,))
        out.extend(FreeWord(w) for w in nxt)
        frontier = nxt
    return out


def test_count_disjoint_examples():
    ab = F2.parse("ab")
    assert count_disjoint(ab, F2.parse("abab")) == 2
    assert count_disjoint(ab, F2.identity) == 0
    assert count_disjoint(F2.parse("aa"), F2.parse("aaa")) == 1
    with pytest.raises(EmptyPattern):
        count_disjoint(F2.identity, ab)


def test_greedy_equals_bruteforce_exhaustive_small():
    patterns = [w for w in all_reduced_words(3) if len(w.letters) >= 1 and w.cyclically_reduced]
    texts = all_reduced_words(6)
    for w in patterns:
        for x in texts:
            assert count_disjoint(w, x) == count_disjoint_bruteforce(w, x)


def test_greedy_equals_bruteforce_boundary_sizes():
    rng = random.Random(17)
    for _ in range(400):
        while True:
            w = random_reduced_word(2, rng.randint(1, 6), rng)
            if w.cyclically_reduced:
                break
        x = random_reduced_word(2, rng.randint(0, 20), rng)
        assert count_disjoint(w, x) == count_disjoint_bruteforce(w, x)


def test_brooks_identity_zero():
    assert brooks(F2.parse("ab")).evaluate(F2.identity) == 0


def test_brooks_rejects_non_cyclically_reduced():
    with pytest.raises(ValueError):
        brooks(F2.parse("aba^-1"))


def test_bbf_family_counts():
    """h_{g_i}(g_i^n) = n and h_{g_i}(g_j^n) = 0 for the (a^i b^i)^101 family."""
    words = {i: bbf_family_word(i) for i in (1, 2, 3)}
    qs = {i: brooks(words[i]) for i in words}
    for i, j in itertools.product((1, 2, 3), repeat=2):
        for n in range(1, 6):
            value = qs[i].evaluate(power(F2, words[j], n))
            assert value == (n if i == j else 0)


@settings(derandomize=True, max_examples=150)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=30))
def test_brooks_antisymmetry(ls):
    x = reduce(ls)
    q = brooks(F2.parse("ab"))
    assert q.evaluate(F2.invert(x)) == -q.evaluate(x)


def test_homogenize_homomorphism_exact():
    from translen.brooks import Quasimorphism

    hom = Quasimorphism(lambda g: Fraction(sum(g)), Fraction(0), "coord-sum")
    Z2 = LatticeGroup(2)
    hv = homogenize(hom, Z2, (2, 1), 7)
    assert hv.center == 3 and hv.radius == 0


def test_homogenize_brooks_ab():
    q = brooks(F2.parse("ab"))
    g = F2.parse("ab")
    for n in (1, 2, 5, 16):
        hv = homogenize(q, F2, g, n)
        assert hv.center == 1
        assert hv.radius == Fraction(2, n)


def test_homogenize_interval_nesting():
    q = brooks(F2.parse("ab"))
    g = F2.parse("ba")
    for k in range(1, 5):
        n = 2**k
        a = homogenize(q, F2, g, n)
        b = homogenize(q, F2, g, 2 * n)
        assert abs(a.center - b.center) <= Fraction(3, 1) * q.defect_bound / (2 * n)


def test_homogeneity_of_limits():
    q = brooks(F2.parse("ab"))
    g = F2.parse("ab")
    for k in (2, 3, 4):
        hv_k = homogenize(q, F2, power(F2, g, k), 8)
        hv_1 = homogenize(q, F2, g, 8 * k)
        assert hv_1.lower <= hv_k.center / k <= hv_1.upper


def test_defect_sample_homomorphism_zero():
    from translen.brooks import Quasimorphism

    Z2 = LatticeGroup(2)
    hom = Quasimorphism(lambda g: Fraction(g[0]), Fraction(0), "first")
    pairs = [((1, 2), (3, -1)), ((0, 0), (5, 5))]
    assert defect_sample(hom, pairs, Z2) == 0


def test_defect_sample_brooks_bounded():
    q = brooks(F2.parse("ab"))
    pairs = random_word_pairs(2, 1500, 40, seed=3)
    d = defect_sample(q, pairs, F2)
    assert d <= q.defect_bound == 2


def test_defect_sample_scaling():
    q = brooks(F2.parse("ab"))
    lam = Fraction(3, 7)
    scaled = combine(CombinationSpec(((lam, F2.parse("ab")),)))
    pairs = random_word_pairs(2, 300, 24, seed=4)
    assert defect_sample(scaled, pairs, F2) == lam * defect_sample(q, pairs, F2)


def test_combine_single_term_is_brooks():
    w = F2.parse("ab")
    single = combine(CombinationSpec(((Fraction(1), w),)))
    q = brooks(w)
    for x in all_reduced_words(5):
        assert single.evaluate(x) == q.evaluate(x)


def test_combine_orthogonal_family():
    terms = tuple((Fraction(1, 2**i), bbf_family_word(i)) for i in (1, 2, 3))
    spec = CombinationSpec(terms)
    p_f = combine(spec)
    assert p_f.defect_bound == 2 * spec.weight_sum
    g2 = bbf_family_word(2)
    for n in (1, 2, 3):
        assert p_f.evaluate(power(F2, g2, n)) == Fraction(n, 4)


def test_combine_defect_sample_within_bound():
    spec = CombinationSpec(((Fraction(1, 2), F2.parse("ab")), (Fraction(1, 4), F2.parse("abab"))))
    p_f = combine(spec)
    pairs = random_word_pairs(2, 800, 30, seed=5)
    assert defect_sample(p_f, pairs, F2) <= p_f.defect_bound


def test_combination_spec_validation():
    with pytest.raises(ValueError):
        CombinationSpec(((Fraction(0), F2.parse("ab")),))
    with pytest.raises(ValueError):
        CombinationSpec(((Fraction(1), F2.parse("aba^-1")),))


def test_pullback_along_extension_projection():
    from translen.brooks import Quasimorphism

    base = LatticeGroup(1)
    ext = CentralExtension(zero_cocycle(base))
    ident = Quasimorphism(lambda g: Fraction(g[0]), Fraction(0), "id")
    pulled = pullback(ident, ext.phi)
    assert pulled.evaluate(((5,), -3)) == 5
    # vanishes on the central kernel: p.phi(t^n) = 0
    for n in range(1, 11):
        assert pulled.evaluate(power(ext, ext.t, n)) == 0


def test_pullback_zero_map():
    from translen.brooks import Quasimorphism

    base = LatticeGroup(1)
    ext = CentralExtension(zero_cocycle(base))
    zero = Quasimorphism(lambda g: Fraction(0), Fraction(0), "zero")
    pulled = pullback(zero, ext.phi)
    assert pulled.evaluate(((7,), 2)) == 0
