import random
from fractions import Fraction

import pytest

from translen.brooks import brooks
from translen.extension import (
    CentralExtension,
    ExactHomogeneous,
    HomogenisedQuasimorphism,
    zero_cocycle,
)
from translen.groups import FreeGroup, LatticeGroup, power
from translen.quasiline import (
    DistanceBounds,
    ExactLinearForm,
    QuasilineConfig,
    decompose_exact,
    distance_bounds,
    in_generating_set,
    quasiline_from_evaluator,
    tau_quasiline_bracket,
)

Z2 = LatticeGroup(2)


def z2_config(eps: Fraction, C: Fraction = Fraction(1)) -> QuasilineConfig:
    """s_hat(p, q) = q + eps*p on Z^2."""
    form = ExactLinearForm(Z2, (eps, Fraction(1)), name=f"q+{eps}p")
    return QuasilineConfig(
        group=Z2, s_hat=form, C=C, D=Fraction(0), C0=Fraction(1), g0=(0, 1),
        small_witness=(1, 0) if eps < C / 2 else None,
    )


def test_config_requires_c_at_least_2d():
    form = ExactLinearForm(Z2, (Fraction(2, 5), Fraction(1)))
    with pytest.raises(ValueError):
        QuasilineConfig(Z2, form, C=Fraction(1), D=Fraction(3, 4), C0=Fraction(1), g0=(0, 1))


def test_in_generating_set_exact():
    cfg = z2_config(Fraction(2, 5))
    assert in_generating_set(cfg, (0, 0)) == "yes"
    assert in_generating_set(cfg, (1, 0)) == "yes"   # 2/5 < 1
    assert in_generating_set(cfg, (0, 2)) == "no"    # |2| > 1
    assert in_generating_set(cfg, (0, 1)) == "unknown"  # exactly at the cut


def test_in_generating_set_interval():
    F2 = FreeGroup(2)
    q = brooks(F2.parse("ab"))
    s_hat = HomogenisedQuasimorphism(q, F2, n=16)
    cfg = quasiline_from_evaluator(F2, s_hat, C=Fraction(8), D=Fraction(4), g0=F2.parse("ab"))
    assert in_generating_set(cfg, F2.identity) == "yes"
    assert in_generating_set(cfg, power(F2, F2.parse("ab"), 4)) == "yes"
    # interval 8 +- 1/8 straddles the cut C = 8
    assert in_generating_set(cfg, power(F2, F2.parse("ab"), 8)) == "unknown"
    assert in_generating_set(cfg, power(F2, F2.parse("ab"), 16)) == "no"


def test_distance_bounds_member():
    cfg = z2_config(Fraction(2, 5))
    db = distance_bounds(cfg, (1, 0))
    assert (db.lower, db.upper) == (1, 1)


def test_distance_bounds_exact_examples():
    cfg = z2_config(Fraction(2, 5))
    # W(p, q) = 2p + 5q with member threshold |W| <= 4
    db = distance_bounds(cfg, (0, 3))
    assert (db.lower, db.upper) == (4, 4)
    # (5, -2) has s_hat = 0: it is itself a generator
    db = distance_bounds(cfg, (5, -2))
    assert (db.lower, db.upper) == (1, 1)
    assert distance_bounds(cfg, (0, 0)).upper == 0


def test_exact_decomposition_witnesses():
    rng = random.Random(3)
    for eps in (Fraction(2, 5), Fraction(408, 985), Fraction(1, 3)):
        cfg = z2_config(eps)
        form = cfg.s_hat
        for _ in range(25):
            g = (rng.randint(-40, 40), rng.randint(-40, 40))
            if g == (0, 0):
                continue
            d = distance_bounds(cfg, g).upper
            pieces = decompose_exact(cfg, g)
            assert len(pieces) == d
            assert tuple(sum(col) for col in zip(*pieces)) == g
            for piece in pieces:
                assert abs(form.weight(piece)) <= form.max_member_weight(cfg.C)


def test_bounds_inverted_rejected():
    with pytest.raises(ValueError):
        DistanceBounds(3, 2, "bad")


def test_tau_bracket_408_985():
    cfg = z2_config(Fraction(408, 985))
    bracket = tau_quasiline_bracket(cfg, (1, 0), 64)
    assert bracket.contains(Fraction(408, 985))
    assert bracket.width <= Fraction(1, 16)
    assert bracket.lower == Fraction(408, 985)
    assert bracket.upper == Fraction(17, 41)  # attained at n = 41


def test_tau_bracket_zero_shat():
    cfg = z2_config(Fraction(408, 985))
    g = (985, -408)  # weight 0: a generator whose powers stay in A
    bracket = tau_quasiline_bracket(cfg, g, 32)
    assert bracket.lower == 0
    assert bracket.upper == Fraction(1, 32)


def test_tau_bracket_t_direction():
    cfg = z2_config(Fraction(408, 985))
    bracket = tau_quasiline_bracket(cfg, (0, 1), 64)
    assert bracket.contains(Fraction(1))
    assert bracket.width <= Fraction(1, 32)


def test_two_sided_linearity_constant():
    """tau_L(g)/|s_hat(g)| stays within a single small K across elements."""
    cfg = z2_config(Fraction(408, 985))
    K = Fraction(4)
    rng = random.Random(4)
    tested = 0
    for _ in range(60):
        g = (rng.randint(-8, 8), rng.randint(-8, 8))
        if g == (0, 0):
            continue
        s = abs(cfg.s_hat.value(g).center)
        if s < Fraction(1, 10):
            continue
        bracket = tau_quasiline_bracket(cfg, g, 64)
        assert bracket.upper <= K * s
        assert bracket.lower >= s / K
        tested += 1
    assert tested > 20


def test_monotone_refinement_generic_path():
    """On F_1 the quasiline of brooks(a) is concretely computable by the
    truncated member search; more effort never loosens a bound."""
    F1 = FreeGroup(1)
    q = brooks(F1.parse("a"))
    s_hat = HomogenisedQuasimorphism(q, F1, n=64)
    cfg = quasiline_from_evaluator(F1, s_hat, C=Fraction(8), D=Fraction(4), g0=F1.parse("a"))
    g = F1.parse("a^20")  # s_hat = 20
    low_effort = distance_bounds(cfg, g, effort=2)
    high_effort = distance_bounds(cfg, g, effort=7)
    assert low_effort.lower == high_effort.lower == 2  # 20/(8+4) -> at least 2
    assert low_effort.upper is None  # unreachable in 2 steps of length <= 2
    assert high_effort.upper == 3  # a^7 a^7 a^6


def test_generic_lower_bound_strictness():
    cfg = z2_config(Fraction(2, 5))
    # bypass the exact path to exercise the telescoping bound
    cfg._exact = None
    db = distance_bounds(cfg, (0, 3), effort=3)
    # |s_hat| = 3, C + D = 1: a product of 3 generators cannot reach 3
    assert db.lower == 4


def test_additive_coordinates_guard():
    from translen.groups import HeisenbergGroup
    from translen.extension import floor_linear_cocycle

    with pytest.raises(TypeError):
        ExactLinearForm(HeisenbergGroup(), (Fraction(1), Fraction(1), Fraction(1)))
    with pytest.raises(TypeError):
        ExactLinearForm(
            CentralExtension(floor_linear_cocycle(Fraction(2, 5))),
            (Fraction(1), Fraction(1)),
        )
    # zero-cocycle extensions of lattices are genuinely additive
    ext = CentralExtension(zero_cocycle(LatticeGroup(1)))
    form = ExactLinearForm(ext, (Fraction(2, 5), Fraction(1)))
    assert form.weight(((5,), -2)) == 0
