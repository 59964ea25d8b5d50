import json
import random
from fractions import Fraction

import pytest

from translen.extension import CentralExtension, zero_cocycle
from translen.groups import LatticeGroup, power, word_ball
from translen.hhg import (
    BigSetReport,
    Domain,
    EpsilonRange,
    LinearForm,
    ParamRange,
    StructureViolation,
    ToyHHGStructure,
    bigset_report,
    df_ratio_scan,
    discreteness_probe,
    dump_structure,
    extend_with_quasiline,
    load_structure,
    make_z2_delta_epsilon,
    make_z2_epsilon,
    make_z_line,
    parse_linear_formula,
    relevant_domains,
    structures_isomorphic,
    tau_per_domain,
    validate_structure,
)
from translen.pipeline import build_pipeline_quasiline
from translen.quasiline import tau_quasiline_bracket
from translen.translation import tau_upper

Z2 = LatticeGroup(2)


def test_epsilon_range():
    with pytest.raises(EpsilonRange):
        make_z2_epsilon(Fraction(0))
    with pytest.raises(EpsilonRange):
        make_z2_epsilon(Fraction(3, 2))
    with pytest.raises(ParamRange):
        make_z2_delta_epsilon(Fraction(2), Fraction(1, 2))


def test_z2_epsilon_projections():
    s = make_z2_epsilon(Fraction(1, 3))
    assert s.project_line("U", (2, 1)) == -1  # 3*(1/3) - 2
    assert s.project_line("V", (2, 1)) == 2
    assert s.project_line("U", (0, 0)) == 0


def test_z2_delta_epsilon_projections():
    s = make_z2_delta_epsilon(Fraction(2, 5), Fraction(1, 3))
    assert s.project_line("V", (1, 1)) == Fraction(-1, 5)  # 2*(2/5) - 1
    boundary = make_z2_delta_epsilon(Fraction(1), Fraction(1))
    assert boundary.project_line("V", (3, 4)) == 3  # degenerates to p
    assert boundary.project_line("U", (3, 4)) == 4


def test_validate_example_family():
    for eps in (Fraction(1, 3), Fraction(2, 5), Fraction(408, 985), Fraction(1)):
        report = validate_structure(make_z2_epsilon(eps))
        assert report["chain"] == 2 and report["orthogonal_set"] == 2
    for delta, eps in ((Fraction(1, 4), Fraction(2, 5)), (Fraction(1), Fraction(1))):
        validate_structure(make_z2_delta_epsilon(delta, eps))


def test_validate_orthogonality_inheritance_violation():
    zero = (Fraction(0), Fraction(0))
    bad = ToyHHGStructure(
        group=Z2,
        domains={u: Domain(u, "point") for u in ("U", "V", "W", "S")},
        nesting=frozenset({("U", "V"), ("U", "S"), ("V", "S"), ("W", "S")}),
        orthogonality=frozenset({frozenset(("V", "W"))}),  # U transverse to W
        maximal="S",
        complexity=3,
        rho={
            ("U", "V"): zero, ("U", "S"): zero, ("V", "S"): zero, ("W", "S"): zero,
        },
    )
    with pytest.raises(StructureViolation) as exc:
        validate_structure(bad)
    assert exc.value.kind == "orthogonality-inheritance"


def test_validate_relation_overlap():
    bad = ToyHHGStructure(
        group=Z2,
        domains={u: Domain(u, "point") for u in ("U", "S")},
        nesting=frozenset({("U", "S")}),
        orthogonality=frozenset({frozenset(("U", "S"))}),
        maximal="S",
        complexity=2,
        rho={("U", "S"): (Fraction(0), Fraction(0))},
    )
    with pytest.raises(StructureViolation) as exc:
        validate_structure(bad)
    assert exc.value.kind == "relations-overlap"


def test_validate_complexity_bound():
    s = make_z2_epsilon(Fraction(1, 3))
    s.complexity = 1
    with pytest.raises(StructureViolation):
        validate_structure(s)


def test_relevant_domains():
    s = make_z2_epsilon(Fraction(1, 10))
    x, y = (0, 0), (1, 0)
    assert relevant_domains(s, x, y, Fraction(1, 2)) == {"U", "V"}
    assert relevant_domains(s, x, y, Fraction(1)) == {"V"}
    assert relevant_domains(s, x, x, Fraction(1, 2)) == set()


def test_tau_per_domain_example_values():
    s = make_z2_epsilon(Fraction(2, 5))
    taus = tau_per_domain(s, (1, 0))
    assert taus["U"].lower == taus["U"].upper == Fraction(3, 5)
    assert taus["V"].lower == 1
    assert taus["S"].upper == 0
    taus = tau_per_domain(s, (2, -2))
    assert taus["U"].lower == 2
    assert taus["V"].lower == 2
    taus = tau_per_domain(s, (0, 0))
    assert all(b.upper == 0 for b in taus.values())


def test_exact_drift_formula_range():
    s = make_z2_epsilon(Fraction(408, 985))
    eps = Fraction(408, 985)
    for p in range(-6, 7):
        for q in range(-6, 7):
            expected = abs((p + q) * eps - p)
            assert tau_per_domain(s, (p, q))["U"].lower == expected


def test_signed_translation_number():
    s = make_z2_epsilon(Fraction(2, 5))
    assert s.translation_number("U", (1, 0)) == Fraction(-3, 5)
    assert s.translation_number("U", (0, 1)) == Fraction(2, 5)


def test_df_ratio_scan_scaling():
    # extremal family: a t^q with pi_U just under the threshold, so the
    # only relevant contribution is pi_V = 1 while d = 1 + q ~ 3/(2 eps)
    reports = {
        eps: df_ratio_scan(make_z2_epsilon(Fraction(1, eps)), radius=16, D=Fraction(1, 2))
        for eps in (4, 8)
    }
    assert reports[4].ratio_constant == 5
    assert reports[8].ratio_constant == 11
    assert reports[8].ratio_constant >= 2 * reports[4].ratio_constant * Fraction(9, 10)
    degenerate = df_ratio_scan(make_z2_epsilon(Fraction(1)), radius=8, D=Fraction(1, 2))
    assert degenerate.ratio_constant <= 2


def test_df_affine_constant_verified():
    s = make_z2_epsilon(Fraction(1, 4))
    report = df_ratio_scan(s, radius=16, D=Fraction(1, 2))
    A = report.affine_constant
    ball = word_ball(Z2, 16)
    for g, d in ball.items():
        if d == 0:
            continue
        total = Fraction(0)
        for u in s.domains:
            low, _ = s.domain_distance(u, (0, 0), g)
            if low >= Fraction(1, 2):
                total += low
        assert total <= A * d + A
        assert Fraction(d) <= A * total + A * A


def test_probe_no_witnesses_at_half():
    s = make_z2_epsilon(Fraction(1, 2))
    witnesses = discreteness_probe(s, Fraction(1, 4), box_radius=12, cf_bound=100)
    assert witnesses == []


def test_probe_finds_cf_witness():
    s = make_z2_epsilon(Fraction(408, 985))
    witnesses = discreteness_probe(s, Fraction(1, 100), box_radius=0, cf_bound=2000)
    assert any(w.domain == "U" for w in witnesses)
    for w in witnesses:
        assert w.bracket.lower > 0
        assert w.bracket.upper < Fraction(1, 100)
        assert w.power_used == 2  # c = 2, so c! = 2


def test_bigset_z2():
    s = make_z2_epsilon(Fraction(2, 5))
    report = bigset_report(s, (1, 0))
    assert report.growing == {"U", "V"}
    report = bigset_report(s, (0, 0))
    assert report.growing == frozenset()


def test_uniform_undistortion_empirical():
    s = make_z2_epsilon(Fraction(2, 5))
    rng = random.Random(9)
    fitted_K = None
    for _ in range(30):
        g = (rng.randint(-5, 5), rng.randint(-5, 5))
        if g == (0, 0):
            continue
        tau_hat = tau_upper(Z2, g, 10)
        for n in range(1, 11):
            gn = power(Z2, g, n)
            d = abs(gn[0]) + abs(gn[1])
            assert d >= n * tau_hat
            ratio = Fraction(d, n)
            fitted_K = ratio if fitted_K is None else min(fitted_K, ratio)
    assert fitted_K > 0


# -- the product extension ---------------------------------------------------


def pipeline_structure(eps=Fraction(408, 985)):
    ext, _, cfg = build_pipeline_quasiline(eps, Fraction(1))
    return extend_with_quasiline(make_z_line(), cfg, ext), ext, cfg


def test_extend_structure_shape():
    s, ext, cfg = pipeline_structure()
    assert set(s.domains) == {"S", "A", "S_E"}
    assert s.domains["A"].kind == "quasiline"
    assert s.domains["S_E"].kind == "point"
    assert s.orthogonal("A", "S")
    assert s.nested_strict("A", "S_E") and s.nested_strict("S", "S_E")
    assert s.complexity == 2
    validate_structure(s)


def test_extend_requires_certified_tau_t():
    from translen.hhg import TauNotCertified
    from translen.quasiline import ExactLinearForm, QuasilineConfig

    ext = CentralExtension(zero_cocycle(LatticeGroup(1)))
    # s_hat killing t: tau_L(t) has no positive lower bound
    form = ExactLinearForm(ext, (Fraction(1), Fraction(0)))
    cfg = QuasilineConfig(ext, form, C=Fraction(1), D=Fraction(0), C0=Fraction(1), g0=((1,), 0))
    with pytest.raises(TauNotCertified):
        extend_with_quasiline(make_z_line(), cfg, ext)


def test_extend_matches_z2_epsilon_structure():
    s, ext, cfg = pipeline_structure()
    iso = structures_isomorphic(s, make_z2_epsilon(Fraction(408, 985)))
    assert iso is not None
    mapping = iso["mapping"]
    assert mapping["S_E"] == "S"
    # the factored base projection agrees exactly with pi_V = p
    assert ("S", "V") in iso["exact_projection_matches"]
    assert mapping["A"] == "U"


def test_extend_bigset_of_t():
    s, ext, cfg = pipeline_structure()
    report = bigset_report(s, ext.t, horizon=32)
    assert report.growing == {"A"}


def test_extend_tau_t_bracket():
    s, ext, cfg = pipeline_structure()
    bracket = tau_quasiline_bracket(cfg, ext.t, 128)
    assert bracket.contains(Fraction(1))
    assert bracket.width <= Fraction(1, 32)


def test_extend_probe_witness():
    s, ext, cfg = pipeline_structure()
    witnesses = discreteness_probe(s, Fraction(1, 100), cf_bound=2000, n_max=128)
    a_witnesses = [w for w in witnesses if w.domain == "A"]
    assert a_witnesses
    for w in a_witnesses:
        assert 0 < w.bracket.lower and w.bracket.upper < Fraction(1, 100)


def test_extend_growing_domains_orthogonal():
    s, ext, cfg = pipeline_structure()
    # (169, -70) drifts on both S (base) and A; they must be orthogonal
    e = ((169,), -70)
    report = bigset_report(s, e, horizon=16)
    assert s.orthogonal("S", "A")
    assert "S" in report.growing


# -- JSON interchange ---------------------------------------------------------


def test_formula_parser():
    eps = Fraction(1, 3)
    form = parse_linear_formula("(p+q)*eps - p", {"eps": eps})
    assert form.coeffs == (eps - 1, eps)
    form = parse_linear_formula("p", {})
    assert form.coeffs == (Fraction(1), Fraction(0))
    with pytest.raises(ValueError):
        parse_linear_formula("p*q", {})
    with pytest.raises(ValueError):
        parse_linear_formula("p + 1", {})
    with pytest.raises(ValueError):
        parse_linear_formula("p + zeta", {})


def test_structure_json_roundtrip():
    s = make_z2_epsilon(Fraction(2, 5))
    blob = json.dumps(dump_structure(s))
    loaded = load_structure(json.loads(blob))
    assert loaded.domains.keys() == s.domains.keys()
    assert loaded.nesting == s.nesting
    assert loaded.orthogonality == s.orthogonality
    for u in ("U", "V"):
        assert loaded.line_forms[u].coeffs == s.line_forms[u].coeffs
    validate_structure(loaded)
