import random
from fractions import Fraction

import pytest

from translen.groups import FreeGroup, HeisenbergGroup, LatticeGroup, power
from translen.translation import (
    CertificateNotValidated,
    LipschitzCertificate,
    TauBracket,
    abelianization_certificate,
    barycentric_displacement,
    coordinate_sum_certificate,
    distortion_profile,
    orbit_patch,
    tau_lower_certified,
    tau_upper,
    uncertified_lower,
)

Z2 = LatticeGroup(2)
H = HeisenbergGroup()
F2 = FreeGroup(2)


def test_tau_bracket_invariants():
    b = TauBracket(Fraction(1), Fraction(2), 4)
    assert b.width == 1
    assert b.contains(Fraction(3, 2))
    with pytest.raises(ValueError):
        TauBracket(Fraction(2), Fraction(1), 1)


def test_profile_lattice_line():
    prof = distortion_profile(Z2, (0, 1), 10)
    assert prof == [(n, n) for n in range(1, 11)]


def test_profile_free_group():
    prof = distortion_profile(F2, F2.parse("ab"), 8)
    assert prof == [(n, 2 * n) for n in range(1, 9)]


def test_profile_heisenberg_z_envelope():
    prof = dict(distortion_profile(H, (0, 0, 1), 64))
    for n in range(1, 9):
        assert prof[n * n] <= 4 * n


def test_tau_upper_lattice():
    for N in (1, 4, 10):
        assert tau_upper(Z2, (1, 0), N) == 1
    # homomorphism case: d(1, g^n) = n d(1, g)
    for g in [(1, 0), (2, -1), (3, 5)]:
        d1 = abs(g[0]) + abs(g[1])
        for n in range(1, 11):
            gn = power(Z2, g, n)
            assert abs(gn[0]) + abs(gn[1]) == n * d1


def test_tau_upper_monotone_in_n():
    prof = distortion_profile(H, (0, 0, 1), 50)
    prev = None
    for N in range(1, 51):
        cur = tau_upper(H, (0, 0, 1), N, profile=prof[:N])
        if prev is not None:
            assert cur <= prev
        prev = cur


def test_tau_upper_finite_order_zero():
    class Cyclic6:
        name = "cyclic:6"
        identity = 0

        def multiply(self, a, b):
            return (a + b) % 6

        def invert(self, a):
            return (-a) % 6

        generators = (1, 5)

        def canonical_key(self, a):
            return bytes([a])

        def exact_distance(self, a):
            return None

    c = Cyclic6()
    assert tau_upper(c, 1, 6) == 0


def test_lipschitz_certificate_validation():
    cert = abelianization_certificate(H)
    with pytest.raises(CertificateNotValidated):
        tau_lower_certified((1, 0, 0), cert)
    cert.validate(H, 4)
    assert tau_lower_certified((1, 0, 0), cert) == 1
    assert tau_lower_certified((0, 0, 1), cert) == 0
    assert tau_lower_certified((0, 0, 7), cert) == 0


def test_bad_certificate_rejected():
    bogus = LipschitzCertificate(value=lambda g: Fraction(100), lip=Fraction(1))
    with pytest.raises(CertificateNotValidated):
        bogus.validate(Z2, 3)


def test_coordinate_sum_lower_bound():
    cert = coordinate_sum_certificate()
    cert.validate(Z2, 4)
    assert tau_lower_certified((3, 2), cert) == 5
    assert tau_lower_certified((1, -1), cert) == 0


def test_lower_never_exceeds_upper():
    cert = abelianization_certificate(H)
    cert.validate(H, 4)
    for g in [(1, 0, 0), (0, 1, 0), (1, 1, 0), (2, -1, 3), (0, 0, 1)]:
        assert tau_lower_certified(g, cert) <= tau_upper(H, g, 12)


def test_heisenberg_x_tau_exactly_one():
    cert = abelianization_certificate(H)
    cert.validate(H, 4)
    assert tau_lower_certified((1, 0, 0), cert) == 1
    assert tau_upper(H, (1, 0, 0), 20) == 1


def test_uncertified_lower_tagged_series():
    prof = distortion_profile(H, (0, 0, 1), 9)
    series = uncertified_lower(prof, prof[0][1])
    assert [n for n, _ in series] == list(range(1, 10))
    assert all(v >= 0 for _, v in series)


def test_orbit_patch_is_metric():
    patch = orbit_patch(Z2, (1, 1), 4)
    assert patch.n == 5
    assert patch.d(0, 4) == 8
    with pytest.raises(ValueError):
        orbit_patch(Z2, (0, 0), 2)


def test_barycentric_displacement_n1():
    res = barycentric_displacement(Z2, (1, 1), 1)
    assert res.displacement <= res.bound
    assert res.bound == 2


def test_barycentric_displacement_lattice():
    res = barycentric_displacement(Z2, (1, 1), 8)
    assert res.bound == 2
    assert res.displacement <= res.bound


def test_barycentric_displacement_heisenberg_z():
    res = barycentric_displacement(H, (0, 0, 1), 16)
    assert res.bound <= 1
    assert res.displacement <= res.bound
    # the displacement at the barycentre is well below d(1, z) = 4
    assert res.displacement < 4
