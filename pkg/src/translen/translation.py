"""Stable translation length brackets, distortion profiles, and the
barycentric-displacement experiment on finite orbit patches.

tau(g) = lim d(1, g^n)/n exists because n |-> d(1, g^n) is subadditive;
by Fekete the limit equals the infimum, so every d(1, g^n)/n is a true
upper bound and min over n <= N converges from above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .groups import BudgetExceeded, Element, GroupOracle, power, word_ball
from .metric import FiniteMetricSpace, sup_distance, validate_metric
from .tightspan import DEFAULT_TOLERANCE, barycentre

DEFAULT_ELEMENT_BUDGET = 5 * 10**6


@dataclass(frozen=True)
class TauBracket:
    """A certified bracket lower <= tau <= upper (upper None when unknown)."""

    lower: Fraction
    upper: Optional[Fraction]
    n_used: int
    lower_method: str = ""
    upper_method: str = ""

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise ValueError(f"bracket inverted: {self.lower} > {self.upper}")

    @property
    def width(self) -> Optional[Fraction]:
        return None if self.upper is None else self.upper - self.lower

    def contains(self, x: Fraction) -> bool:
        return self.lower <= x and (self.upper is None or x <= self.upper)


class CertificateNotValidated(RuntimeError):
    pass


@dataclass
class LipschitzCertificate:
    """An evaluator with a verified coarse-Lipschitz bound on a ball.

    |value(g)| <= lip * d(1,g) + lip is checked on the whole radius-`radius`
    ball before use.  `homogeneous` declares value(g^n) = n*value(g), which
    holds e.g. for norms of homomorphisms along cyclic subgroups.
    """

    value: Callable[[Element], Fraction]
    lip: Fraction
    description: str = ""
    homogeneous: bool = True
    validated_radius: int = field(default=-1, init=False)

    def validate(self, oracle: GroupOracle, radius: int, budget: int = DEFAULT_ELEMENT_BUDGET) -> None:
        ball = word_ball(oracle, radius, budget)
        for g, d in ball.items():
            if abs(self.value(g)) > self.lip * d + self.lip:
                raise CertificateNotValidated(
                    f"Lipschitz bound fails at {oracle.format(g)}: |{self.value(g)}| > {self.lip}*{d}+{self.lip}"
                )
        self.validated_radius = radius


def abelianization_certificate(oracle) -> LipschitzCertificate:
    """l^1 norm of the Heisenberg abelianization: 1-Lipschitz, kills z."""
    return LipschitzCertificate(
        value=lambda g: Fraction(abs(g[0]) + abs(g[1])),
        lip=Fraction(1),
        description="l1 norm of the epimorphism to Z^2",
    )


def coordinate_sum_certificate() -> LipschitzCertificate:
    """|p + q| on Z^2; a homomorphism to Z, 1-Lipschitz."""
    return LipschitzCertificate(
        value=lambda g: Fraction(abs(sum(g))),
        lip=Fraction(1),
        description="coordinate-sum homomorphism on Z^2",
    )


class _SharedBall:
    """A BFS ball around the identity, grown lazily radius by radius."""

    def __init__(self, oracle: GroupOracle, budget: int):
        self.oracle = oracle
        self.budget = budget
        self.dist: dict[Element, int] = {oracle.identity: 0}
        self.frontier = [oracle.identity]
        self.radius = 0

    def grow(self) -> bool:
        if not self.frontier:
            return False
        self.radius += 1
        nxt = []
        for g in self.frontier:
            for s in self.oracle.generators:
                h = self.oracle.multiply(g, s)
                if h not in self.dist:
                    self.dist[h] = self.radius
                    nxt.append(h)
                    if len(self.dist) > self.budget:
                        raise BudgetExceeded(
                            f"shared ball exceeded {self.budget} elements at radius {self.radius}"
                        )
        self.frontier = nxt
        return True


def distortion_profile(
    oracle: GroupOracle,
    g: Element,
    n_max: int,
    budget: int = DEFAULT_ELEMENT_BUDGET,
    method: str = "auto",
) -> list[tuple[int, int]]:
    """Exact (n, d(1, g^n)) for n = 1..n_max.

    With a closed-form distance the profile is direct; otherwise one shared
    BFS ball is grown until every power is covered (all powers of a fixed g
    live in a ball of radius n_max * d(1,g), and usually far smaller).
    """
    powers = {}
    acc = oracle.identity
    for n in range(1, n_max + 1):
        acc = oracle.multiply(acc, g)
        powers[n] = acc

    if method == "auto" and oracle.exact_distance(g) is not None:
        return [(n, oracle.exact_distance(powers[n])) for n in range(1, n_max + 1)]

    ball = _SharedBall(oracle, budget)
    targets = set(powers.values())
    while not targets <= ball.dist.keys():
        if not ball.grow():
            raise BudgetExceeded("group exhausted before all powers were found")
    return [(n, ball.dist[powers[n]]) for n in range(1, n_max + 1)]


def tau_upper(
    oracle: GroupOracle,
    g: Element,
    n_max: int,
    budget: int = DEFAULT_ELEMENT_BUDGET,
    profile: Optional[Sequence[tuple[int, int]]] = None,
) -> Fraction:
    """min over n <= n_max of d(1, g^n)/n: a certified upper bound for tau."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if profile is None:
        profile = distortion_profile(oracle, g, n_max, budget)
    return min(Fraction(d, n) for n, d in profile)


def tau_lower_certified(
    g: Element,
    cert: LipschitzCertificate,
    homogeneous_value: Optional[Fraction] = None,
) -> Fraction:
    """|value(g)| / lip, sound when the certificate is validated and
    homogeneous: |v(g)| = |v(g^n)|/n <= (L d(1,g^n) + L)/n -> L tau(g)."""
    if cert.validated_radius < 0:
        raise CertificateNotValidated("validate the certificate on a ball before use")
    if not cert.homogeneous:
        raise CertificateNotValidated("certificate must declare homogeneity along <g>")
    v = homogeneous_value if homogeneous_value is not None else cert.value(g)
    return abs(v) / cert.lip


def tau_bracket(
    oracle: GroupOracle,
    g: Element,
    n_max: int,
    cert: Optional[LipschitzCertificate] = None,
    budget: int = DEFAULT_ELEMENT_BUDGET,
) -> TauBracket:
    upper = tau_upper(oracle, g, n_max, budget)
    lower = tau_lower_certified(g, cert) if cert is not None else Fraction(0)
    return TauBracket(
        lower,
        upper,
        n_max,
        lower_method=cert.description if cert else "trivial",
        upper_method=f"min d(1,g^n)/n over n<={n_max}",
    )


def uncertified_lower(profile: Sequence[tuple[int, int]], d1: int) -> list[tuple[int, Fraction]]:
    """Heuristic (d(1,g^n) - d(1,g))/n series; emitted only with an
    'uncertified' tag, never used in certified brackets."""
    return [(n, Fraction(max(d - d1, 0), n)) for n, d in profile]


# -- the |g| = tau mechanism on finite orbit patches -----------------------


def orbit_patch(
    oracle: GroupOracle,
    g: Element,
    n: int,
    budget: int = DEFAULT_ELEMENT_BUDGET,
) -> FiniteMetricSpace:
    """Word-metric space on {g^0, ..., g^n} using d(g^i, g^j) = d(1, g^(j-i))."""
    profile = distortion_profile(oracle, g, n, budget)
    gap = {0: 0}
    for k, d in profile:
        if d == 0:
            raise ValueError("patch points must be distinct: g has finite order <= n")
        gap[k] = d
    matrix = [[Fraction(gap[abs(i - j)]) for j in range(n + 1)] for i in range(n + 1)]
    labels = [f"g^{i}" for i in range(n + 1)]
    return validate_metric(matrix, labels)


@dataclass(frozen=True)
class BarycentricDisplacement:
    displacement: Fraction
    bound: Fraction
    n: int
    patch_size: int
    scope_note: str = "computed inside the injective hull of the finite orbit patch"


def barycentric_displacement(
    oracle: GroupOracle,
    g: Element,
    n: int,
    eta: Fraction = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_ELEMENT_BUDGET,
) -> BarycentricDisplacement:
    """Displacement of the n-point barycentre under the shift by g.

    F1 is the barycentre of (g^0, ..., g^(n-1)); F2 is the barycentre of the
    shifted tuple (g^n, g^1, ..., g^(n-1)), i.e. g^n replacing g^0.  The two
    tuples differ in one coordinate by d(1, g^n), so the 1/n-Lipschitz
    barycentre axiom forces displacement <= d(1, g^n)/n (+ 2*eta from the
    two retraction certificates).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    patch = orbit_patch(oracle, g, n, budget)
    f1 = barycentre(list(range(n)), patch, eta)
    f2 = barycentre([n] + list(range(1, n)), patch, eta)
    displacement = sup_distance(f1.f, f2.f)
    bound = Fraction(patch.d(0, n), n)
    assert displacement <= bound + 2 * eta, "barycentre displacement bound violated"
    return BarycentricDisplacement(displacement, bound, n, patch.n)
