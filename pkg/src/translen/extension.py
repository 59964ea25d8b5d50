"""Z-central extensions E_alpha from 2-cocycles.

The extension is always materialised directly in E_alpha coordinates
(g, p) with product (g,p)*(h,q) = (gh, p+q+alpha(g,h)), so the comparison
isomorphism psi_alpha is the identity and the fibre quasimorphism q_alpha
is literally the second-coordinate projection.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .brooks import HomogenisedValue, Quasimorphism
from .groups import Element, GroupOracle, LatticeGroup, _parse_exponents, power


class NormalisationFailure(ValueError):
    def __init__(self, g):
        super().__init__(f"alpha(g,1) or alpha(1,g) nonzero at g={g!r}")
        self.witness = g


class CocycleIdentityFailure(ValueError):
    def __init__(self, g, h, k):
        super().__init__(f"cocycle identity fails at ({g!r}, {h!r}, {k!r})")
        self.witness = (g, h, k)


class CocycleMismatch(ValueError):
    pass


class UnboundedCocycle(RuntimeError):
    """Raised when an interval certificate is requested for a cocycle with
    no declared bound."""


@dataclass(frozen=True)
class Cocycle:
    """A normalised 2-cocycle alpha: G x G -> Z.

    declared_bound is sup |alpha| when the cocycle is bounded, else None.
    exact_slope, when present, returns the exact homogenisation
    qhat_alpha((g, 0)); it exists for the zero cocycle and for coboundaries
    whose beta has a known homogenisation (bounded beta, floor-of-linear).
    """

    base: GroupOracle
    alpha: Callable[[Element, Element], int]
    name: str
    declared_bound: Optional[Fraction] = None
    exact_slope: Optional[Callable[[Element], Fraction]] = None
    is_identically_zero: bool = False


def zero_cocycle(base: GroupOracle) -> Cocycle:
    return Cocycle(
        base,
        lambda g, h: 0,
        "zero",
        Fraction(0),
        exact_slope=lambda g: Fraction(0),
        is_identically_zero=True,
    )


def coboundary_cocycle(
    base: GroupOracle,
    beta: Callable[[Element], int],
    name: str = "coboundary",
    bound: Optional[Fraction] = None,
    beta_homogenisation: Optional[Callable[[Element], Fraction]] = None,
) -> Cocycle:
    """alpha(g,h) = beta(g) + beta(h) - beta(gh), with beta(1) = 0.

    For bounded beta the homogenisation of beta vanishes and the slope is
    beta(g) exactly; unbounded beta (e.g. floor of a linear form) must
    supply its own homogenisation for the exact path.
    """
    if beta(base.identity) != 0:
        raise NormalisationFailure(base.identity)

    def alpha(g, h):
        return beta(g) + beta(h) - beta(base.multiply(g, h))

    slope = None
    if beta_homogenisation is not None:
        slope = lambda g: Fraction(beta(g)) - beta_homogenisation(g)
    return Cocycle(base, alpha, name, bound, exact_slope=slope)


def bounded_coboundary_cocycle(
    base: GroupOracle, beta: Callable[[Element], int], sup_beta: int, name: str = "coboundary"
) -> Cocycle:
    """Coboundary of a bounded beta: |alpha| <= 3*sup|beta| and the
    homogenisation of beta is 0."""
    return coboundary_cocycle(
        base, beta, name, bound=Fraction(3 * sup_beta), beta_homogenisation=lambda g: Fraction(0)
    )


def floor_linear_cocycle(eps: Fraction) -> Cocycle:
    """On Z: coboundary of beta(p) = floor(eps*p); bounded by 1 although
    beta itself is unbounded.  Slope of (g,0) is floor(eps*g) - eps*g."""
    base = LatticeGroup(1)

    def beta(g) -> int:
        return math.floor(eps * g[0])

    return coboundary_cocycle(
        base,
        beta,
        name=f"floor:{eps}",
        bound=Fraction(1),
        beta_homogenisation=lambda g: eps * g[0],
    )


def heisenberg_cocycle() -> Cocycle:
    """alpha((p1,q1),(p2,q2)) = p1*q2 on Z^2; unbounded, E_alpha is the
    integer Heisenberg group."""
    return Cocycle(LatticeGroup(2), lambda g, h: g[0] * h[1], "heisenberg", None)


class CentralExtension(GroupOracle):
    """E_alpha as a group oracle over bare (g, p) tuples."""

    def __init__(self, cocycle: Cocycle):
        self.cocycle = cocycle
        self.base = cocycle.base
        self.name = f"extension:{cocycle.name}"
        base_names = getattr(self.base, "letter_names", None)
        self.fiber_name = "t" if not base_names or "t" not in base_names else "s"

    @property
    def identity(self):
        return (self.base.identity, 0)

    @property
    def t(self):
        """The generator (1_G, 1) of the central kernel of phi."""
        return (self.base.identity, 1)

    def phi(self, e) -> Element:
        """The extension projection E -> G."""
        return e[0]

    def multiply(self, e1, e2):
        g, p = e1
        h, q = e2
        return (self.base.multiply(g, h), p + q + self.cocycle.alpha(g, h))

    def invert(self, e):
        g, p = e
        ginv = self.base.invert(g)
        return (ginv, -p - self.cocycle.alpha(g, ginv))

    @property
    def generators(self):
        gens = [(s, 0) for s in self.base.generators]
        gens.append(self.t)
        gens.append(self.invert(self.t))
        return tuple(gens)

    def canonical_key(self, e) -> bytes:
        return self.base.canonical_key(e[0]) + b"|" + e[1].to_bytes(8, "big", signed=True)

    def parse(self, text: str):
        base_names = getattr(self.base, "letter_names", None)
        if base_names is None:
            raise NotImplementedError("parsing needs a normal-form base group")
        names = tuple(base_names) + (self.fiber_name,)
        exps = _parse_exponents(text, names)
        g = self.base.parse(
            " ".join(f"{nm}^{e}" for nm, e in zip(base_names, exps[:-1]))
        )
        return (g, exps[-1])

    def format(self, e) -> str:
        return f"{self.base.format(e[0])} {self.fiber_name}^{e[1]}"


@dataclass(frozen=True)
class ExtensionElement:
    """Tagged element for the arithmetic API; `raw` is the (g, p) tuple."""

    ext: CentralExtension
    raw: tuple

    @property
    def g(self):
        return self.raw[0]

    @property
    def p(self) -> int:
        return self.raw[1]


def ext_mult(e1: ExtensionElement, e2: ExtensionElement) -> ExtensionElement:
    if e1.ext is not e2.ext:
        raise CocycleMismatch("elements live in different extensions")
    return ExtensionElement(e1.ext, e1.ext.multiply(e1.raw, e2.raw))


def ext_inv(e: ExtensionElement) -> ExtensionElement:
    return ExtensionElement(e.ext, e.ext.invert(e.raw))


def ext_power(e: ExtensionElement, n: int) -> ExtensionElement:
    return ExtensionElement(e.ext, power(e.ext, e.raw, n))


# -- validation ------------------------------------------------------------


def sample_elements(oracle: GroupOracle, count: int, max_len: int, seed: int) -> list[Element]:
    rng = random.Random(seed)
    gens = oracle.generators
    out = []
    for _ in range(count):
        g = oracle.identity
        for _ in range(rng.randint(0, max_len)):
            g = oracle.multiply(g, rng.choice(gens))
        out.append(g)
    return out


def validate_cocycle(
    cocycle: Cocycle,
    triples: Optional[Sequence[tuple[Element, Element, Element]]] = None,
    count: int = 10**4,
    max_len: int = 8,
    seed: int = 0,
) -> dict:
    """Check normalisation and the cocycle identity on a sample, and
    cross-check that ext_mult is associative on the same triples (the two
    conditions are algebraically equivalent)."""
    base = cocycle.base
    if triples is None:
        elems = sample_elements(base, 3 * count, max_len, seed)
        triples = [tuple(elems[3 * i : 3 * i + 3]) for i in range(count)]
    ext = CentralExtension(cocycle)
    checked = 0
    bound_seen = 0
    for g, h, k in triples:
        if cocycle.alpha(g, base.identity) != 0 or cocycle.alpha(base.identity, g) != 0:
            raise NormalisationFailure(g)
        lhs = cocycle.alpha(g, h) + cocycle.alpha(base.multiply(g, h), k)
        rhs = cocycle.alpha(h, k) + cocycle.alpha(g, base.multiply(h, k))
        if lhs != rhs:
            raise CocycleIdentityFailure(g, h, k)
        e1, e2, e3 = (g, 0), (h, 0), (k, 0)
        assoc_l = ext.multiply(ext.multiply(e1, e2), e3)
        assoc_r = ext.multiply(e1, ext.multiply(e2, e3))
        if assoc_l != assoc_r:
            raise CocycleIdentityFailure(g, h, k)
        bound_seen = max(bound_seen, abs(cocycle.alpha(g, h)))
        checked += 1
    if cocycle.declared_bound is not None and bound_seen > cocycle.declared_bound:
        raise ValueError(f"observed |alpha| = {bound_seen} exceeds declared bound")
    return {"triples_checked": checked, "max_abs_alpha_seen": bound_seen}


# -- the fibre quasimorphism q_alpha ---------------------------------------


def q_alpha(e) -> int:
    """Second-coordinate projection; accepts raw tuples or tagged elements."""
    if isinstance(e, ExtensionElement):
        return e.raw[1]
    return e[1]


def q_alpha_quasimorphism(ext: CentralExtension) -> Quasimorphism:
    if ext.cocycle.declared_bound is None:
        raise UnboundedCocycle("q_alpha is a quasimorphism only for bounded cocycles")
    return Quasimorphism(lambda e: Fraction(q_alpha(e)), ext.cocycle.declared_bound, "q_alpha")


def q_alpha_hat(ext: CentralExtension, e, n: int = 64) -> HomogenisedValue:
    """Homogenisation of q_alpha at e, exact when the cocycle knows its
    slopes, else the interval q_alpha(e^n)/n with radius bound/n."""
    raw = e.raw if isinstance(e, ExtensionElement) else e
    g, p = raw
    if g == ext.base.identity:
        # central elements: q_alpha(t^p n) = p*n exactly
        return HomogenisedValue(Fraction(p), Fraction(0), 1)
    if ext.cocycle.exact_slope is not None:
        return HomogenisedValue(Fraction(p) + ext.cocycle.exact_slope(g), Fraction(0), 1)
    if ext.cocycle.declared_bound is None:
        raise UnboundedCocycle("cannot certify homogenisation intervals without a bound")
    en = power(ext, raw, n)
    return HomogenisedValue(Fraction(q_alpha(en), n), ext.cocycle.declared_bound / n, n)


# -- peripheral subgroups P_g = phi^-1(<g>) --------------------------------


@dataclass(frozen=True)
class PeripheralAnalysis:
    """Search result for ker(qhat_alpha) on P_g.

    mode 'kernel-found': gbar = (g^kappa, theta) with qhat_alpha(gbar) = 0
    (exactly, or interval containing 0 with radius < tol); kappa minimal.
    mode 'injective' is reserved for a proof of global injectivity, which
    finite interval data can never supply; bounded searches that exhaust
    their budget report 'undetermined' with diagnostics instead.
    """

    g: Element
    mode: str
    kappa: Optional[int] = None
    theta: Optional[int] = None
    gbar: Optional[tuple] = None
    detail: str = ""


def peripheral_analysis(
    ext: CentralExtension,
    g: Element,
    search_bound: int = 100,
    tol: Fraction = Fraction(1, 1000),
    n_eval: int = 256,
) -> PeripheralAnalysis:
    """Search (kappa, theta), 0 < kappa <= search_bound, for a kernel
    element gbar = (g^kappa, theta) of qhat_alpha restricted to P_g."""
    base = ext.base
    if g == base.identity:
        raise ValueError("g must have infinite order in the base group")
    slope_fn = ext.cocycle.exact_slope
    if slope_fn is not None:
        s = slope_fn(g)
        # qhat((g^k, theta)) = theta + slope(g^k), and slope(g^k) is an
        # integer exactly when k*s is, so the minimal kappa is den(s)
        kappa = s.denominator
        if kappa <= search_bound:
            gk = power(base, g, kappa)
            sk = slope_fn(gk)
            theta = -int(sk)
            gbar = (gk, theta)
            return PeripheralAnalysis(
                g, "kernel-found", kappa, theta, gbar, detail=f"exact slope {s}"
            )
        return PeripheralAnalysis(
            g,
            "undetermined",
            detail=f"exact slope {s}: minimal kappa = {kappa} exceeds search bound {search_bound}",
        )

    excluded = 0
    lift = (g, 0)
    for kappa in range(1, search_bound + 1):
        ek = power(ext, lift, kappa)
        hv = q_alpha_hat(ext, ek, n_eval)
        tpow = -round(hv.center)
        if abs(hv.center + tpow) <= hv.radius:
            if hv.radius < tol:
                gbar = (ek[0], ek[1] + tpow)
                return PeripheralAnalysis(
                    g, "kernel-found", kappa, ek[1] + tpow, gbar,
                    detail=f"interval radius {hv.radius}",
                )
        else:
            excluded += 1
    return PeripheralAnalysis(
        g,
        "undetermined",
        detail=f"interval evidence excluded {excluded}/{search_bound} candidate kappas",
    )


# -- the combined quasimorphism r_hat = delta*qhat_alpha + eps*phat.phi ----


class HomogeneousEvaluator:
    """Interval-valued homogeneous map; downstream consumers must treat the
    value as the whole interval, never the bare center."""

    defect_bound: Fraction = Fraction(0)
    name: str = ""

    def value(self, g) -> HomogenisedValue:
        raise NotImplementedError


class ExactHomogeneous(HomogeneousEvaluator):
    """A genuinely homogeneous evaluator known exactly (radius 0)."""

    def __init__(self, fn: Callable[[Element], Fraction], name: str, defect_bound: Fraction = Fraction(0)):
        self.fn = fn
        self.name = name
        self.defect_bound = defect_bound

    def value(self, g) -> HomogenisedValue:
        return HomogenisedValue(self.fn(g), Fraction(0), 1)


class HomogenisedQuasimorphism(HomogeneousEvaluator):
    """Interval homogenisation of a bare quasimorphism at a fixed power."""

    def __init__(self, q: Quasimorphism, oracle: GroupOracle, n: int = 64):
        self.q = q
        self.oracle = oracle
        self.n = n
        self.name = f"hat({q.name})"
        self.defect_bound = 2 * q.defect_bound

    def value(self, g) -> HomogenisedValue:
        return HomogenisedValue(
            self.q.evaluate(power(self.oracle, g, self.n)) / self.n,
            self.q.defect_bound / self.n,
            self.n,
        )


class RHat(HomogeneousEvaluator):
    """r_hat = delta * qhat_alpha + eps * phat(phi(.)), carried as intervals."""

    def __init__(
        self,
        ext: CentralExtension,
        p_hat: HomogeneousEvaluator,
        delta: Fraction = Fraction(1),
        eps: Fraction = Fraction(1),
        n_eval: int = 64,
    ):
        if ext.cocycle.declared_bound is None:
            raise UnboundedCocycle("r_hat needs a bounded cocycle")
        self.ext = ext
        self.p_hat = p_hat
        self.delta = delta
        self.eps = eps
        self.n_eval = n_eval
        self.name = f"{delta}*qhat_alpha + {eps}*{p_hat.name}.phi"
        self.defect_bound = abs(delta) * 2 * ext.cocycle.declared_bound + abs(eps) * p_hat.defect_bound

    def value(self, e) -> HomogenisedValue:
        raw = e.raw if isinstance(e, ExtensionElement) else e
        qa = q_alpha_hat(self.ext, raw, self.n_eval)
        pb = self.p_hat.value(self.ext.phi(raw))
        n_used = max(qa.n_used, pb.n_used)
        return HomogenisedValue(
            self.delta * qa.center + self.eps * pb.center,
            abs(self.delta) * qa.radius + abs(self.eps) * pb.radius,
            n_used,
        )


def build_r_hat(
    ext: CentralExtension,
    p_hat: HomogeneousEvaluator,
    delta: Fraction = Fraction(1),
    eps: Fraction = Fraction(1),
    n_eval: int = 64,
) -> RHat:
    return RHat(ext, p_hat, delta, eps, n_eval)


# -- the Heisenberg group as E_alpha ---------------------------------------


def heisenberg_to_extension(u: tuple[int, int, int]) -> tuple:
    """x^a y^b z^c  |->  ((a, b), c + a*b): an isomorphism onto E_alpha for
    the p1*q2 cocycle; the correction a*b is pinned by matching the
    commutator [x, y] to the central generator t."""
    a, b, c = u
    return ((a, b), c + a * b)


def extension_to_heisenberg(e: tuple) -> tuple[int, int, int]:
    (a, b), p = e
    return (a, b, p - a * b)
