"""Finite toy hierarchically-hyperbolic structures.

A structure is a finite set of domains (points, exact real lines, or
quasiline configs) with nesting/orthogonality tables, per-domain
projections, and rho-points, over one of the concrete group oracles.
Only the relation, rho, and coarse-Lipschitz fragments of the axioms are
validated; real-line projections are exact rationals, so translation
numbers on them are exact, while quasiline domains yield certified
brackets.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .extension import CentralExtension
from .groups import Element, GroupOracle, LatticeGroup, power, word_ball, word_distance
from .metric import as_fraction, format_fraction
from .quasiline import QuasilineConfig, distance_bounds, flatten_to_ints, tau_quasiline_bracket
from .translation import TauBracket

POINT = "point"
REAL_LINE = "real_line"
QUASILINE = "quasiline"


class StructureViolation(ValueError):
    def __init__(self, kind: str, witness, message: str = ""):
        super().__init__(f"{kind}: {witness!r} {message}".strip())
        self.kind = kind
        self.witness = witness


class EpsilonRange(ValueError):
    pass


class ParamRange(ValueError):
    pass


class TauNotCertified(RuntimeError):
    pass


@dataclass(frozen=True)
class LinearForm:
    """Exact linear projection over the integer coordinates of an element."""

    coeffs: tuple[Fraction, ...]
    formula: str = ""

    def evaluate(self, vec: Sequence[int]) -> Fraction:
        return sum((c * x for c, x in zip(self.coeffs, vec, strict=True)), Fraction(0))


@dataclass(frozen=True)
class Domain:
    id: str
    kind: str


@dataclass
class ToyHHGStructure:
    group: GroupOracle
    domains: dict[str, Domain]
    nesting: frozenset[tuple[str, str]]  # strict pairs (u, v) meaning u < v
    orthogonality: frozenset[frozenset[str]]
    maximal: str
    complexity: int
    E: Fraction = Fraction(1)
    line_forms: dict[str, LinearForm] = field(default_factory=dict)
    quasilines: dict[str, QuasilineConfig] = field(default_factory=dict)
    rho: dict[tuple[str, str], tuple[Fraction, Fraction]] = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    name: str = "structure"
    _additivity_ok: set = field(default_factory=set, init=False, repr=False)

    # -- relations ---------------------------------------------------------

    def nested_strict(self, u: str, v: str) -> bool:
        return (u, v) in self.nesting

    def nested(self, u: str, v: str) -> bool:
        return u == v or (u, v) in self.nesting

    def orthogonal(self, u: str, v: str) -> bool:
        return frozenset((u, v)) in self.orthogonality

    def transverse(self, u: str, v: str) -> bool:
        return (
            u != v
            and not self.nested(u, v)
            and not self.nested(v, u)
            and not self.orthogonal(u, v)
        )

    # -- projections ---------------------------------------------------------

    def vec(self, g: Element) -> tuple[int, ...]:
        v = flatten_to_ints(self.group, g)
        if v is None:
            raise TypeError(f"no integer coordinates for {g!r}")
        return v

    def project_line(self, u: str, g: Element) -> Fraction:
        return self.line_forms[u].evaluate(self.vec(g))

    def domain_distance(self, u: str, x: Element, y: Element) -> tuple[Fraction, Optional[Fraction]]:
        """(lower, upper) bounds for dist_U(x, y); exact kinds coincide."""
        kind = self.domains[u].kind
        if kind == POINT:
            return (Fraction(0), Fraction(0))
        if kind == REAL_LINE:
            d = abs(self.project_line(u, x) - self.project_line(u, y))
            return (d, d)
        cfg = self.quasilines[u]
        diff = cfg.group.multiply(cfg.group.invert(x), y)
        db = distance_bounds(cfg, diff)
        return (Fraction(db.lower), None if db.upper is None else Fraction(db.upper))

    def check_line_additivity(self, u: str, samples: int = 10**4, seed: int = 7) -> None:
        """Assert pi_U(gh) = pi_U(g) + pi_U(h) on sampled pairs before any
        drift shortcut is used for this domain."""
        if u in self._additivity_ok:
            return
        rng = random.Random(seed)
        gens = self.group.generators
        for _ in range(samples):
            g = self.group.identity
            h = self.group.identity
            for _ in range(rng.randint(0, 6)):
                g = self.group.multiply(g, rng.choice(gens))
            for _ in range(rng.randint(0, 6)):
                h = self.group.multiply(h, rng.choice(gens))
            lhs = self.project_line(u, self.group.multiply(g, h))
            rhs = self.project_line(u, g) + self.project_line(u, h)
            if lhs != rhs:
                raise StructureViolation("projection-not-additive", (u, g, h))
        self._additivity_ok.add(u)

    def translation_number(self, u: str, g: Element) -> Fraction:
        """Signed per-step drift on a real line; tau is its absolute value."""
        self.check_line_additivity(u)
        return self.project_line(u, g)


# -- validation --------------------------------------------------------------


def validate_structure(
    s: ToyHHGStructure,
    pair_samples: int = 200,
    seed: int = 11,
    cap: int = 24,
) -> dict:
    ids = sorted(s.domains)
    for u, v in s.nesting:
        if u == v:
            raise StructureViolation("nesting-reflexive-pair", (u, v))
        if (v, u) in s.nesting:
            raise StructureViolation("nesting-not-antisymmetric", (u, v))
    for u, v in s.nesting:
        for w in ids:
            if s.nested_strict(v, w) and not s.nested_strict(u, w):
                raise StructureViolation("nesting-not-transitive", (u, v, w))
    for pair in s.orthogonality:
        if len(pair) != 2:
            raise StructureViolation("orthogonality-not-irreflexive", tuple(pair))

    # the three relations partition all unordered pairs of distinct domains
    for u, v in itertools.combinations(ids, 2):
        comparable = s.nested_strict(u, v) or s.nested_strict(v, u)
        orth = s.orthogonal(u, v)
        if comparable and orth:
            raise StructureViolation("relations-overlap", (u, v))

    # orthogonality inheritance: U < V and V perp W  =>  U perp W
    for u, v in s.nesting:
        for w in ids:
            if w not in (u, v) and s.orthogonal(v, w) and not s.orthogonal(u, w):
                raise StructureViolation("orthogonality-inheritance", (u, v, w))

    if s.maximal not in s.domains:
        raise StructureViolation("maximal-missing", s.maximal)
    for u in ids:
        if u != s.maximal and not s.nested_strict(u, s.maximal):
            raise StructureViolation("maximal-not-above", u)
    if any(s.nested_strict(s.maximal, u) for u in ids):
        raise StructureViolation("maximal-not-maximal", s.maximal)

    chain = _longest_chain(s, ids)
    if chain > s.complexity:
        raise StructureViolation("complexity-chain", chain, f"> {s.complexity}")
    clique = _largest_orthogonal_set(s, ids)
    if clique > s.complexity:
        raise StructureViolation("complexity-orthogonal-set", clique, f"> {s.complexity}")

    # rho consistency: U < V < W  =>  rho^U_W within E of rho^V_W
    for u, v in s.nesting:
        for w in ids:
            if s.nested_strict(v, w):
                pu = s.rho.get((u, w))
                pv = s.rho.get((v, w))
                if pu is None or pv is None:
                    raise StructureViolation("rho-missing", (u, v, w))
                if abs(pu[0] - pv[0]) > s.E + pu[1] + pv[1]:
                    raise StructureViolation("rho-consistency", (u, v, w))

    lipschitz_checked = _check_coarse_lipschitz(s, pair_samples, seed, cap)
    return {
        "domains": len(ids),
        "chain": chain,
        "orthogonal_set": clique,
        "lipschitz_pairs": lipschitz_checked,
    }


def _longest_chain(s: ToyHHGStructure, ids) -> int:
    best = 1

    def extend(u, depth):
        nonlocal best
        best = max(best, depth)
        for v in ids:
            if s.nested_strict(u, v):
                extend(v, depth + 1)

    for u in ids:
        extend(u, 1)
    return best


def _largest_orthogonal_set(s: ToyHHGStructure, ids) -> int:
    best = 1 if ids else 0
    for r in range(2, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            if all(s.orthogonal(u, v) for u, v in itertools.combinations(combo, 2)):
                best = max(best, r)
    return best


def _check_coarse_lipschitz(s: ToyHHGStructure, pair_samples: int, seed: int, cap: int) -> int:
    rng = random.Random(seed)
    gens = s.group.generators
    checked = 0
    for _ in range(pair_samples):
        g = s.group.identity
        for _ in range(rng.randint(0, 5)):
            g = s.group.multiply(g, rng.choice(gens))
        d = word_distance(s.group, g, cap)
        if d is None:
            continue
        for u, dom in s.domains.items():
            low, up = s.domain_distance(u, s.group.identity, g)
            bound = s.E * d + s.E
            value = up if up is not None else low
            if value > bound:
                raise StructureViolation("coarsely-lipschitz", (u, g), f"{value} > {bound}")
        checked += 1
    return checked


# -- builders ----------------------------------------------------------------


def make_z2_epsilon(eps: Fraction) -> ToyHHGStructure:
    """The three-domain structure on Z^2 = <a, t> with pi_U = (p+q)eps - p
    and pi_V = p.  eps = 1 degenerates to coordinate projections and is
    accepted for testing."""
    eps = as_fraction(eps)
    if not 0 < eps <= 1:
        raise EpsilonRange("eps must lie in (0, 1]")
    return _two_line_structure(
        u_form=LinearForm((eps - 1, eps), "(p+q)*eps - p"),
        v_form=LinearForm((Fraction(1), Fraction(0)), "p"),
        params={"eps": eps},
        name=f"z2-eps:{eps}",
    )


def make_z2_delta_epsilon(delta: Fraction, eps: Fraction) -> ToyHHGStructure:
    """Variant with pi_V = (p+q)*delta - q, keeping pi_U."""
    delta, eps = as_fraction(delta), as_fraction(eps)
    if not 0 < eps <= 1 or not 0 < delta <= 1:
        raise ParamRange("delta and eps must lie in (0, 1]")
    return _two_line_structure(
        u_form=LinearForm((eps - 1, eps), "(p+q)*eps - p"),
        v_form=LinearForm((delta, delta - 1), "(p+q)*delta - q"),
        params={"eps": eps, "delta": delta},
        name=f"z2-delta-eps:{delta}:{eps}",
    )


def _two_line_structure(u_form, v_form, params, name) -> ToyHHGStructure:
    group = LatticeGroup(2)
    domains = {
        "S": Domain("S", POINT),
        "U": Domain("U", REAL_LINE),
        "V": Domain("V", REAL_LINE),
    }
    zero = (Fraction(0), Fraction(0))
    return ToyHHGStructure(
        group=group,
        domains=domains,
        nesting=frozenset({("U", "S"), ("V", "S")}),
        orthogonality=frozenset({frozenset(("U", "V"))}),
        maximal="S",
        complexity=2,
        E=Fraction(1),
        line_forms={"U": u_form, "V": v_form},
        rho={("U", "S"): zero, ("V", "S"): zero},
        params=params,
        name=name,
    )


def make_z_line() -> ToyHHGStructure:
    """The trivial structure on Z: a single real line."""
    group = LatticeGroup(1)
    return ToyHHGStructure(
        group=group,
        domains={"S": Domain("S", REAL_LINE)},
        nesting=frozenset(),
        orthogonality=frozenset(),
        maximal="S",
        complexity=1,
        E=Fraction(1),
        line_forms={"S": LinearForm((Fraction(1),), "p")},
        params={},
        name="z-line",
    )


def extend_with_quasiline(
    base: ToyHHGStructure,
    cfg: QuasilineConfig,
    ext: CentralExtension,
    tau_check_n: int = 64,
) -> ToyHHGStructure:
    """The product-extension structure on E: base domains (projections
    factored through phi), a quasiline domain A, and a new point cone S_E.

    Requires a certified positive translation length for the central t on
    the quasiline."""
    if cfg.group is not ext:
        raise ValueError("quasiline config must live over the extension")
    t_bracket = tau_quasiline_bracket(cfg, ext.t, tau_check_n)
    if not t_bracket.lower > 0:
        raise TauNotCertified(f"tau_L(t) lower bound is {t_bracket.lower}")

    if isinstance(base.group, LatticeGroup):
        base_dim = base.group.n
    else:
        raise ValueError("extension structures are built over lattice bases")

    def lift_form(form: LinearForm) -> LinearForm:
        # same coefficients over the base block, 0 on the fibre coordinate
        return LinearForm(tuple(form.coeffs) + (Fraction(0),), form.formula)

    domains = {u: Domain(u, d.kind) for u, d in base.domains.items()}
    if "A" in domains or "S_E" in domains:
        raise ValueError("domain ids A and S_E are reserved for the extension")
    domains["A"] = Domain("A", QUASILINE)
    domains["S_E"] = Domain("S_E", POINT)

    nesting = set(base.nesting)
    orthogonality = set(base.orthogonality)
    zero = (Fraction(0), Fraction(0))
    rho = dict(base.rho)
    for u in base.domains:
        nesting.add((u, "S_E"))
        orthogonality.add(frozenset((u, "A")))
        rho[(u, "S_E")] = zero
    nesting.add(("A", "S_E"))
    rho[("A", "S_E")] = zero

    line_forms = {}
    for u, form in base.line_forms.items():
        if base.domains[u].kind == REAL_LINE:
            line_forms[u] = lift_form(form)

    ids = sorted(domains)
    chain = 0
    orth = 0
    s = ToyHHGStructure(
        group=ext,
        domains=domains,
        nesting=frozenset(nesting),
        orthogonality=frozenset(orthogonality),
        maximal="S_E",
        complexity=base.complexity,  # provisional; fixed below
        E=base.E,
        line_forms=line_forms,
        quasilines={"A": cfg},
        rho=rho,
        params=dict(base.params),
        name=f"ext({base.name})",
    )
    chain = _longest_chain(s, ids)
    orth = _largest_orthogonal_set(s, ids)
    s.complexity = max(chain, orth)
    return s


# -- scans -------------------------------------------------------------------


def relevant_domains(s: ToyHHGStructure, x: Element, y: Element, D: Fraction) -> set[str]:
    """Domains whose projection distance is certified >= D."""
    if D <= 0:
        raise ValueError("D must be positive")
    out = set()
    for u in s.domains:
        low, _ = s.domain_distance(u, x, y)
        if low >= D:
            out.add(u)
    return out


@dataclass(frozen=True)
class DFScanReport:
    """Empirical distance-formula constants over a ball.

    ratio_constant: max of d/sum and sum/d over scanned elements with the
    thresholded projection sum (the multiplicative comparison; this is the
    quantity with the clean O(1/eps) scaling).
    affine_constant: smallest verified A with
    (1/A) d - A <= sum <= A d + A for every scanned element.
    """

    ratio_constant: Fraction
    affine_constant: Fraction
    radius: int
    D: Fraction
    elements_scanned: int
    ratio_witness: tuple
    affine_witness: tuple


def df_ratio_scan(s: ToyHHGStructure, radius: int, D: Fraction, budget: int = 10**6) -> DFScanReport:
    D = as_fraction(D)
    ball = word_ball(s.group, radius, budget)
    rows = []
    for g, d in ball.items():
        if d == 0:
            continue
        sum_lower = Fraction(0)
        sum_upper = Fraction(0)
        for u in s.domains:
            low, up = s.domain_distance(u, s.group.identity, g)
            if up is None:
                up = low  # quasiline with unknown upper: conservative for ratio only
            if low >= D:
                sum_lower += low
            if up >= D:
                sum_upper += up
        rows.append((g, d, sum_lower, sum_upper))

    ratio = Fraction(1)
    ratio_witness = (s.group.identity, 0)
    for g, d, sl, su in rows:
        if sl > 0 and Fraction(d, 1) / sl > ratio:
            ratio = Fraction(d, 1) / sl
            ratio_witness = (g, d)
        if su / d > ratio:
            ratio = su / d
            ratio_witness = (g, d)

    def affine_ok(A: Fraction) -> bool:
        return all(su <= A * d + A and Fraction(d) <= A * sl + A * A for g, d, sl, su in rows)

    lo, hi = Fraction(0), Fraction(1)
    while not affine_ok(hi):
        hi *= 2
    for _ in range(24):
        mid = (lo + hi) / 2
        if affine_ok(mid):
            hi = mid
        else:
            lo = mid
    affine = hi
    affine_witness = max(rows, key=lambda r: Fraction(r[1]) - affine * r[2]) if rows else (None, 0)
    return DFScanReport(ratio, affine, radius, D, len(rows), ratio_witness, (affine_witness[0], affine_witness[1]))


def tau_per_domain(s: ToyHHGStructure, g: Element, n_max: int = 64) -> dict[str, TauBracket]:
    out = {}
    for u, dom in s.domains.items():
        if dom.kind == POINT:
            out[u] = TauBracket(Fraction(0), Fraction(0), 1, "point", "point")
        elif dom.kind == REAL_LINE:
            v = abs(s.translation_number(u, g))
            out[u] = TauBracket(v, v, 1, "exact drift", "exact drift")
        else:
            out[u] = tau_quasiline_bracket(s.quasilines[u], g, n_max)
    return out


@dataclass(frozen=True)
class BigSetReport:
    """Finite-horizon orbit diameters per domain.

    real_line domains are classified exactly (nonzero drift iff unbounded
    orbit); quasiline domains use the heuristic 'diameter at N exceeds the
    diameter at N/2 by more than E', and carry the horizon so the claim is
    falsifiable.  point domains are bounded."""

    g: Element
    horizon: int
    diameters: dict
    growing: frozenset[str]
    bounded: dict


def bigset_report(s: ToyHHGStructure, g: Element, horizon: int = 64) -> BigSetReport:
    growing = set()
    bounded = {}
    diameters = {}
    for u, dom in s.domains.items():
        if dom.kind == POINT:
            diameters[u] = (Fraction(0), Fraction(0))
            bounded[u] = Fraction(0)
        elif dom.kind == REAL_LINE:
            v = s.translation_number(u, g)
            diam = 2 * horizon * abs(v)
            diameters[u] = (diam, diam)
            if v != 0:
                growing.add(u)
            else:
                bounded[u] = Fraction(0)
        else:
            cfg = s.quasilines[u]
            low_full = _orbit_diameter_lower(cfg, g, horizon)
            up_half = _orbit_diameter_upper(cfg, g, horizon // 2)
            diameters[u] = (low_full, up_half)
            if up_half is not None and low_full > up_half + s.E:
                growing.add(u)
            else:
                bounded[u] = up_half if up_half is not None else low_full
    return BigSetReport(g, horizon, diameters, frozenset(growing), bounded)


def _orbit_diameter_lower(cfg: QuasilineConfig, g: Element, n: int) -> Fraction:
    span = power(cfg.group, g, 2 * n)
    return Fraction(distance_bounds(cfg, span).lower)


def _orbit_diameter_upper(cfg: QuasilineConfig, g: Element, n: int) -> Optional[Fraction]:
    best = Fraction(0)
    acc = cfg.group.identity
    for _ in range(2 * n):
        acc = cfg.group.multiply(acc, g)
        db = distance_bounds(cfg, acc)
        if db.upper is None:
            return None
        best = max(best, Fraction(db.upper))
    return best


@dataclass(frozen=True)
class ProbeWitness:
    g: Element
    power_used: int
    domain: str
    bracket: TauBracket


def discreteness_probe(
    s: ToyHHGStructure,
    tau0: Fraction,
    box_radius: int = 0,
    cf_bound: int = 2000,
    extra_elements: Sequence[Element] = (),
    n_max: int = 128,
    horizon: int = 64,
) -> list[ProbeWitness]:
    """All sampled (g, U) with certified 0 < tau_U(g^{c!}) < tau0.

    Candidates come from a word ball, continued-fraction approximants of
    every linear slope in the structure, and any explicit extras.  A
    certified positive bracket proves Big-membership regardless of the
    finite-horizon classification, so every domain is probed."""
    tau0 = as_fraction(tau0)
    if tau0 <= 0:
        raise ValueError("tau0 must be positive")
    candidates: list[Element] = list(extra_elements)
    if box_radius > 0:
        candidates.extend(word_ball(s.group, box_radius))
    candidates.extend(_cf_candidates(s, cf_bound))

    c_fact = math.factorial(s.complexity)
    witnesses = []
    seen = set()
    for g in candidates:
        if g == s.group.identity or g in seen:
            continue
        seen.add(g)
        h = power(s.group, g, c_fact)
        report = bigset_report(s, g, horizon)
        certified_growing = set(report.growing)
        for u, bracket in tau_per_domain(s, h, n_max).items():
            if bracket.lower > 0:
                certified_growing.add(u)
            if bracket.lower > 0 and bracket.upper is not None and bracket.upper < tau0:
                witnesses.append(ProbeWitness(g, c_fact, u, bracket))
        for u, v in itertools.combinations(sorted(certified_growing), 2):
            if not s.orthogonal(u, v):
                raise StructureViolation("bigset-not-orthogonal", (g, u, v))
    return witnesses


def continued_fraction_convergents(x: Fraction, max_den: int) -> list[tuple[int, int]]:
    """(numerator, denominator) convergents of x with denominator <= max_den."""
    out = []
    h0, h1 = 1, 0
    k0, k1 = 0, 1
    rest = x
    while True:
        a = math.floor(rest)
        h0, h1 = a * h0 + h1, h0
        k0, k1 = a * k0 + k1, k0
        if k0 > max_den:
            break
        out.append((h0, k0))
        frac = rest - a
        if frac == 0:
            break
        rest = 1 / frac
    return out


def _cf_candidates(s: ToyHHGStructure, bound: int) -> list[Element]:
    """Elements making each linear form small, from CF approximants of the
    pairwise coefficient slopes."""
    forms: list[tuple[tuple[Fraction, ...], int]] = []
    dim = None
    for u, f in s.line_forms.items():
        forms.append((f.coeffs, len(f.coeffs)))
        dim = len(f.coeffs)
    for u, cfg in s.quasilines.items():
        exact = cfg._exact
        if exact is not None:
            forms.append((exact.coeffs, len(exact.coeffs)))
            dim = len(exact.coeffs)
    if dim is None:
        return []

    def build(vec: Sequence[int]) -> Optional[Element]:
        if isinstance(s.group, LatticeGroup):
            return tuple(vec)
        if isinstance(s.group, CentralExtension) and isinstance(s.group.base, LatticeGroup):
            return (tuple(vec[:-1]), vec[-1])
        return None

    out = []
    for coeffs, k in forms:
        nonzero = [i for i, c in enumerate(coeffs) if c != 0]
        for i, j in itertools.combinations(nonzero, 2):
            slope = -coeffs[i] / coeffs[j]
            for num, den in continued_fraction_convergents(slope, bound):
                vec = [0] * k
                vec[i] = den
                vec[j] = num
                e = build(vec)
                if e is not None:
                    out.append(e)
                    out.append(s.group.invert(e))
    return out


# -- structural isomorphism ---------------------------------------------------


def structures_isomorphic(s1: ToyHHGStructure, s2: ToyHHGStructure) -> Optional[dict]:
    """A domain bijection preserving nesting, orthogonality, the maximal
    element, and kind classes (point vs unbounded line-like); among matched
    real-line pairs, exact coefficient agreement is reported per pair."""
    ids1, ids2 = sorted(s1.domains), sorted(s2.domains)
    if len(ids1) != len(ids2):
        return None

    def kind_class(dom: Domain) -> str:
        return POINT if dom.kind == POINT else "line-like"

    best = None
    for perm in itertools.permutations(ids2):
        mapping = dict(zip(ids1, perm))
        if any(kind_class(s1.domains[u]) != kind_class(s2.domains[mapping[u]]) for u in ids1):
            continue
        if mapping[s1.maximal] != s2.maximal:
            continue
        if any(
            s1.nested_strict(u, v) != s2.nested_strict(mapping[u], mapping[v])
            for u in ids1
            for v in ids1
        ):
            continue
        if any(
            s1.orthogonal(u, v) != s2.orthogonal(mapping[u], mapping[v])
            for u, v in itertools.combinations(ids1, 2)
        ):
            continue
        exact_matches = []
        for u in ids1:
            v = mapping[u]
            if u in s1.line_forms and v in s2.line_forms:
                if s1.line_forms[u].coeffs == s2.line_forms[v].coeffs:
                    exact_matches.append((u, v))
        candidate = {"mapping": mapping, "exact_projection_matches": exact_matches}
        if best is None or len(exact_matches) > len(best["exact_projection_matches"]):
            best = candidate
    return best


# -- JSON interchange ---------------------------------------------------------

_NUM = re.compile(r"\s*(\d+(?:/\d+)?)")
_VAR = re.compile(r"\s*([a-zA-Z_][a-zA-Z_0-9]*)")


def parse_linear_formula(
    text: str, params: dict[str, Fraction], variables: Sequence[str] = ("p", "q")
) -> LinearForm:
    """Parse the restricted grammar over p, q, eps, delta: sums, differences,
    scalar products, and parentheses; must be linear in the variables."""
    variables = tuple(variables)
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_expr():
        nonlocal pos
        acc = parse_term()
        while True:
            skip_ws()
            if pos < n and text[pos] in "+-":
                op = text[pos]
                pos += 1
                t = parse_term()
                acc = _lin_add(acc, t if op == "+" else _lin_scale(t, Fraction(-1)))
            else:
                return acc

    def parse_term():
        nonlocal pos
        acc = parse_factor()
        while True:
            skip_ws()
            if pos < n and text[pos] == "*":
                pos += 1
                rhs = parse_factor()
                acc = _lin_mul(acc, rhs)
            else:
                return acc

    def parse_factor():
        nonlocal pos
        skip_ws()
        if pos < n and text[pos] == "-":
            pos += 1
            return _lin_scale(parse_factor(), Fraction(-1))
        if pos < n and text[pos] == "(":
            pos += 1
            inner = parse_expr()
            skip_ws()
            if pos >= n or text[pos] != ")":
                raise ValueError("unbalanced parenthesis in formula")
            pos += 1
            return inner
        m = _NUM.match(text, pos)
        if m:
            pos = m.end()
            return (tuple(Fraction(0) for _ in variables), Fraction(m.group(1)))
        m = _VAR.match(text, pos)
        if m:
            name = m.group(1)
            pos = m.end()
            if name in variables:
                coeffs = tuple(
                    Fraction(1) if v == name else Fraction(0) for v in variables
                )
                return (coeffs, Fraction(0))
            if name in params:
                return (tuple(Fraction(0) for _ in variables), params[name])
            raise ValueError(f"unknown symbol {name!r} in formula")
        raise ValueError(f"cannot parse formula at {text[pos:]!r}")

    coeffs, const = parse_expr()
    skip_ws()
    if pos != n:
        raise ValueError(f"trailing input in formula: {text[pos:]!r}")
    if const != 0:
        raise ValueError("projection formulas must vanish at the identity")
    return LinearForm(coeffs, text.strip())


def _lin_add(a, b):
    return (tuple(x + y for x, y in zip(a[0], b[0])), a[1] + b[1])


def _lin_scale(a, c: Fraction):
    return (tuple(c * x for x in a[0]), c * a[1])


def _lin_mul(a, b):
    if any(x != 0 for x in a[0]) and any(x != 0 for x in b[0]):
        raise ValueError("formula is not linear in the variables")
    if any(x != 0 for x in a[0]):
        return _lin_scale(a, b[1])
    return _lin_scale(b, a[1])


def dump_structure(s: ToyHHGStructure) -> dict:
    domains = []
    for u, dom in sorted(s.domains.items()):
        entry: dict = {"id": u, "kind": dom.kind}
        if dom.kind == REAL_LINE:
            entry["formula"] = s.line_forms[u].formula
        elif dom.kind == QUASILINE:
            cfg = s.quasilines[u]
            if cfg._exact is not None:
                entry["coeffs"] = [format_fraction(c) for c in cfg._exact.coeffs]
                entry["C"] = format_fraction(cfg.C)
        domains.append(entry)
    return {
        "group": s.group.name,
        "E": format_fraction(s.E),
        "complexity": s.complexity,
        "maximal": s.maximal,
        "params": {k: format_fraction(as_fraction(v)) for k, v in s.params.items()},
        "domains": domains,
        "nesting": sorted([u, v] for u, v in s.nesting),
        "orthogonality": sorted(sorted(p) for p in s.orthogonality),
    }


def load_structure(obj: dict) -> ToyHHGStructure:
    """Rebuild a lattice-based structure (point/real_line domains) from JSON."""
    from .groups import parse_group

    group = parse_group(obj["group"])
    if not isinstance(group, LatticeGroup):
        raise ValueError("only lattice-based structures can be loaded from JSON")
    params = {k: as_fraction(v) for k, v in obj.get("params", {}).items()}
    variables = ("p", "q")[: group.n] if group.n <= 2 else tuple(f"x{i}" for i in range(group.n))
    domains = {}
    line_forms = {}
    for entry in obj["domains"]:
        u, kind = entry["id"], entry["kind"]
        if kind not in (POINT, REAL_LINE):
            raise ValueError(f"cannot load domain kind {kind!r} from JSON")
        domains[u] = Domain(u, kind)
        if kind == REAL_LINE:
            line_forms[u] = parse_linear_formula(entry["formula"], params, variables)
    nesting = frozenset((u, v) for u, v in obj["nesting"])
    orthogonality = frozenset(frozenset(p) for p in obj["orthogonality"])
    zero = (Fraction(0), Fraction(0))
    rho = {(u, v): zero for u, v in nesting}
    return ToyHHGStructure(
        group=group,
        domains=domains,
        nesting=nesting,
        orthogonality=orthogonality,
        maximal=obj["maximal"],
        complexity=int(obj["complexity"]),
        E=as_fraction(obj.get("E", 1)),
        line_forms=line_forms,
        rho=rho,
        params=params,
        name=obj.get("name", "loaded"),
    )
