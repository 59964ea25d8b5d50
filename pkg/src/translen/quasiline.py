"""The quasiline Cay(Gamma, A) on the generating set A = {g : |s_hat(g)| < C}.

The graph is never materialised (A is infinite); every query is a
certified-bracket computation:

  lower bounds come from telescoping the defect: a product of k generators
  s_i has |s_hat(g)| <= sum |s_hat(s_i)| + (k-1) D < k (C + D), so
  d_L(1, g) > |s_hat(g)| / (C + D) strictly;

  upper bounds come from constructive decompositions.  For an exact linear
  s_hat on an integer lattice the decomposition problem is solved in closed
  form by integer weights (see ExactLinearForm); otherwise a truncated
  search over generating-set members found in an effort ball is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, gcd
from typing import Optional, Sequence

from .brooks import HomogenisedValue
from .extension import CentralExtension, ExactHomogeneous, HomogeneousEvaluator
from .groups import Element, GroupOracle, power, word_ball
from .translation import TauBracket


class TauNotCertified(RuntimeError):
    pass


def flatten_to_ints(oracle: GroupOracle, g: Element) -> Optional[tuple[int, ...]]:
    """Integer-vector coordinates for lattice and lattice-extension elements."""
    if isinstance(oracle, CentralExtension):
        base_vec = flatten_to_ints(oracle.base, g[0])
        if base_vec is not None:
            return base_vec + (g[1],)
        return None
    if isinstance(g, tuple) and all(isinstance(x, int) for x in g):
        return g
    return None


def _require_additive_coordinates(oracle: GroupOracle) -> None:
    """The closed-form weight arithmetic needs genuinely additive integer
    coordinates: lattices, and zero-cocycle extensions of such."""
    from .groups import LatticeGroup

    if isinstance(oracle, LatticeGroup):
        return
    if isinstance(oracle, CentralExtension) and oracle.cocycle.is_identically_zero:
        _require_additive_coordinates(oracle.base)
        return
    raise TypeError(f"oracle {oracle.name} does not expose additive integer coordinates")


class ExactLinearForm(ExactHomogeneous):
    """s_hat(g) = sum coeffs[i] * vec(g)[i], exact rational.

    Clearing denominators gives an integer weight W(g) with
    s_hat = W / scale; W is additive and surjects onto gcd(weights) * Z,
    and any kernel vector can be absorbed into a single factor of a
    decomposition without changing its weight.  Hence

        d_L(1, g) = max(ceil(|W(g)| / W_max), [g != 1]),

    where W_max is the largest achievable |weight| of a generating-set
    member (the largest multiple of gcd(weights) strictly below scale*C).
    """

    def __init__(self, oracle: GroupOracle, coeffs: Sequence[Fraction], name: str = "linear"):
        _require_additive_coordinates(oracle)
        self.oracle = oracle
        self.coeffs = tuple(Fraction(c) for c in coeffs)
        scale = 1
        for c in self.coeffs:
            scale = scale * c.denominator // gcd(scale, c.denominator)
        self.scale = scale
        self.weights = tuple(int(c * scale) for c in self.coeffs)
        self.weight_gcd = gcd(*[abs(w) for w in self.weights]) if any(self.weights) else 0
        super().__init__(self._evaluate, name, Fraction(0))

    def _evaluate(self, g: Element) -> Fraction:
        return Fraction(self.weight(g), self.scale)

    def vec(self, g: Element) -> tuple[int, ...]:
        v = flatten_to_ints(self.oracle, g)
        if v is None:
            raise TypeError(f"element {g!r} has no integer-vector coordinates")
        return v

    def weight(self, g: Element) -> int:
        return sum(w * x for w, x in zip(self.weights, self.vec(g), strict=True))

    def max_member_weight(self, C: Fraction) -> int:
        """Largest |W| of a member: the largest multiple of gcd < scale*C."""
        if self.weight_gcd == 0:
            return 0
        threshold = ceil(self.scale * C) - 1 if (self.scale * C).denominator == 1 else int(self.scale * C)
        return self.weight_gcd * (threshold // self.weight_gcd)

    def realize_weight(self, w: int) -> tuple[int, ...]:
        """Some integer vector with weight w (w a multiple of the gcd)."""
        n = len(self.weights)
        # extended gcd across the weight vector
        coeffs = [0] * n
        g = 0
        for i, wi in enumerate(self.weights):
            if wi == 0:
                continue
            if g == 0:
                g, coeffs[i] = abs(wi), (1 if wi > 0 else -1)
            else:
                a, b = _ext_gcd(g, abs(wi))
                new_g = g * a + abs(wi) * b
                coeffs = [c * a for c in coeffs]
                coeffs[i] = b * (1 if wi > 0 else -1)
                g = new_g
        if g == 0:
            raise ValueError("zero form cannot realise nonzero weights")
        if w % g:
            raise ValueError(f"weight {w} is not a multiple of gcd {g}")
        return tuple(c * (w // g) for c in coeffs)


def _ext_gcd(a: int, b: int) -> tuple[int, int]:
    """(x, y) with a*x + b*y = gcd(a, b), for a, b >= 0."""
    if b == 0:
        return (1, 0)
    x, y = _ext_gcd(b, a % b)
    return (y, x - (a // b) * y)


@dataclass
class QuasilineConfig:
    """Data of the quasiline: group, interval-valued s_hat, cut C >= 2D."""

    group: GroupOracle
    s_hat: HomogeneousEvaluator
    C: Fraction
    D: Fraction
    C0: Fraction
    g0: Element
    small_witness: Optional[Element] = None
    effort: int = 6
    _exact: Optional[ExactLinearForm] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.C < 2 * self.D:
            raise ValueError("need C >= 2 * defect(s_hat)")
        hv0 = self.s_hat.value(self.g0)
        if hv0.radius == 0 and abs(hv0.center) != self.C0:
            raise ValueError("C0 must equal |s_hat(g0)|")
        if self.small_witness is not None:
            hv = self.s_hat.value(self.small_witness)
            if not (hv.lower > 0 and hv.upper < self.C / 2):
                raise ValueError("witness must certify s_hat in (0, C/2)")
        if isinstance(self.s_hat, ExactLinearForm) and self.s_hat.max_member_weight(self.C) >= 1:
            self._exact = self.s_hat


def in_generating_set(cfg: QuasilineConfig, g: Element) -> str:
    """'yes' if the interval certifies |s_hat(g)| < C, 'no' if it certifies
    |s_hat(g)| > C, 'unknown' when it straddles the cut."""
    hv = cfg.s_hat.value(g)
    if hv.abs_upper() < cfg.C:
        return "yes"
    if hv.abs_lower() > cfg.C:
        return "no"
    return "unknown"


@dataclass(frozen=True)
class DistanceBounds:
    lower: int
    upper: Optional[int]
    method: str

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise ValueError(f"distance bounds inverted: {self.lower} > {self.upper}")


def _telescoping_lower(cfg: QuasilineConfig, g: Element) -> int:
    if g == cfg.group.identity:
        return 0
    low = cfg.s_hat.value(g).abs_lower()
    if low == 0:
        return 1
    x = low / (cfg.C + cfg.D)
    # strict: d > x, so d >= floor(x) + 1 even when x is an integer
    return max(1, int(x) + 1)


def exact_linear_distance(cfg: QuasilineConfig, g: Element) -> int:
    form = cfg._exact
    w = abs(form.weight(g))
    if w == 0:
        return 0 if g == cfg.group.identity else 1
    wmax = form.max_member_weight(cfg.C)
    return -(-w // wmax)


def decompose_exact(cfg: QuasilineConfig, g: Element) -> list[tuple[int, ...]]:
    """A witness decomposition of vec(g) into exactly d members (exact path)."""
    form = cfg._exact
    target = form.vec(g)
    w = form.weight(g)
    d = exact_linear_distance(cfg, g)
    if d == 0:
        return []
    wmax = form.max_member_weight(cfg.C)
    pieces = []
    remaining = w
    for _ in range(d - 1):
        # wmax and remaining are both multiples of the weight gcd
        step = max(-wmax, min(wmax, remaining))
        pieces.append(form.realize_weight(step))
        remaining -= step
    pieces.append(form.realize_weight(remaining))
    # fix the vector sum by absorbing one kernel vector into the last piece
    total = tuple(sum(col) for col in zip(*pieces))
    kernel = tuple(t - s for t, s in zip(target, total))
    assert sum(wi * ki for wi, ki in zip(form.weights, kernel)) == 0
    pieces[-1] = tuple(p + k for p, k in zip(pieces[-1], kernel))
    return pieces


def distance_bounds(cfg: QuasilineConfig, g: Element, effort: Optional[int] = None) -> DistanceBounds:
    """Certified (lower, upper) for d_L(1, g); upper may be unknown."""
    if g == cfg.group.identity:
        return DistanceBounds(0, 0, "identity")
    if cfg._exact is not None:
        d = exact_linear_distance(cfg, g)
        return DistanceBounds(d, d, "exact-linear-weights")
    lower = _telescoping_lower(cfg, g)
    if in_generating_set(cfg, g) == "yes":
        return DistanceBounds(lower, 1, "member")
    upper = _search_upper(cfg, g, cfg.effort if effort is None else effort)
    return DistanceBounds(lower, upper, "telescoping/search")


def _search_upper(cfg: QuasilineConfig, g: Element, effort: int) -> Optional[int]:
    """BFS in the quasiline over members harvested from an effort ball."""
    ball = word_ball(cfg.group, effort)
    members = [h for h in ball if h != cfg.group.identity and in_generating_set(cfg, h) == "yes"]
    if not members:
        return None
    seen = {cfg.group.identity: 0}
    frontier = [cfg.group.identity]
    for depth in range(1, effort + 1):
        nxt = []
        for e in frontier:
            for s in members:
                h = cfg.group.multiply(e, s)
                if h == g:
                    return depth
                if h not in seen and len(seen) < 200000:
                    seen[h] = depth
                    nxt.append(h)
        frontier = nxt
    return None


def tau_quasiline_bracket(cfg: QuasilineConfig, g: Element, n_max: int) -> TauBracket:
    """Certified bracket for tau_L(g) from powers up to n_max.

    Upper: min_n upper(g^n)/n (subadditivity of the true distance).
    Lower: each n gives tau >= |s_hat(g^n)|_low / (n (C + D)) because the
    true s_hat is homogeneous; the best sampled n is used.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    lower = Fraction(0)
    upper: Optional[Fraction] = None
    gn = cfg.group.identity
    for n in range(1, n_max + 1):
        gn = cfg.group.multiply(gn, g)
        low_n = cfg.s_hat.value(gn).abs_lower() / (n * (cfg.C + cfg.D))
        lower = max(lower, low_n)
        db = distance_bounds(cfg, gn)
        if db.upper is not None:
            u = Fraction(db.upper, n)
            upper = u if upper is None else min(upper, u)
    if upper is not None and lower > upper:
        # the integer-rounded upper can only exceed the true tau; the
        # telescoping lower is strict, so this cannot happen
        raise AssertionError(f"inverted quasiline bracket for {g!r}")
    return TauBracket(lower, upper, n_max, "defect telescoping", "min upper(g^n)/n")


def quasiline_from_evaluator(
    group: GroupOracle,
    s_hat: HomogeneousEvaluator,
    C: Fraction,
    D: Fraction,
    g0: Element,
    small_witness: Optional[Element] = None,
    effort: int = 6,
) -> QuasilineConfig:
    C0 = abs(s_hat.value(g0).center)
    return QuasilineConfig(group, s_hat, C, D, C0, g0, small_witness, effort)
