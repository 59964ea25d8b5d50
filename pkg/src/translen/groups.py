"""Concrete finitely generated groups behind a uniform oracle interface.

Shipped oracles: free groups F_k, lattices Z^n, the integer Heisenberg
group in normal form x^a y^b z^c, and (from the extension module) cocycle
central extensions.  Word metrics are computed by BFS over the oracle's
generating set; elements are hashable normal forms, so BFS sets are exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional

Element = Hashable

DEFAULT_ELEMENT_BUDGET = 5 * 10**6


class BudgetExceeded(RuntimeError):
    pass


class BadLetter(ValueError):
    pass


class ParseError(ValueError):
    pass


class GroupOracle:
    """identity/multiply/invert/generators/canonical_key over opaque elements."""

    name: str = "group"

    @property
    def identity(self) -> Element:
        raise NotImplementedError

    def multiply(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def invert(self, a: Element) -> Element:
        raise NotImplementedError

    @property
    def generators(self) -> tuple[Element, ...]:
        """Finite generating set, closed under inversion."""
        raise NotImplementedError

    def canonical_key(self, a: Element) -> bytes:
        return repr(a).encode()

    def exact_distance(self, a: Element) -> Optional[int]:
        """Closed-form d(1,a) when the oracle knows one, else None."""
        return None

    def parse(self, text: str) -> Element:
        raise NotImplementedError

    def format(self, a: Element) -> str:
        return repr(a)


# -- free groups ---------------------------------------------------------
#
# Letters are nonzero ints: +k is the k-th generator, -k its inverse.
# Words are freely reduced tuples; reduction is a stack scan.

LETTER_NAMES = "abcdefghijklmnopqrstuvwxyz"


def reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if not isinstance(x, int) or x == 0:
            raise BadLetter(f"letters are nonzero ints, got {x!r}")
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


@dataclass(frozen=True)
class FreeWord:
    """A freely reduced word; build with :func:`reduce` or FreeGroup.parse."""

    letters: tuple[int, ...]

    @property
    def cyclically_reduced(self) -> bool:
        return not self.letters or self.letters[0] != -self.letters[-1]

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return word_to_str(self)


def reduce(letters: Iterable[int]) -> FreeWord:
    """Freely reduce; idempotent."""
    return FreeWord(reduce_letters(letters))


def cyclic_reduction(w: FreeWord) -> FreeWord:
    ls = list(w.letters)
    while len(ls) >= 2 and ls[0] == -ls[-1]:
        ls = ls[1:-1]
    return FreeWord(tuple(ls))


def word_to_str(w: FreeWord) -> str:
    if not w.letters:
        return "1"
    parts = []
    for x in w.letters:
        name = LETTER_NAMES[abs(x) - 1]
        parts.append(name if x > 0 else name.upper())
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:([a-zA-Z])(?:\^(-?\d+))?|(\()|(\)))")


def parse_word_letters(text: str, rank: int) -> list[int]:
    """Parse 'abAB', 'a^3 b^-2', or '(ab)^101' into signed letters."""

    def letter_of(ch: str) -> int:
        base = LETTER_NAMES.find(ch.lower())
        if base < 0 or base >= rank:
            raise ParseError(f"letter {ch!r} not among the first {rank} generators")
        return (base + 1) if ch.islower() else -(base + 1)

    pos = 0
    n = len(text)

    def parse_seq(depth: int) -> list[int]:
        nonlocal pos
        out: list[int] = []
        while pos < n:
            m = _TOKEN.match(text, pos)
            if not m:
                if text[pos:].strip() == "" or (depth > 0 and text[pos:].lstrip().startswith(")")):
                    break
                raise ParseError(f"cannot parse word at {text[pos:]!r}")
            if m.group(4):  # ')'
                if depth == 0:
                    raise ParseError("unbalanced ')'")
                break
            pos = m.end()
            if m.group(3):  # '('
                inner = parse_seq(depth + 1)
                m2 = re.match(r"\s*\)(?:\^(-?\d+))?", text[pos:])
                if not m2:
                    raise ParseError("unbalanced '('")
                pos += m2.end()
                exp = int(m2.group(1)) if m2.group(1) else 1
                out.extend(_repeat_letters(inner, exp))
            else:
                letter = letter_of(m.group(1))
                exp = int(m.group(2)) if m.group(2) else 1
                out.extend(_repeat_letters([letter], exp))
        return out

    letters = parse_seq(0)
    if text[pos:].strip():
        raise ParseError(f"trailing input {text[pos:]!r}")
    return letters


def _repeat_letters(letters: list[int], exp: int) -> list[int]:
    if exp >= 0:
        return letters * exp
    return [-x for x in reversed(letters)] * (-exp)


class FreeGroup(GroupOracle):
    def __init__(self, rank: int = 2):
        if rank < 1 or rank > len(LETTER_NAMES):
            raise ValueError("rank out of range")
        self.rank = rank
        self.name = f"free:{rank}"

    @property
    def identity(self) -> FreeWord:
        return FreeWord(())

    def multiply(self, a: FreeWord, b: FreeWord) -> FreeWord:
        return reduce(a.letters + b.letters)

    def invert(self, a: FreeWord) -> FreeWord:
        return FreeWord(tuple(-x for x in reversed(a.letters)))

    @property
    def generators(self) -> tuple[FreeWord, ...]:
        gens = []
        for k in range(1, self.rank + 1):
            gens.append(FreeWord((k,)))
            gens.append(FreeWord((-k,)))
        return tuple(gens)

    def canonical_key(self, a: FreeWord) -> bytes:
        return b"".join(x.to_bytes(2, "big", signed=True) for x in a.letters)

    def exact_distance(self, a: FreeWord) -> int:
        return len(a.letters)

    def parse(self, text: str) -> FreeWord:
        return reduce(parse_word_letters(text, self.rank))

    def format(self, a: FreeWord) -> str:
        return word_to_str(a)


# -- lattices Z^n ---------------------------------------------------------


class LatticeGroup(GroupOracle):
    """Z^n with the standard generators; n = 2 is named <a, t>."""

    def __init__(self, n: int = 2):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n
        self.name = f"lattice:{n}"
        if n == 1:
            self.letter_names = ("a",)
        elif n == 2:
            self.letter_names = ("a", "t")
        else:
            self.letter_names = tuple(LETTER_NAMES[i] for i in range(n))

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * self.n

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def invert(self, a):
        return tuple(-x for x in a)

    @property
    def generators(self):
        gens = []
        for i in range(self.n):
            e = [0] * self.n
            e[i] = 1
            gens.append(tuple(e))
            e[i] = -1
            gens.append(tuple(e))
        return tuple(gens)

    def canonical_key(self, a) -> bytes:
        return b"".join(x.to_bytes(8, "big", signed=True) for x in a)

    def exact_distance(self, a) -> int:
        return sum(abs(x) for x in a)

    def parse(self, text: str):
        exps = _parse_exponents(text, self.letter_names)
        return tuple(exps)

    def format(self, a) -> str:
        return " ".join(f"{name}^{x}" for name, x in zip(self.letter_names, a))


def _parse_exponents(text: str, names: tuple[str, ...]) -> list[int]:
    """Parse normal-form text like 'a^3 t^-2' (missing names mean exponent 0)."""
    exps = [0] * len(names)
    pos = 0
    pattern = re.compile(r"\s*([a-zA-Z])(?:\^(-?\d+))?")
    while pos < len(text):
        m = pattern.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"cannot parse element at {text[pos:]!r}")
        pos = m.end()
        ch = m.group(1)
        exp = int(m.group(2)) if m.group(2) else 1
        lower = ch.lower()
        if lower not in names:
            raise ParseError(f"unknown generator {ch!r}; expected one of {names}")
        if ch.isupper():
            exp = -exp
        exps[names.index(lower)] += exp
    return exps


# -- integer Heisenberg group ---------------------------------------------
#
# Normal form x^a y^b z^c for <x,y,z | [x,z]=[y,z]=1, [x,y]=z> with the
# convention [x,y] = x^-1 y^-1 x y, equivalently y x = x y z^-1.  Product:
#   (a1,b1,c1)(a2,b2,c2) = (a1+a2, b1+b2, c1+c2 - a2*b1).


class HeisenbergGroup(GroupOracle):
    name = "heisenberg"
    letter_names = ("x", "y", "z")

    @property
    def identity(self):
        return (0, 0, 0)

    def multiply(self, u, v):
        a1, b1, c1 = u
        a2, b2, c2 = v
        return (a1 + a2, b1 + b2, c1 + c2 - a2 * b1)

    def invert(self, u):
        a, b, c = u
        # (a,b,c)(-a,-b,?) = (0,0,c+? + a*b) = identity
        return (-a, -b, -c - a * b)

    @property
    def generators(self):
        # z is deliberately not a generator, so the centre is distorted
        return ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))

    def canonical_key(self, u) -> bytes:
        return b"".join(x.to_bytes(8, "big", signed=True) for x in u)

    def abelianization(self, u) -> tuple[int, int]:
        """The 1-Lipschitz epimorphism to Z^2 killing the centre."""
        return (u[0], u[1])

    def parse(self, text: str):
        exps = _parse_exponents(text, self.letter_names)
        # text is a normal form x^a y^b z^c, not a general word
        return (exps[0], exps[1], exps[2])

    def format(self, u) -> str:
        return f"x^{u[0]} y^{u[1]} z^{u[2]}"


# -- word metric ----------------------------------------------------------


def power(oracle: GroupOracle, g: Element, n: int) -> Element:
    """g^n by binary exponentiation; power(g, 0) is the identity."""
    if n < 0:
        return power(oracle, oracle.invert(g), -n)
    acc = oracle.identity
    base = g
    while n:
        if n & 1:
            acc = oracle.multiply(acc, base)
        n >>= 1
        if n:
            base = oracle.multiply(base, base)
    return acc


def word_ball(
    oracle: GroupOracle,
    radius: int,
    budget: int = DEFAULT_ELEMENT_BUDGET,
) -> dict[Element, int]:
    """Exact d(1,g) for every g in the radius ball, by BFS layers."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    dist: dict[Element, int] = {oracle.identity: 0}
    frontier = [oracle.identity]
    gens = oracle.generators
    for r in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = oracle.multiply(g, s)
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
                    if len(dist) > budget:
                        raise BudgetExceeded(f"ball exceeded {budget} elements at radius {r}")
        frontier = nxt
        if not frontier:
            break
    return dist


def word_distance(
    oracle: GroupOracle,
    g: Element,
    cap: int,
    budget: int = DEFAULT_ELEMENT_BUDGET,
    method: str = "auto",
) -> Optional[int]:
    """Exact d(1,g) if <= cap, else None.

    method='auto' uses the oracle's closed form when available;
    method='bfs' forces the bidirectional BFS (used by cross-check tests).
    """
    if cap < 0:
        raise ValueError("cap must be >= 0")
    if method == "auto":
        exact = oracle.exact_distance(g)
        if exact is not None:
            return exact if exact <= cap else None
    elif method != "bfs":
        raise ValueError(f"unknown method {method!r}")

    if g == oracle.identity:
        return 0
    gens = oracle.generators
    fwd: dict[Element, int] = {oracle.identity: 0}
    bwd: dict[Element, int] = {g: 0}
    fwd_frontier = [oracle.identity]
    bwd_frontier = [g]
    radius_f = radius_b = 0

    def expand(dist, frontier, r):
        nxt = []
        for e in frontier:
            for s in gens:
                h = oracle.multiply(e, s)
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
                    if len(fwd) + len(bwd) > budget:
                        raise BudgetExceeded(f"bidirectional BFS exceeded {budget} elements")
        return nxt

    # meeting at radii (a, b) proves d = min over the intersection of
    # dist_f + dist_b, because absence of a meet at (a-1, b) and (a, b-1)
    # forces d >= a + b
    while fwd_frontier or bwd_frontier:
        if radius_f + radius_b >= cap:
            meet = fwd.keys() & bwd.keys()
            if meet:
                d = min(fwd[x] + bwd[x] for x in meet)
                return d if d <= cap else None
            return None
        if len(fwd) <= len(bwd) and fwd_frontier or not bwd_frontier:
            radius_f += 1
            fwd_frontier = expand(fwd, fwd_frontier, radius_f)
        else:
            radius_b += 1
            bwd_frontier = expand(bwd, bwd_frontier, radius_b)
        meet = fwd.keys() & bwd.keys()
        if meet:
            return min(fwd[x] + bwd[x] for x in meet)
    return None  # both frontiers died: g unreachable within budgeted exploration


def parse_group(spec: str, cocycle_registry=None) -> GroupOracle:
    """Group selection strings: free:K, lattice:N, heisenberg, extension:<id>."""
    spec = spec.strip()
    if spec == "heisenberg":
        return HeisenbergGroup()
    if spec.startswith("free:"):
        return FreeGroup(int(spec.split(":", 1)[1]))
    if spec.startswith("lattice:"):
        return LatticeGroup(int(spec.split(":", 1)[1]))
    if spec.startswith("extension:"):
        if cocycle_registry is None:
            raise ParseError("extension groups need a cocycle registry")
        return cocycle_registry(spec.split(":", 1)[1])
    raise ParseError(f"unknown group spec {spec!r}")
