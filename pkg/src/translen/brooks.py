"""Counting quasimorphisms on free groups, with homogenisation intervals.

h_w(x) = #_w(x) - #_{w^-1}(x), where #_w(x) is the maximum number of
pairwise disjoint occurrences of the reduced spelling of w inside the
reduced spelling of x.  All occurrences of a fixed w have equal length, so
the greedy earliest-endpoint sweep attains the maximum.

Homogenised values are always carried as exact intervals
[center - radius, center + radius]; nothing downstream consumes a bare
float.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .groups import Element, FreeGroup, FreeWord, GroupOracle, power, reduce


class EmptyPattern(ValueError):
    pass


@dataclass(frozen=True)
class Quasimorphism:
    """An evaluator with a declared defect bound."""

    evaluate: Callable[[Element], Fraction]
    defect_bound: Fraction
    name: str

    def __call__(self, g: Element) -> Fraction:
        return self.evaluate(g)


@dataclass(frozen=True)
class HomogenisedValue:
    """q(g^n)/n with the telescoping error radius D/n; the true homogeneous
    value lies in [center - radius, center + radius]."""

    center: Fraction
    radius: Fraction
    n_used: int

    @property
    def lower(self) -> Fraction:
        return self.center - self.radius

    @property
    def upper(self) -> Fraction:
        return self.center + self.radius

    def abs_lower(self) -> Fraction:
        """Certified lower bound for |value|."""
        return max(Fraction(0), abs(self.center) - self.radius)

    def abs_upper(self) -> Fraction:
        return abs(self.center) + self.radius


def occurrences(pattern: tuple[int, ...], text: tuple[int, ...]) -> list[int]:
    """Start positions of pattern as a factor of text (letter strings)."""
    m, n = len(pattern), len(text)
    return [i for i in range(n - m + 1) if text[i : i + m] == pattern]


def count_disjoint(w: FreeWord, x: FreeWord) -> int:
    """Maximum cardinality of a set of disjoint occurrences of w in x."""
    if len(w.letters) == 0:
        raise EmptyPattern("pattern word must be nonempty")
    count = 0
    end = 0
    m = len(w.letters)
    text = x.letters
    for i in occurrences(w.letters, text):
        if i >= end:
            count += 1
            end = i + m
    return count


def count_disjoint_bruteforce(w: FreeWord, x: FreeWord) -> int:
    """Independent oracle: exhaustive search over subsets of occurrences."""
    if len(w.letters) == 0:
        raise EmptyPattern("pattern word must be nonempty")
    occ = occurrences(w.letters, x.letters)
    m = len(w.letters)
    best = 0
    for mask in range(1 << len(occ)):
        chosen = [occ[i] for i in range(len(occ)) if mask >> i & 1]
        if all(b - a >= m for a, b in zip(chosen, chosen[1:])):
            best = max(best, len(chosen))
    return best


def _invert_word(w: FreeWord) -> FreeWord:
    return FreeWord(tuple(-l for l in reversed(w.letters)))


def brooks(w: FreeWord) -> Quasimorphism:
    """The small counting quasimorphism h_w; defect at most 2."""
    if len(w.letters) == 0:
        raise EmptyPattern("pattern word must be nonempty")
    if not w.cyclically_reduced:
        raise ValueError("pattern must be cyclically reduced")
    w_inv = _invert_word(w)

    def evaluate(x: FreeWord) -> Fraction:
        return Fraction(count_disjoint(w, x) - count_disjoint(w_inv, x))

    return Quasimorphism(evaluate, Fraction(2), f"h_{{{w}}}")


def bbf_family_word(i: int, repetitions: int = 101) -> FreeWord:
    """(a^i b^i)^repetitions: the standard small-cancellation family."""
    block = [1] * i + [2] * i
    return reduce(block * repetitions)


def homogenize(q: Quasimorphism, oracle: GroupOracle, g: Element, n: int) -> HomogenisedValue:
    """center = q(g^n)/n, radius = defect_bound/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return HomogenisedValue(q.evaluate(power(oracle, g, n)) / n, q.defect_bound / Fraction(n), n)


def defect_sample(q: Quasimorphism, pairs: Iterable[tuple[Element, Element]], oracle: GroupOracle) -> Fraction:
    """max |q(g) + q(h) - q(gh)| over the sample: a lower bound for D(q)."""
    worst = Fraction(0)
    for g, h in pairs:
        worst = max(worst, abs(q.evaluate(g) + q.evaluate(h) - q.evaluate(oracle.multiply(g, h))))
    return worst


def random_reduced_word(rank: int, length: int, rng: random.Random) -> FreeWord:
    letters: list[int] = []
    while len(letters) < length:
        x = rng.choice([s for s in range(-rank, rank + 1) if s != 0])
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return FreeWord(tuple(letters))


def random_word_pairs(
    rank: int, count: int, max_len: int, seed: int
) -> list[tuple[FreeWord, FreeWord]]:
    rng = random.Random(seed)
    return [
        (
            random_reduced_word(rank, rng.randint(0, max_len), rng),
            random_reduced_word(rank, rng.randint(0, max_len), rng),
        )
        for _ in range(count)
    ]


@dataclass(frozen=True)
class CombinationSpec:
    """Finite weighted combination sum lambda_i * h_{w_i}."""

    terms: tuple[tuple[Fraction, FreeWord], ...]

    def __post_init__(self):
        for lam, w in self.terms:
            if lam == 0:
                raise ValueError("weights must be nonzero")
            if reduce(w.letters) != w or not w.cyclically_reduced:
                raise ValueError("pattern words must be reduced and cyclically reduced")

    @property
    def weight_sum(self) -> Fraction:
        return sum((abs(lam) for lam, _ in self.terms), Fraction(0))


def combine(spec: CombinationSpec) -> Quasimorphism:
    """Weighted sum of Brooks quasimorphisms; defect at most 2 * sum |lambda_i|.

    An infinite tail is invisible at any fixed x since h_w(x) = 0 whenever
    |w| > |x|, so finitely many terms lose nothing at evaluation time.
    """
    parts = [(lam, brooks(w), len(w.letters)) for lam, w in spec.terms]

    def evaluate(x: FreeWord) -> Fraction:
        total = Fraction(0)
        for lam, h, wlen in parts:
            if wlen <= len(x.letters):
                total += lam * h.evaluate(x)
        return total

    return Quasimorphism(evaluate, 2 * spec.weight_sum, "p_F")


def pullback(q: Quasimorphism, phi: Callable[[Element], Element], name: str = "") -> Quasimorphism:
    """q composed with a projection; same defect bound."""
    return Quasimorphism(lambda e: q.evaluate(phi(e)), q.defect_bound, name or f"{q.name}.pullback")
