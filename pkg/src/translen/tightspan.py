"""Injective-hull machinery on a finite metric space.

The tight span T_X sits inside P_X = {f : f(x) + f(y) >= d(x,y)}, and the
retraction P_X -> T_X is realised as the fixed-point iteration

    g  |->  (g + g*) / 2,       g*(x) = max_y (d(x,y) - g(y)).

Each step is 1-Lipschitz in the sup metric, preserves P_X, is equivariant
under isometries of X, and is pointwise non-increasing on P_X; the residual
sup(g - g*) at least halves per step, so the iteration converges
geometrically and often terminates at an exact fixed point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .metric import (
    FiniteMetricSpace,
    MetricFunction,
    affine_mean,
    kuratowski,
    sup_distance,
    _same_space,
)

DEFAULT_TOLERANCE = Fraction(1, 10**9)
DEFAULT_ITERATION_BUDGET = 10**4


class NotInPX(ValueError):
    """Input function violates f(x) + f(y) >= d(x,y)."""


class IterationBudgetExceeded(RuntimeError):
    pass


class EmptyTuple(ValueError):
    pass


@dataclass(frozen=True)
class TightSpanPoint:
    """An (approximately) extremal function with its residual certificate.

    certificate == sup_x |f(x) - f*(x)|; it is 0 exactly when f is a true
    tight-span point.
    """

    f: MetricFunction
    certificate: Fraction
    iterations: int

    @property
    def space(self) -> FiniteMetricSpace:
        return self.f.space

    @property
    def values(self) -> tuple[Fraction, ...]:
        return self.f.values


def star(f: MetricFunction) -> MetricFunction:
    """x |-> max_y (d(x,y) - f(y)).  Fixes exactly the tight-span points."""
    d = f.space.dist
    vals = tuple(max(row[y] - f.values[y] for y in range(f.space.n)) for row in d)
    return MetricFunction(f.space, vals)


def in_px(f: MetricFunction) -> bool:
    """Exact check of the P_X inequalities f(x) + f(y) >= d(x,y)."""
    d = f.space.dist
    v = f.values
    n = f.space.n
    return all(v[x] + v[y] >= d[x][y] for x in range(n) for y in range(x, n))


def retract(
    f: MetricFunction,
    eta: Fraction = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_ITERATION_BUDGET,
) -> TightSpanPoint:
    """Run the averaging iteration until the residual is 0 or <= eta."""
    if not in_px(f):
        raise NotInPX("retract requires a function in P_X")
    g = f
    for iteration in range(budget + 1):
        gs = star(g)
        residual = max(a - b for a, b in zip(g.values, gs.values))
        if residual == 0:
            return TightSpanPoint(g, Fraction(0), iteration)
        if residual <= eta:
            return TightSpanPoint(g, residual, iteration)
        nxt = MetricFunction(g.space, tuple((a + b) / 2 for a, b in zip(g.values, gs.values)))
        if __debug__:
            assert all(a <= b for a, b in zip(nxt.values, g.values)), "iterate must not increase"
            assert in_px(nxt), "iterate left P_X"
        g = nxt
    raise IterationBudgetExceeded(f"no fixed point within {budget} iterations")


def barycentre(
    indices: Sequence[int],
    space: FiniteMetricSpace,
    eta: Fraction = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_ITERATION_BUDGET,
) -> TightSpanPoint:
    """Retract of the affine mean of Kuratowski functions (repeats allowed)."""
    if len(indices) == 0:
        raise EmptyTuple("barycentre needs at least one point")
    mean = affine_mean([kuratowski(space, i) for i in indices])
    return retract(mean, eta, budget)


def midpoint(
    f: TightSpanPoint,
    g: TightSpanPoint,
    eta: Fraction = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_ITERATION_BUDGET,
) -> TightSpanPoint:
    """b_2 of two tight-span points: affine mean then retract.

    If both inputs carry certificate <= eta, the output lies within eta of
    the true midpoint: |d(f,m) - d(f,g)/2| <= eta.
    """
    _same_space(f.f, g.f)
    return retract(affine_mean([f.f, g.f]), eta, budget)


def dyadic_geodesic(
    f: TightSpanPoint,
    g: TightSpanPoint,
    depth: int,
    eta: Fraction = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_ITERATION_BUDGET,
) -> list[TightSpanPoint]:
    """2^depth + 1 points of the dyadic geodesic from f to g.

    Consecutive sup-gaps equal d(f,g)/2^depth within cumulative tolerance
    (2^depth - 1) * eta.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth == 0:
        return [f, g]
    m = midpoint(f, g, eta, budget)
    left = dyadic_geodesic(f, m, depth - 1, eta, budget)
    right = dyadic_geodesic(m, g, depth - 1, eta, budget)
    return left + right[1:]


def isometric_permutations(space: FiniteMetricSpace) -> list[tuple[int, ...]]:
    """All point permutations preserving the distance matrix (n <= 8)."""
    if space.n > 8:
        raise ValueError("full enumeration is only supported for n <= 8")
    d = space.dist
    n = space.n
    isos = []
    for sigma in itertools.permutations(range(n)):
        if all(d[sigma[i]][sigma[j]] == d[i][j] for i in range(n) for j in range(i + 1, n)):
            isos.append(sigma)
    return isos


def permute_function(f: MetricFunction, sigma: Sequence[int]) -> MetricFunction:
    """Push f forward along an isometry sigma: (sigma.f)(sigma(i)) = f(i)."""
    vals = [Fraction(0)] * f.space.n
    for i, v in enumerate(f.values):
        vals[sigma[i]] = v
    return MetricFunction(f.space, tuple(vals))


def repeated_tuple_deviation(
    indices: Sequence[int],
    space: FiniteMetricSpace,
    m: int,
    eta: Fraction = DEFAULT_TOLERANCE,
) -> Fraction:
    """Measured gap sup_distance(b_{nm}(tuple repeated m times), b_n(tuple)).

    The identity b_{nm} = b_n on repeated tuples holds only after a
    perturbation of the barycentre maps; here it is reported, not assumed.
    """
    base = barycentre(indices, space, eta)
    repeated = barycentre(list(indices) * m, space, eta)
    return sup_distance(base.f, repeated.f)
