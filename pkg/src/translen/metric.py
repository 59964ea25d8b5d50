"""Exact finite metric spaces and the sup-metric function space over them.

All distances are `fractions.Fraction`; no floating point enters any code
path here, so downstream fixed-point iterations can detect exact
termination and tests can assert equalities instead of tolerances.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class MetricError(ValueError):
    """Base class for metric validation failures."""


class Asymmetric(MetricError):
    def __init__(self, i: int, j: int):
        super().__init__(f"dist[{i}][{j}] != dist[{j}][{i}]")
        self.witness = (i, j)


class NegativeEntry(MetricError):
    """An entry is negative, or an off-diagonal entry is not positive."""

    def __init__(self, i: int, j: int):
        super().__init__(f"dist[{i}][{j}] must be positive for i != j, nonnegative on the diagonal")
        self.witness = (i, j)


class NonzeroDiagonal(MetricError):
    def __init__(self, i: int):
        super().__init__(f"dist[{i}][{i}] != 0")
        self.witness = (i,)


class TriangleViolation(MetricError):
    def __init__(self, i: int, j: int, k: int):
        super().__init__(f"dist[{i}][{j}] > dist[{i}][{k}] + dist[{k}][{j}]")
        self.witness = (i, j, k)


class SpaceMismatch(ValueError):
    """Two functions live over different spaces."""


class IndexOutOfRange(IndexError):
    pass


def as_fraction(x) -> Fraction:
    """Parse an exact rational from int/Fraction/'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not an exact rational: {x!r}")


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite set of labelled points with an exact distance matrix.

    Construct through :func:`validate_metric`; direct construction skips
    the invariant checks.
    """

    labels: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int) -> Fraction:
        return self.dist[i][j]

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={self.n})"


def validate_metric(matrix: Sequence[Sequence], labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Check all metric axioms and return the space.

    Raises the first violation found in row-major scan order:
    Asymmetric, NegativeEntry, NonzeroDiagonal, TriangleViolation(i,j,k)
    where the triangle witness means dist[i][j] > dist[i][k] + dist[k][j].
    """
    n = len(matrix)
    rows = []
    for row in matrix:
        if len(row) != n:
            raise MetricError("matrix is not square")
        rows.append(tuple(as_fraction(x) for x in row))
    d = tuple(rows)
    for i in range(n):
        for j in range(n):
            if i == j:
                if d[i][i] != 0:
                    raise NonzeroDiagonal(i)
            else:
                if d[i][j] != d[j][i]:
                    raise Asymmetric(i, j)
                if d[i][j] <= 0:
                    raise NegativeEntry(i, j)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if d[i][j] > d[i][k] + d[k][j]:
                    raise TriangleViolation(i, j, k)
    if labels is None:
        labels = tuple(f"p{i}" for i in range(n))
    else:
        labels = tuple(str(l) for l in labels)
        if len(labels) != n:
            raise MetricError("label count does not match matrix size")
    return FiniteMetricSpace(labels, d)


@dataclass(frozen=True)
class MetricFunction:
    """A point of the function space R^X over a finite metric space."""

    space: FiniteMetricSpace
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != self.space.n:
            raise SpaceMismatch("value vector length does not match the space")

    def __add__(self, other: "MetricFunction") -> "MetricFunction":
        _same_space(self, other)
        return MetricFunction(self.space, tuple(a + b for a, b in zip(self.values, other.values)))

    def scale(self, c: Fraction) -> "MetricFunction":
        return MetricFunction(self.space, tuple(c * v for v in self.values))


def _same_space(f: MetricFunction, g: MetricFunction) -> None:
    if f.space is not g.space and f.space != g.space:
        raise SpaceMismatch("functions live over different spaces")


def sup_distance(f: MetricFunction, g: MetricFunction) -> Fraction:
    """Exact sup-metric max_i |f_i - g_i|."""
    _same_space(f, g)
    return max(abs(a - b) for a, b in zip(f.values, g.values))


def kuratowski(space: FiniteMetricSpace, i: int) -> MetricFunction:
    """The distance function dist(x_i, .) of the i-th point."""
    if not 0 <= i < space.n:
        raise IndexOutOfRange(f"point index {i} out of range for n={space.n}")
    return MetricFunction(space, space.dist[i])


def affine_mean(functions: Sequence[MetricFunction]) -> MetricFunction:
    if not functions:
        raise ValueError("empty tuple of functions")
    space = functions[0].space
    for f in functions[1:]:
        _same_space(functions[0], f)
    n = Fraction(len(functions))
    vals = tuple(sum((f.values[i] for f in functions), Fraction(0)) / n for i in range(space.n))
    return MetricFunction(space, vals)


# -- interchange formats ------------------------------------------------

def space_from_json(text_or_obj) -> FiniteMetricSpace:
    """Load {"labels": [...], "dist": [[...]]} with entries int or "p/q"."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, (str, bytes)) else text_or_obj
    return validate_metric(obj["dist"], obj.get("labels"))


def space_to_json(space: FiniteMetricSpace) -> str:
    return json.dumps(
        {
            "labels": list(space.labels),
            "dist": [[format_fraction(x) for x in row] for row in space.dist],
        }
    )


def space_from_csv(text: str) -> FiniteMetricSpace:
    """Load a matrix CSV: header row of labels, then rows of rationals."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise MetricError("empty CSV")
    labels = [cell.strip() for cell in rows[0]]
    matrix = [[cell for cell in row] for row in rows[1:]]
    return validate_metric(matrix, labels)


def space_to_csv(space: FiniteMetricSpace) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(space.labels)
    for row in space.dist:
        writer.writerow([format_fraction(x) for x in row])
    return out.getvalue()
