"""Vectors and linear maps over a prime field, with a distinguished basis.

The basis carries three special labels a, b, c; the remaining labels form
the set A whose subsets the smallness ideal lives on.  The *support* of a
linear map is the set of A-labels whose basis vector is not sent to zero --
the images of a, b, c never count towards it.

Everything here is an immutable value: maps are matrices stored column-wise
(column j = image of basis vector j), so composition is matrix product and
pointwise sum is entrywise sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import BasisMismatch
from .poset import sorted_labels

MAX_DIMENSION = 16


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class Field:
    """The prime field of q elements; q must avoid characteristics 2 and 3."""

    q: int

    def __post_init__(self) -> None:
        if not _is_prime(self.q):
            raise ValueError(f"q={self.q} is not prime")
        if self.q in (2, 3):
            raise ValueError("characteristic 2 and 3 are rejected")

    def elements(self) -> range:
        return range(self.q)


@dataclass(frozen=True)
class BasisSpec:
    """Ordered basis labels with three distinguished positions."""

    labels: tuple[str, ...]
    a_index: int = 0
    b_index: int = 1
    c_index: int = 2

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("basis labels must be distinct")
        if len(self.labels) > MAX_DIMENSION:
            raise ValueError(f"dimension capped at {MAX_DIMENSION}")
        idx = (self.a_index, self.b_index, self.c_index)
        if len(set(idx)) != 3 or not all(0 <= i < len(self.labels) for i in idx):
            raise ValueError("need three distinct distinguished positions")

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def a(self) -> str:
        return self.labels[self.a_index]

    @property
    def b(self) -> str:
        return self.labels[self.b_index]

    @property
    def c(self) -> str:
        return self.labels[self.c_index]

    @property
    def a_labels(self) -> tuple[str, ...]:
        special = {self.a_index, self.b_index, self.c_index}
        return tuple(
            lab for i, lab in enumerate(self.labels) if i not in special
        )

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise BasisMismatch(f"label {label!r} not in basis") from None


def basis_for_ground(ground: Iterable[str]) -> BasisSpec:
    """The canonical basis: a, b, c followed by the ground labels in order."""
    return BasisSpec(("a", "b", "c") + sorted_labels(ground))


@dataclass(frozen=True)
class Vector:
    """Coordinates of a vector with respect to a BasisSpec."""

    basis: BasisSpec
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coords) != self.basis.dim:
            raise BasisMismatch("coordinate length does not match basis")

    def is_zero(self) -> bool:
        return not any(self.coords)

    def coefficient(self, label: str) -> int:
        return self.coords[self.basis.position(label)]


@dataclass(frozen=True)
class LinearMap:
    """A square matrix over GF(q); cols[j] is the image of basis vector j."""

    basis: BasisSpec
    q: int
    cols: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = self.basis.dim
        if len(self.cols) != n or any(len(c) != n for c in self.cols):
            raise BasisMismatch("matrix shape does not match basis")

    def is_zero(self) -> bool:
        return not any(any(col) for col in self.cols)

    def column(self, label: str) -> tuple[int, ...]:
        return self.cols[self.basis.position(label)]

    def rows(self) -> tuple[tuple[int, ...], ...]:
        n = self.basis.dim
        return tuple(tuple(self.cols[j][i] for j in range(n)) for i in range(n))

    def to_text(self) -> str:
        header = " ".join(self.basis.labels)
        body = "\n".join(" ".join(str(v) for v in row) for row in self.rows())
        return f"{header}\n{body}"


def map_from_rows(
    basis: BasisSpec, q: int, rows: Iterable[Iterable[int]]
) -> LinearMap:
    rows = tuple(tuple(int(v) % q for v in row) for row in rows)
    n = basis.dim
    cols = tuple(tuple(rows[i][j] for i in range(n)) for j in range(n))
    return LinearMap(basis, q, cols)


def map_from_text(text: str, q: int) -> LinearMap:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    basis = BasisSpec(tuple(lines[0].split()))
    rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
    return map_from_rows(basis, q, rows)


def _check_compatible(f: LinearMap, g: LinearMap) -> None:
    if f.basis != g.basis or f.q != g.q:
        raise BasisMismatch("operands live over different bases or fields")


def unit(basis: BasisSpec, label: str) -> Vector:
    coords = [0] * basis.dim
    coords[basis.position(label)] = 1
    return Vector(basis, tuple(coords))


def zero_vector(basis: BasisSpec) -> Vector:
    return Vector(basis, (0,) * basis.dim)


def zero_map(basis: BasisSpec, q: int) -> LinearMap:
    n = basis.dim
    return LinearMap(basis, q, ((0,) * n,) * n)


def identity_map(basis: BasisSpec, q: int) -> LinearMap:
    n = basis.dim
    return LinearMap(
        basis, q, tuple(tuple(int(i == j) for i in range(n)) for j in range(n))
    )


def map_from_images(
    basis: BasisSpec, q: int, images: Mapping[str, tuple[int, ...]]
) -> LinearMap:
    """Build a map column-by-column; unlisted labels go to zero."""
    n = basis.dim
    cols = []
    for lab in basis.labels:
        img = images.get(lab)
        if img is None:
            cols.append((0,) * n)
        else:
            if len(img) != n:
                raise BasisMismatch(f"image of {lab!r} has wrong length")
            cols.append(tuple(int(v) % q for v in img))
    return LinearMap(basis, q, tuple(cols))


def apply(f: LinearMap, v: Vector) -> Vector:
    """Matrix-vector product over GF(q)."""
    if f.basis != v.basis:
        raise BasisMismatch("map and vector live over different bases")
    q = f.q
    n = f.basis.dim
    out = [0] * n
    for j, scalar in enumerate(v.coords):
        if scalar:
            col = f.cols[j]
            for i in range(n):
                out[i] += scalar * col[i]
    return Vector(f.basis, tuple(val % q for val in out))


def apply_coords(f: LinearMap, coords: tuple[int, ...]) -> tuple[int, ...]:
    """apply() on raw coordinate tuples, for inner loops."""
    q = f.q
    n = len(coords)
    out = [0] * n
    for j, scalar in enumerate(coords):
        if scalar:
            col = f.cols[j]
            for i in range(n):
                out[i] += scalar * col[i]
    return tuple(val % q for val in out)


def compose(f: LinearMap, g: LinearMap) -> LinearMap:
    """The map v -> f(g(v)), i.e. the matrix product f @ g."""
    _check_compatible(f, g)
    return LinearMap(f.basis, f.q, tuple(apply_coords(f, col) for col in g.cols))


def add(f: LinearMap, g: LinearMap) -> LinearMap:
    """Pointwise sum, i.e. entrywise matrix sum."""
    _check_compatible(f, g)
    q = f.q
    return LinearMap(
        f.basis,
        f.q,
        tuple(
            tuple((x + y) % q for x, y in zip(cf, cg))
            for cf, cg in zip(f.cols, g.cols)
        ),
    )


def support(f: LinearMap) -> frozenset[str]:
    """The A-labels whose basis vector f does not send to zero.

    The a, b, c columns are never inspected.
    """
    return frozenset(lab for lab in f.basis.a_labels if any(f.column(lab)))


def range_in_span(f: LinearMap, label: str) -> bool:
    """True iff every column lies in the span of the given basis vector."""
    keep = f.basis.position(label)
    return all(
        all(v == 0 for i, v in enumerate(col) if i != keep) for col in f.cols
    )
