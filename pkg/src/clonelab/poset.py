"""Finite posets, their order-ideal lattices, and incomparable set families.

The lattice of downward-closed subsets (order ideals) of a finite poset is
the combinatorial backbone of the whole package: clone intervals are indexed
by these ideals, and the "small set" notion that controls the linear-map
classes is read off an incomparable family of equal-size subsets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    CycleDetected,
    InclusionViolation,
    SizeMismatch,
    TooLarge,
    UnknownElement,
)

MAX_POSET_SIZE = 20
MAX_GROUND_SIZE = 16


def natural_key(label: str) -> tuple:
    """Sort key that orders d2 before d10."""
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", label))


def sorted_labels(labels: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(labels, key=natural_key))


@dataclass(frozen=True)
class Poset:
    """A finite partial order: element ids plus a reflexive-transitive
    antisymmetric relation stored as a boolean matrix (leq[i][j] iff
    elements[i] <= elements[j])."""

    elements: tuple[str, ...]
    leq: tuple[tuple[bool, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.elements)
        if len(set(self.elements)) != n:
            raise ValueError("duplicate element ids")
        if len(self.leq) != n or any(len(row) != n for row in self.leq):
            raise ValueError("leq matrix shape does not match element count")
        for i in range(n):
            if not self.leq[i][i]:
                raise ValueError("relation is not reflexive")
            for j in range(n):
                if i != j and self.leq[i][j] and self.leq[j][i]:
                    raise ValueError("relation is not antisymmetric")
                for k in range(n):
                    if self.leq[i][j] and self.leq[j][k] and not self.leq[i][k]:
                        raise ValueError("relation is not transitive")

    def index(self, x: str) -> int:
        try:
            return self.elements.index(x)
        except ValueError:
            raise UnknownElement(f"element {x!r} not in poset") from None

    def le(self, x: str, y: str) -> bool:
        return self.leq[self.index(x)][self.index(y)]

    def downset(self, x: str) -> frozenset[str]:
        j = self.index(x)
        return frozenset(e for i, e in enumerate(self.elements) if self.leq[i][j])

    def comparable_pairs(self) -> tuple[tuple[str, str], ...]:
        """All (p, q) with q <= p, in deterministic order."""
        out = []
        for p in sorted_labels(self.elements):
            for q in sorted_labels(self.elements):
                if self.le(q, p):
                    out.append((p, q))
        return tuple(out)

    def covers(self) -> tuple[tuple[str, str], ...]:
        """Cover pairs (x, y) meaning y covers x."""
        n = len(self.elements)
        out = []
        for i in range(n):
            for j in range(n):
                if i == j or not self.leq[i][j]:
                    continue
                if any(
                    self.leq[i][k] and self.leq[k][j]
                    for k in range(n)
                    if k not in (i, j)
                ):
                    continue
                out.append((self.elements[i], self.elements[j]))
        return tuple(out)

    def is_downward_closed(self, subset: Iterable[str]) -> bool:
        s = set(subset)
        for x in s:
            for i, e in enumerate(self.elements):
                if self.leq[i][self.index(x)] and e not in s:
                    return False
        return True

    def to_text(self) -> str:
        ids = " ".join(self.elements)
        covers = ", ".join(f"{x}<{y}" for x, y in self.covers())
        return f"{ids} / {covers}" if covers else ids


def poset_from_covers(elements: Sequence[str], covers: Iterable[tuple[str, str]]) -> Poset:
    """Build a poset as the reflexive-transitive closure of cover pairs.

    Raises CycleDetected when the closure would violate antisymmetry.
    """
    elems = tuple(elements)
    index = {e: i for i, e in enumerate(elems)}
    if len(index) != len(elems):
        raise ValueError("duplicate element ids")
    n = len(elems)
    rel = [[i == j for j in range(n)] for i in range(n)]
    for low, high in covers:
        if low not in index:
            raise UnknownElement(f"element {low!r} not declared")
        if high not in index:
            raise UnknownElement(f"element {high!r} not declared")
        rel[index[low]][index[high]] = True
    # Floyd-Warshall style closure.
    for k in range(n):
        for i in range(n):
            if rel[i][k]:
                row_i, row_k = rel[i], rel[k]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    for i in range(n):
        for j in range(n):
            if i != j and rel[i][j] and rel[j][i]:
                raise CycleDetected(
                    f"elements {elems[i]!r} and {elems[j]!r} lie on a cycle"
                )
    return Poset(elems, tuple(tuple(row) for row in rel))


def parse_poset(text: str) -> Poset:
    """Parse the poset text format: element ids, then optional "/" and
    comma-separated covers "x<y"."""
    head, _, tail = text.partition("/")
    elements = head.split()
    if not elements:
        raise ValueError("poset text declares no elements")
    covers = []
    for chunk in tail.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = re.fullmatch(r"(\S+)\s*<\s*(\S+)", chunk)
        if not m:
            raise ValueError(f"malformed cover {chunk!r}, expected 'x<y'")
        covers.append((m.group(1), m.group(2)))
    return poset_from_covers(elements, covers)


def antichain(labels: Sequence[str]) -> Poset:
    return poset_from_covers(labels, [])


def chain(labels: Sequence[str]) -> Poset:
    """Chain with labels[0] at the bottom."""
    return poset_from_covers(labels, list(zip(labels, labels[1:])))


@dataclass(frozen=True)
class OrderIdeal:
    """A downward-closed subset of a poset, identified by its carrier."""

    carrier: frozenset[str]

    def key(self) -> tuple[str, ...]:
        return sorted_labels(self.carrier)

    def label(self) -> str:
        return "{" + ",".join(self.key()) + "}"

    def __le__(self, other: "OrderIdeal") -> bool:
        return self.carrier <= other.carrier


@dataclass(frozen=True)
class IdealLattice:
    """All order ideals of a poset, ordered by inclusion.

    Ideals are listed lexicographically by their sorted carrier tuple, so
    the empty ideal is always first.
    """

    poset: Poset
    ideals: tuple[OrderIdeal, ...]

    def index(self, ideal: OrderIdeal) -> int:
        try:
            return self.ideals.index(ideal)
        except ValueError:
            raise UnknownElement(f"{ideal.label()} is not an ideal here") from None

    def bottom(self) -> OrderIdeal:
        return OrderIdeal(frozenset())

    def top(self) -> OrderIdeal:
        return OrderIdeal(frozenset(self.poset.elements))

    def join(self, a: OrderIdeal, b: OrderIdeal) -> OrderIdeal:
        out = OrderIdeal(a.carrier | b.carrier)
        self.index(out)
        return out

    def meet(self, a: OrderIdeal, b: OrderIdeal) -> OrderIdeal:
        out = OrderIdeal(a.carrier & b.carrier)
        self.index(out)
        return out

    def covers(self) -> tuple[tuple[OrderIdeal, OrderIdeal], ...]:
        """Pairs (a, b) where b covers a in the inclusion order."""
        out = []
        for a in self.ideals:
            for b in self.ideals:
                if not a.carrier < b.carrier:
                    continue
                if any(
                    a.carrier < c.carrier < b.carrier for c in self.ideals
                ):
                    continue
                out.append((a, b))
        return tuple(out)

    def lower_covers(self, a: OrderIdeal) -> list[OrderIdeal]:
        return [lo for lo, hi in self.covers() if hi == a]

    def join_irreducible_elements(self) -> list[OrderIdeal]:
        """Elements with exactly one lower cover (excludes the bottom)."""
        return [a for a in self.ideals if len(self.lower_covers(a)) == 1]


def order_ideals(p: Poset, max_size: int = MAX_POSET_SIZE) -> IdealLattice:
    """Enumerate every downward-closed subset of p.

    Scans all 2^|p| subsets, so the poset size is capped.
    """
    n = len(p.elements)
    if n > max_size:
        raise TooLarge(f"poset has {n} elements; enumeration capped at {max_size}")
    down_masks = []
    for j in range(n):
        mask = 0
        for i in range(n):
            if p.leq[i][j]:
                mask |= 1 << i
        down_masks.append(mask)
    found = []
    for mask in range(1 << n):
        ok = True
        for j in range(n):
            if mask >> j & 1 and mask & down_masks[j] != down_masks[j]:
                ok = False
                break
        if ok:
            found.append(
                OrderIdeal(frozenset(p.elements[i] for i in range(n) if mask >> i & 1))
            )
    found.sort(key=lambda ideal: ideal.key())
    return IdealLattice(p, tuple(found))


def join_irreducibles(lattice: IdealLattice) -> Poset:
    """The poset of join-irreducible elements under the induced order.

    Taking order ideals of the result recovers a lattice isomorphic to the
    input; element ids are the comma-joined carriers of the irreducibles.
    """
    irr = lattice.join_irreducible_elements()
    irr.sort(key=lambda ideal: ideal.key())
    labels = tuple(",".join(ideal.key()) for ideal in irr)
    leq = tuple(
        tuple(a.carrier <= b.carrier for b in irr) for a in irr
    )
    return Poset(labels, leq)


def power_set_lattice(n: int) -> IdealLattice:
    """The lattice of all subsets of an n-element set (ideals of an antichain)."""
    if n > MAX_POSET_SIZE:
        raise TooLarge(f"antichain of {n} elements exceeds cap {MAX_POSET_SIZE}")
    return order_ideals(antichain([f"x{i}" for i in range(n)]))


@dataclass(frozen=True)
class SpernerFamily:
    """An indexed family of equal-size, pairwise incomparable subsets of a
    ground set.  Incomparability makes the family members the maximal
    non-small sets: a subset of the ground set is *small* exactly when it is
    a proper subset of some member.

    members maps each poset element id to its subset; all members share the
    cardinality ``member_size``.  ``policy`` records whether the family was
    given explicitly or generated by the built-in picker, so verification
    reports can flag generated families.
    """

    ground: frozenset[str]
    members: tuple[tuple[str, frozenset[str]], ...]
    policy: str = "explicit"

    def __post_init__(self) -> None:
        if len(self.ground) > MAX_GROUND_SIZE:
            raise TooLarge(f"ground set larger than {MAX_GROUND_SIZE}")
        for key, s in self.members:
            stray = s - self.ground
            if stray:
                raise UnknownElement(
                    f"member for {key!r} uses labels outside the ground set: "
                    f"{sorted_labels(stray)}"
                )
        items = list(self.members)
        for i, (ki, si) in enumerate(items):
            for kj, sj in items[i + 1 :]:
                if si <= sj or sj <= si:
                    raise InclusionViolation(
                        f"member for {ki!r} comparable with member for {kj!r}"
                    )
        sizes = {len(s) for _, s in self.members}
        if len(sizes) != 1:
            raise SizeMismatch(f"member sizes differ: {sorted(sizes)}")
        if min(sizes) < 1:
            raise SizeMismatch("members must be nonempty")

    @property
    def member_size(self) -> int:
        return len(self.members[0][1])

    def member(self, p: str) -> frozenset[str]:
        for key, s in self.members:
            if key == p:
                return s
        raise UnknownElement(f"no family member indexed by {p!r}")

    def indices(self) -> tuple[str, ...]:
        return tuple(key for key, _ in self.members)

    def to_lines(self) -> str:
        return "\n".join(
            f"{key}: {' '.join(sorted_labels(s))}" for key, s in self.members
        )


def is_small(s: Iterable[str], fam: SpernerFamily) -> bool:
    """True iff s is a proper subset of some family member."""
    sset = frozenset(s)
    return any(sset < member for _, member in fam.members)


def small_sets(fam: SpernerFamily) -> list[frozenset[str]]:
    """All small subsets of the ground set, lexicographically ordered."""
    ground = sorted_labels(fam.ground)
    n = len(ground)
    if n > 12:
        raise TooLarge("small-set scan capped at ground size 12")
    out = []
    for mask in range(1 << n):
        s = frozenset(ground[i] for i in range(n) if mask >> i & 1)
        if is_small(s, fam):
            out.append(s)
    out.sort(key=sorted_labels)
    return out


def parse_sperner_lines(text: str) -> dict[str, frozenset[str]]:
    """Parse "p: d1 d2" lines into an index -> member mapping."""
    members: dict[str, frozenset[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep or not key.strip():
            raise ValueError(f"line {lineno}: expected 'p: d1 d2 ...', got {raw!r}")
        if key.strip() in members:
            raise ValueError(f"line {lineno}: duplicate index {key.strip()!r}")
        members[key.strip()] = frozenset(rest.split())
    return members


def build_sperner(
    ground: Sequence[str] | int,
    p: Poset,
    spec: Mapping[str, Iterable[str]] | str | None = None,
) -> SpernerFamily:
    """Build the indexed family for a poset.

    ``ground`` is either the label list or a count (labels d1..dn).  ``spec``
    gives one member per poset element, either as a mapping or in the
    "p: d1 d2" line format; when omitted, members are picked automatically:
    the lexicographically first k subsets of the smallest workable size
    (at least 2 when the ground set allows, so singletons come out small).
    """
    if isinstance(ground, int):
        labels = tuple(f"d{i}" for i in range(1, ground + 1))
    else:
        labels = sorted_labels(ground)
    if spec is None:
        members, policy = _generate_members(labels, p), "generated"
    else:
        if isinstance(spec, str):
            spec = parse_sperner_lines(spec)
        given = set(spec)
        expected = set(p.elements)
        if given != expected:
            raise UnknownElement(
                f"family indices {sorted_labels(given)} do not match poset "
                f"elements {sorted_labels(expected)}"
            )
        members = tuple(
            (key, frozenset(spec[key])) for key in sorted_labels(p.elements)
        )
        policy = "explicit"
    return SpernerFamily(frozenset(labels), members, policy)


def _generate_members(
    labels: tuple[str, ...], p: Poset
) -> tuple[tuple[str, frozenset[str]], ...]:
    from itertools import combinations

    k = len(p.elements)
    n = len(labels)
    chosen = None
    for m in range(min(2, n), n + 1):
        from math import comb

        if comb(n, m) >= k:
            chosen = [frozenset(c) for c in combinations(labels, m)][:k]
            break
    if chosen is None and n >= 1 and k <= n:
        chosen = [frozenset({lab}) for lab in labels[:k]]
    if chosen is None:
        raise SizeMismatch(
            f"cannot pick {k} incomparable equal-size subsets of {n} labels"
        )
    return tuple(zip(sorted_labels(p.elements), chosen))
