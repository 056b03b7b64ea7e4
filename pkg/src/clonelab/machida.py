"""Arity-graded operation enumeration, 0/1 encoding, and the clone metric.

Finitely many operations exist per arity, so the operations up to a cap can
be listed arity-monotonically and any capped operation set becomes a 0/1
sequence.  Two closed conditions on sequences characterize capped clones:
all projection bits set, and for every capped composition identity either a
factor bit is clear or the composite bit is set.  The metric between graded
clones is 1/2^(n-1) at the first differing arity, which makes sets of clones
sharing a unary part exactly the open unit spheres.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from . import report as rp
from .cloneengine import (
    FiniteOperation,
    GradedClone,
    closure,
    compose,
    max_op,
    med_op,
    min_op,
    permutation_ops,
    projection_clone,
    projections,
)
from .errors import ArityBeyondCap, CapMismatch, TooLarge

MAX_ENUM_DOMAIN = 3
MAX_ENUM_CAP = 2


@dataclass(frozen=True)
class OperationEnumeration:
    """All operations up to the cap, ordered by arity then table."""

    domain: int
    cap: int
    ops: tuple[FiniteOperation, ...]

    def index(self, f: FiniteOperation) -> int:
        return self._index_map[f]

    @property
    def _index_map(self) -> dict[FiniteOperation, int]:
        cached = getattr(self, "_cached_index", None)
        if cached is None:
            cached = {f: i for i, f in enumerate(self.ops)}
            object.__setattr__(self, "_cached_index", cached)
        return cached

    def projection_indices(self) -> list[int]:
        return [
            self.index(p)
            for n in range(1, self.cap + 1)
            for p in projections(n, self.domain)
        ]


def enumerate_operations(domain: int, cap: int) -> OperationEnumeration:
    """Materialize every operation of arity 1..cap on the domain."""
    if domain > MAX_ENUM_DOMAIN or cap > MAX_ENUM_CAP:
        raise TooLarge(
            f"full enumeration capped at domain {MAX_ENUM_DOMAIN}, arity {MAX_ENUM_CAP}"
        )
    ops = []
    for n in range(1, cap + 1):
        for table in itertools.product(range(domain), repeat=domain**n):
            ops.append(FiniteOperation(n, domain, table))
    return OperationEnumeration(domain, cap, tuple(ops))


@dataclass(frozen=True)
class BitSequence:
    """Characteristic sequence of a capped operation set."""

    domain: int
    cap: int
    bits: tuple[int, ...]

    def to_text(self) -> str:
        return f"{self.domain} {self.cap} {len(self.bits)}\n" + "".join(
            str(b) for b in self.bits
        )


def parse_bit_sequence(text: str) -> BitSequence:
    header, body = text.splitlines()
    domain, cap, length = (int(t) for t in header.split())
    bits = tuple(int(ch) for ch in body.strip())
    if len(bits) != length:
        raise ValueError("bit count does not match the declared length")
    return BitSequence(domain, cap, bits)


def encode(
    ops: Iterable[FiniteOperation], enum: OperationEnumeration
) -> BitSequence:
    bits = [0] * len(enum.ops)
    for f in ops:
        if f.arity > enum.cap:
            raise ArityBeyondCap(f"arity {f.arity} beyond cap {enum.cap}")
        bits[enum.index(f)] = 1
    return BitSequence(enum.domain, enum.cap, tuple(bits))


def decode(s: BitSequence, enum: OperationEnumeration) -> frozenset[FiniteOperation]:
    return frozenset(f for f, b in zip(enum.ops, s.bits) if b)


def composition_identities(
    enum: OperationEnumeration,
) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Every capped identity: yields (composite index, (outer, inner...))."""
    by_arity: dict[int, list[int]] = {}
    for i, f in enumerate(enum.ops):
        by_arity.setdefault(f.arity, []).append(i)
    for i0, outer in enumerate(enum.ops):
        for inner_arity in range(1, enum.cap + 1):
            pool = by_arity[inner_arity]
            for inner in itertools.product(pool, repeat=outer.arity):
                composite = compose(outer, [enum.ops[i] for i in inner])
                yield enum.index(composite), (i0, *inner)


def lambda_membership(
    s: BitSequence, enum: OperationEnumeration
) -> tuple[bool, bool]:
    """(contains all projections, closed under capped composition) read off
    the bit sequence alone."""
    if (s.domain, s.cap, len(s.bits)) != (enum.domain, enum.cap, len(enum.ops)):
        raise CapMismatch("sequence does not match the enumeration")
    in_lambda1 = all(s.bits[i] for i in enum.projection_indices())
    in_lambda2 = True
    for j, factors in composition_identities(enum):
        if all(s.bits[i] for i in factors) and not s.bits[j]:
            in_lambda2 = False
            break
    return in_lambda1, in_lambda2


def is_capped_clone(
    ops: Iterable[FiniteOperation], domain: int, cap: int
) -> bool:
    """Direct closure test: all projections present and every capped
    composition stays inside.  This is the comparison route for the
    lambda-membership verdict."""
    pool = frozenset(ops)
    for n in range(1, cap + 1):
        for p in projections(n, domain):
            if p not in pool:
                return False
    by_arity: dict[int, list[FiniteOperation]] = {}
    for f in pool:
        by_arity.setdefault(f.arity, []).append(f)
    for f in pool:
        for inner_arity in range(1, cap + 1):
            for gs in itertools.product(
                by_arity.get(inner_arity, []), repeat=f.arity
            ):
                if compose(f, gs) not in pool:
                    return False
    return True


def machida_distance(c: GradedClone, d: GradedClone) -> Fraction:
    """0 for graded-equal clones, else 1/2^(n-1) at the least arity n where
    the parts differ.  Equality within the cap stands in for true equality."""
    if c.domain != d.domain or c.cap != d.cap:
        raise CapMismatch("clones must share domain and cap")
    for n in range(1, c.cap + 1):
        if c.part(n) != d.part(n):
            return Fraction(1, 2 ** (n - 1))
    return Fraction(0)


# ---------------------------------------------------------------------------
# Report-producing sweeps


def standard_pool(cap: int = 3) -> dict[str, GradedClone]:
    """Engine-built clones on the ordered 3-element domain: the pentagon
    family plus the essentially unary clone of all permutations."""
    d = 3
    return {
        "proj": projection_clone(d, cap),
        "min": closure([min_op(d)], cap, d),
        "max": closure([max_op(d)], cap, d),
        "med": closure([med_op(d)], cap, d),
        "min-med": closure([min_op(d), med_op(d)], cap, d),
        "min-max": closure([min_op(d), max_op(d)], cap, d),
        "perms": closure(permutation_ops(d), cap, d),
    }


def verify_metric_properties(
    pool: dict[str, GradedClone] | None = None, cap: int = 3
) -> rp.VerificationReport:
    """Ultrametric inequality on every pool triple, plus the sphere law:
    distance below one exactly when the unary parts agree."""
    pool = pool if pool is not None else standard_pool(cap)
    names = sorted(pool)
    dist = {
        (x, y): machida_distance(pool[x], pool[y]) for x in names for y in names
    }
    violations = []
    for x in names:
        for y in names:
            if dist[x, y] != dist[y, x]:
                violations.append({"check": "symmetry", "pair": [x, y]})
            if (dist[x, y] == 0) != (
                all(pool[x].part(n) == pool[y].part(n) for n in range(1, cap + 1))
            ):
                violations.append({"check": "identity", "pair": [x, y]})
            sphere = dist[x, y] < 1
            same_unary = pool[x].unary_part() == pool[y].unary_part()
            if sphere != same_unary:
                violations.append({"check": "unit-sphere", "pair": [x, y]})
            for z in names:
                if dist[x, z] > max(dist[x, y], dist[y, z]):
                    violations.append({"check": "ultrametric", "triple": [x, y, z]})
    counts = {
        "pool": len(names),
        "triples": len(names) ** 3,
        "distinct_distances": len(set(dist.values())),
    }
    table = {
        f"{x}|{y}": str(dist[x, y]) for x in names for y in names if x < y
    }
    instance = f"pool-domain-3-cap-{cap}"
    if violations:
        return rp.failed("machida-metric", instance, "exhaustive", violations, counts)
    report = rp.passed("machida-metric", instance, "exhaustive", counts)
    report.notes.append("distances: " + ", ".join(f"{k}={v}" for k, v in sorted(table.items())))
    report.notes.append(
        f"graded equality up to cap {cap} stands in for true clone equality"
    )
    return report


def _random_capped_set(
    enum: OperationEnumeration, rng: random.Random
) -> frozenset[FiniteOperation]:
    """Half the trials draw raw random subsets (biased towards containing
    the projections), half take the closure of a few random generators so
    genuine clones show up."""
    if rng.random() < 0.5:
        out = {f for f in enum.ops if rng.random() < 0.2}
        if rng.random() < 0.5:
            for n in range(1, enum.cap + 1):
                out.update(projections(n, enum.domain))
        return frozenset(out)
    gens = [rng.choice(enum.ops) for _ in range(rng.randrange(3))]
    clone = closure(gens, enum.cap, enum.domain)
    return frozenset(f for part in clone.parts for f in part)


def verify_lambda_agreement(
    domain: int = 2, cap: int = 2, trials: int = 50, seed: int = 0
) -> rp.VerificationReport:
    """The sequence-level clone test must agree with the direct closure
    check, and encode/decode must round-trip."""
    enum = enumerate_operations(domain, cap)
    rng = random.Random(seed)
    violations = []
    clones_seen = 0
    for _ in range(trials):
        ops = _random_capped_set(enum, rng)
        bits = encode(ops, enum)
        if decode(bits, enum) != ops:
            violations.append({"check": "roundtrip"})
        l1, l2 = lambda_membership(bits, enum)
        direct = is_capped_clone(ops, domain, cap)
        if (l1 and l2) != direct:
            violations.append(
                {"check": "agreement", "lambda": [l1, l2], "direct": direct}
            )
        if direct:
            clones_seen += 1
    counts = {"trials": trials, "clones_seen": clones_seen}
    instance = f"domain-{domain}-cap-{cap}"
    policy = f"sampled:{trials}:seed={seed}"
    if violations:
        return rp.failed("lambda-encoding", instance, policy, violations, counts)
    return rp.passed("lambda-encoding", instance, policy, counts)
