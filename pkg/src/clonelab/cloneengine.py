"""Brute-force clone machinery on small finite domains.

Operations are stored as flat tables with mixed-radix indexing (first
argument most significant).  Closure works arity by arity: the n-ary part of
the generated clone is the fixpoint of seeding the n-ary projections and
repeatedly substituting n-ary members into the generators, which yields all
n-ary term operations without ever leaving arity n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import report as rp
from .errors import BudgetExceeded, TooLarge

DEFAULT_BUDGET = 200_000


@dataclass(frozen=True)
class FiniteOperation:
    """An n-ary operation on {0..domain-1} as a flat value table."""

    arity: int
    domain: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("arity must be at least 1")
        if len(self.table) != self.domain**self.arity:
            raise ValueError("table length must be domain**arity")
        if any(not 0 <= v < self.domain for v in self.table):
            raise ValueError("table values must lie in the domain")

    def apply(self, *args: int) -> int:
        idx = 0
        for a in args:
            idx = idx * self.domain + a
        return self.table[idx]

    def to_text(self) -> str:
        return f"{self.arity} {self.domain} : " + " ".join(
            str(v) for v in self.table
        )


def parse_operation(text: str) -> FiniteOperation:
    head, _, body = text.partition(":")
    arity, domain = (int(t) for t in head.split())
    return FiniteOperation(arity, domain, tuple(int(v) for v in body.split()))


def projection(arity: int, k: int, domain: int) -> FiniteOperation:
    """The projection onto the k-th of arity arguments (k is 1-based)."""
    if not 1 <= k <= arity:
        raise ValueError("projection index out of range")
    table = [
        args[k - 1]
        for args in itertools.product(range(domain), repeat=arity)
    ]
    return FiniteOperation(arity, domain, tuple(table))


def projections(arity: int, domain: int) -> list[FiniteOperation]:
    return [projection(arity, k, domain) for k in range(1, arity + 1)]


def compose(f: FiniteOperation, gs: Sequence[FiniteOperation]) -> FiniteOperation:
    """f(g_1, ..., g_k) where every g_i has the same arity."""
    if len(gs) != f.arity:
        raise ValueError("need exactly one inner operation per argument of f")
    n = gs[0].arity
    d = f.domain
    if any(g.arity != n or g.domain != d for g in gs):
        raise ValueError("inner operations must share arity and domain")
    tables = [g.table for g in gs]
    size = d**n
    out = []
    ftab = f.table
    for i in range(size):
        code = 0
        for t in tables:
            code = code * d + t[i]
        out.append(ftab[code])
    return FiniteOperation(n, d, tuple(out))


def identity_op(domain: int) -> FiniteOperation:
    return projection(1, 1, domain)


def min_op(domain: int) -> FiniteOperation:
    table = [min(x, y) for x in range(domain) for y in range(domain)]
    return FiniteOperation(2, domain, tuple(table))


def max_op(domain: int) -> FiniteOperation:
    table = [max(x, y) for x in range(domain) for y in range(domain)]
    return FiniteOperation(2, domain, tuple(table))


def med_op(domain: int) -> FiniteOperation:
    table = [
        sorted((x, y, z))[1]
        for x in range(domain)
        for y in range(domain)
        for z in range(domain)
    ]
    return FiniteOperation(3, domain, tuple(table))


def permutation_ops(domain: int) -> list[FiniteOperation]:
    """All permutations of the domain as unary operations."""
    return [
        FiniteOperation(1, domain, perm)
        for perm in itertools.permutations(range(domain))
    ]


def depends_on(f: FiniteOperation, coord: int) -> bool:
    d, n = f.domain, f.arity
    stride = d ** (n - 1 - coord)
    for idx, v in enumerate(f.table):
        digit = idx // stride % d
        if digit + 1 < d and v != f.table[idx + stride]:
            return True
    return False


def is_essentially_unary(f: FiniteOperation) -> bool:
    """True iff f depends on at most one of its coordinates."""
    return sum(depends_on(f, i) for i in range(f.arity)) <= 1


def unary_skeleton(f: FiniteOperation) -> FiniteOperation:
    """The unary function behind an essentially unary operation (constants
    come back as constant unary tables)."""
    if not is_essentially_unary(f):
        raise ValueError("operation depends on more than one coordinate")
    d, n = f.domain, f.arity
    coord = next((i for i in range(n) if depends_on(f, i)), 0)
    args = [0] * n
    table = []
    for x in range(d):
        args[coord] = x
        table.append(f.apply(*args))
    return FiniteOperation(1, d, tuple(table))


@dataclass(frozen=True)
class GradedClone:
    """Arity-graded parts of a clone, up to a cap."""

    domain: int
    cap: int
    parts: tuple[frozenset[FiniteOperation], ...]  # parts[n-1] = n-ary part

    def part(self, arity: int) -> frozenset[FiniteOperation]:
        return self.parts[arity - 1]

    def unary_part(self) -> frozenset[FiniteOperation]:
        return self.part(1)

    def contains(self, f: FiniteOperation) -> bool:
        return f.arity <= self.cap and f in self.part(f.arity)

    def size(self) -> int:
        return sum(len(p) for p in self.parts)

    def graded_le(self, other: "GradedClone") -> bool:
        return all(a <= b for a, b in zip(self.parts, other.parts))

    def intersect(self, other: "GradedClone") -> "GradedClone":
        return GradedClone(
            self.domain,
            self.cap,
            tuple(a & b for a, b in zip(self.parts, other.parts)),
        )


def projection_clone(domain: int, cap: int) -> GradedClone:
    return GradedClone(
        domain,
        cap,
        tuple(frozenset(projections(n, domain)) for n in range(1, cap + 1)),
    )


def closure(
    generators: Iterable[FiniteOperation],
    cap: int,
    domain: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> GradedClone:
    """Least arity-capped composition-closed set containing the generators
    and all projections.

    For each arity n the n-ary part is grown to a fixpoint by substituting
    known n-ary members into each generator; the total operation count is
    bounded by the budget.
    """
    gens = list(generators)
    if domain is None:
        if not gens:
            raise ValueError("need a domain when there are no generators")
        domain = gens[0].domain
    for g in gens:
        if g.domain != domain:
            raise ValueError("generators live on different domains")
        if g.arity > cap:
            raise TooLarge(f"generator arity {g.arity} above cap {cap}")
    total = 0
    parts: list[frozenset[FiniteOperation]] = []
    for n in range(1, cap + 1):
        ops: set[FiniteOperation] = set(projections(n, domain))
        ops.update(g for g in gens if g.arity == n)
        frontier = set(ops)
        while frontier:
            # Semi-naive round: only tuples touching a fresh operation can
            # produce anything new.
            pool = sorted(ops, key=lambda f: f.table)
            fresh: set[FiniteOperation] = set()
            for g in gens:
                for tup in itertools.product(pool, repeat=g.arity):
                    if frontier.isdisjoint(tup):
                        continue
                    new = compose(g, tup)
                    if new not in ops:
                        ops.add(new)
                        fresh.add(new)
                        if total + len(ops) > budget:
                            raise BudgetExceeded(
                                f"closure exceeded budget {budget}"
                            )
            frontier = fresh
        total += len(ops)
        parts.append(frozenset(ops))
    return GradedClone(domain, cap, tuple(parts))


# ---------------------------------------------------------------------------
# Binary polymorphisms


def _unary_tables(monoid: Iterable[FiniteOperation]) -> tuple[int, list[tuple[int, ...]]]:
    ops = list(monoid)
    if not ops:
        raise ValueError("empty monoid")
    d = ops[0].domain
    for f in ops:
        if f.arity != 1 or f.domain != d:
            raise ValueError("monoid members must be unary on one domain")
    return d, [f.table for f in ops]


def binary_polymorphisms(
    monoid: Iterable[FiniteOperation],
) -> list[FiniteOperation]:
    """All binary f with f(g1, g2) in the monoid for every pair g1, g2.

    Domain 2 and 3 are scanned exhaustively over all binary tables; domain 4
    runs a cell-by-cell backtracking search with per-pair pruning; bigger
    domains are out of reach.
    """
    d, tables = _unary_tables(monoid)
    if d <= 3:
        return _binary_polymorphisms_exhaustive(d, tables)
    if d == 4:
        return _binary_polymorphisms_backtracking(d, tables)
    raise TooLarge(f"domain {d} not supported for polymorphism search")


def _pair_cells(d: int, tables: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """For each (g1, g2) the flat table indices (g1(x), g2(x)) for x in X."""
    out = []
    for g1 in tables:
        for g2 in tables:
            out.append(tuple(g1[x] * d + g2[x] for x in range(d)))
    return out


def _binary_polymorphisms_exhaustive(
    d: int, tables: list[tuple[int, ...]]
) -> list[FiniteOperation]:
    member_set = set(tables)
    cells = _pair_cells(d, tables)
    found = []
    for cand in itertools.product(range(d), repeat=d * d):
        ok = True
        for cell in cells:
            if tuple(cand[i] for i in cell) not in member_set:
                ok = False
                break
        if ok:
            found.append(FiniteOperation(2, d, cand))
    return found


def _binary_polymorphisms_backtracking(
    d: int, tables: list[tuple[int, ...]]
) -> list[FiniteOperation]:
    member_list = tables
    cells = _pair_cells(d, tables)
    by_cell: dict[int, list[int]] = {i: [] for i in range(d * d)}
    for pi, cell in enumerate(cells):
        for i in cell:
            by_cell[i].append(pi)
    assignment: list[int | None] = [None] * (d * d)
    found: list[FiniteOperation] = []

    def pair_consistent(pi: int) -> bool:
        cell = cells[pi]
        vals = [assignment[i] for i in cell]
        for t in member_list:
            if all(v is None or v == t[x] for x, v in enumerate(vals)):
                return True
        return False

    def assign(pos: int) -> None:
        if pos == d * d:
            found.append(
                FiniteOperation(2, d, tuple(assignment))  # type: ignore[arg-type]
            )
            return
        for val in range(d):
            assignment[pos] = val
            if all(pair_consistent(pi) for pi in by_cell[pos]):
                assign(pos + 1)
            assignment[pos] = None

    assign(0)
    return found


# ---------------------------------------------------------------------------
# Collapsing permutation monoid


def collapsing_check(domain_size: int) -> rp.VerificationReport:
    """Binary polymorphisms of the full permutation group must all be
    essentially unary with a permutation skeleton; the three structural
    steps behind that fact are asserted for each found operation:

    (i)   f(x,y) is always f(x,x) or f(y,y);
    (ii)  f(x,y) = f(x,x) forces f(y,x) = f(y,y);
    (iii) one of the two patterns holds globally;
    and the diagonal x -> f(x,x) is a permutation.
    """
    perms = permutation_ops(domain_size)
    perm_tables = {f.table for f in perms}
    polys = binary_polymorphisms(perms)
    d = domain_size
    violations = []
    for f in polys:
        diag = tuple(f.apply(x, x) for x in range(d))
        checks = {
            "essentially_unary": is_essentially_unary(f),
            "skeleton_in_monoid": is_essentially_unary(f)
            and unary_skeleton(f).table in perm_tables,
            "diagonal_permutation": sorted(diag) == list(range(d)),
            "step_i": all(
                f.apply(x, y) in (f.apply(x, x), f.apply(y, y))
                for x in range(d)
                for y in range(d)
            ),
            "step_ii": all(
                f.apply(y, x) == f.apply(y, y)
                for x in range(d)
                for y in range(d)
                if f.apply(x, y) == f.apply(x, x)
            ),
            "step_iii": all(f.apply(x, y) == f.apply(x, x) for x in range(d) for y in range(d))
            or all(f.apply(x, y) == f.apply(y, y) for x in range(d) for y in range(d)),
        }
        for name, ok in checks.items():
            if not ok:
                violations.append({"table": f.to_text(), "check": name})
    counts = {
        "domain": d,
        "monoid_size": len(perms),
        "polymorphisms": len(polys),
    }
    if d <= 3:
        counts["tables_scanned"] = d ** (d * d)
        strategy = "exhaustive"
    else:
        strategy = "backtracking"
    instance = f"permutations-of-{d}"
    if violations:
        return rp.failed("collapsing", instance, strategy, violations, counts)
    report = rp.passed("collapsing", instance, strategy, counts)
    if d > 3:
        report.notes.append("cell-by-cell search with per-pair pruning")
    return report


# ---------------------------------------------------------------------------
# The pentagon


def pentagon_clones(cap: int = 3, budget: int = DEFAULT_BUDGET) -> dict[str, GradedClone]:
    """The five clones of the pentagon on the ordered 3-element domain."""
    d = 3
    return {
        "proj": projection_clone(d, cap),
        "min": closure([min_op(d)], cap, d, budget),
        "max": closure([max_op(d)], cap, d, budget),
        "min-med": closure([min_op(d), med_op(d)], cap, d, budget),
        "min-max": closure([min_op(d), max_op(d)], cap, d, budget),
    }


def pentagon_check(cap: int = 3, budget: int = DEFAULT_BUDGET) -> rp.VerificationReport:
    """Certify the five-element nonmodular sublattice (up to the arity cap):
    a three-step chain through min and min-med into min-max, the max clone
    attached below the top only, and the min-med/max meet collapsing to the
    projections."""
    if cap < 3:
        raise ValueError("the pentagon needs cap at least 3 for the median")
    clones = pentagon_clones(cap, budget)
    d = 3
    proj, cmin, cmax = clones["proj"], clones["min"], clones["max"]
    cminmed, cminmax = clones["min-med"], clones["min-max"]
    med = med_op(d)
    mx = max_op(d)
    mn = min_op(d)

    # Median as a term over min and max, evaluated tablewise.
    p31, p32, p33 = projections(3, d)
    m_xy = compose(mn, [p31, p32])
    m_yz = compose(mn, [p32, p33])
    m_xz = compose(mn, [p31, p33])
    med_term = compose(mx, [compose(mx, [m_xy, m_yz]), m_xz])

    facts = {
        "min_below_minmed": cmin.graded_le(cminmed),
        "minmed_below_minmax": cminmed.graded_le(cminmax),
        "max_below_minmax": cmax.graded_le(cminmax),
        "min_strict": not cminmed.graded_le(cmin),
        "minmed_strict": not cminmax.graded_le(cminmed),
        "max_strict": not cminmax.graded_le(cmax),
        "med_is_minmax_term": med_term == med,
        "med_in_minmax": cminmax.contains(med),
        "med_not_in_min": not cmin.contains(med),
        "max_not_in_minmed": not cminmed.contains(mx),
        "min_not_in_max": not cmax.contains(mn),
        "meet_is_projections": all(
            cminmed.intersect(cmax).part(n) == proj.part(n)
            for n in range(1, cap + 1)
        ),
        "unary_parts_trivial": all(
            c.unary_part() == frozenset({identity_op(d)})
            for c in (cmin, cmax, cminmed, cminmax)
        ),
    }
    counts = {
        "cap": cap,
        **{
            f"{name}_size": clone.size()
            for name, clone in sorted(clones.items())
        },
    }
    violations = [{"fact": k} for k, ok in facts.items() if not ok]
    if violations:
        return rp.failed("pentagon", "chain-domain-3", f"cap={cap}", violations, counts)
    report = rp.passed("pentagon", "chain-domain-3", f"cap={cap}", counts)
    report.notes.append(
        "all inclusions and the meet are certified up to the arity cap"
    )
    return report
