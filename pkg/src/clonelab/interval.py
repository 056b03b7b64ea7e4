"""Interval clones over order ideals, forcing closure, and the binary sweep.

Every clone strictly between the essentially-unary bottom and the top of the
monoid's interval is determined by its essentially binary part, and that part
is a set of two-variable sums: V collects n'(x) + n''(y), and D_I collects
phi_p(x) + n''(y) for p ranging over an order ideal I.  The interval then
mirrors the ideal lattice with one extra bottom element.

Closure and forcing arguments reduce to class-level composition facts, so the
verifiers here sweep substitutions of monoid members into sums and check that
every outcome stays inside the expected parts.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable

from . import linmodel as lm
from . import monoid as mo
from . import report as rp
from .errors import NotAPolymorphism, TooLarge
from .linmodel import LinearMap
from .monoid import ClassTag, MonoidInstance
from .poset import IdealLattice, OrderIdeal, order_ideals, sorted_labels

MATERIALIZE_CAP = 100_000


@dataclass(frozen=True)
class BinarySum:
    """The two-variable function (x, y) -> left(x) + right(y)."""

    left: LinearMap
    right: LinearMap

    def swap(self) -> "BinarySum":
        return BinarySum(self.right, self.left)

    def is_essentially_binary(self) -> bool:
        return not self.left.is_zero() and not self.right.is_zero()

    def identified(self) -> LinearMap:
        """The unary function obtained by identifying the two variables."""
        return lm.add(self.left, self.right)

    def canonical_key(self) -> tuple:
        a = (self.left.cols, self.right.cols)
        b = (self.right.cols, self.left.cols)
        return min(a, b)


@dataclass(frozen=True)
class IntervalClone:
    """Either the bottom of the interval (essentially unary functions only)
    or the clone attached to an order ideal."""

    ideal: OrderIdeal | None = None

    @property
    def is_bottom(self) -> bool:
        return self.ideal is None

    def label(self) -> str:
        return "bottom" if self.ideal is None else self.ideal.label()


BOTTOM = IntervalClone(None)


def clone_for(ideal: OrderIdeal) -> IntervalClone:
    return IntervalClone(ideal)


@dataclass(frozen=True)
class BinaryPart:
    """The essentially binary sums of an interval clone, stored with a
    canonical variable orientation (the set itself is swap-closed), plus a
    descriptor for the essentially unary remainder (always the whole monoid)."""

    clone: IntervalClone
    v_sums: frozenset[BinarySum]
    d_sums: frozenset[BinarySum]
    unary_description: str = "monoid"

    def all_sums(self) -> frozenset[BinarySum]:
        return self.v_sums | self.d_sums

    def keys(self) -> frozenset[tuple]:
        return frozenset(s.canonical_key() for s in self.all_sums())


def _class_members(inst: MonoidInstance, tag: ClassTag, cap: int) -> list[LinearMap]:
    size = mo.class_size(inst, tag)
    if size > cap:
        raise TooLarge(
            f"class {tag.value} has {size} members, beyond the materialization cap {cap}"
        )
    return mo.enumerate_class(inst, tag, cap=cap)


def v_sums(inst: MonoidInstance, cap: int = MATERIALIZE_CAP) -> frozenset[BinarySum]:
    nprimes = _class_members(inst, ClassTag.NPRIME, cap)
    ndps = _class_members(inst, ClassTag.NDOUBLEPRIME, cap)
    if len(nprimes) * len(ndps) > cap:
        raise TooLarge("V is larger than the materialization cap")
    return frozenset(
        BinarySum(np_, ndp) for np_ in nprimes for ndp in ndps
    )


def d_sums(
    inst: MonoidInstance, elements: Iterable[str], cap: int = MATERIALIZE_CAP
) -> frozenset[BinarySum]:
    ndps = _class_members(inst, ClassTag.NDOUBLEPRIME, cap)
    elems = sorted_labels(elements)
    if len(elems) * len(ndps) > cap:
        raise TooLarge("D_I is larger than the materialization cap")
    return frozenset(
        BinarySum(inst.phi[p], ndp) for p in elems for ndp in ndps
    )


def binary_part(
    inst: MonoidInstance, clone: IntervalClone, cap: int = MATERIALIZE_CAP
) -> BinaryPart:
    """Materialize the essentially binary sums of a clone."""
    if clone.is_bottom:
        return BinaryPart(clone, frozenset(), frozenset())
    return BinaryPart(
        clone,
        v_sums(inst, cap),
        d_sums(inst, clone.ideal.carrier, cap),
    )


# ---------------------------------------------------------------------------
# Closure of C_I under substitution


def verify_ci_closed(
    inst: MonoidInstance,
    ideal: OrderIdeal,
    policy: rp.Policy,
    cap: int = MATERIALIZE_CAP,
) -> rp.VerificationReport:
    """Substitution-by-substitution closure check for the clone of an ideal.

    Covers: unary into unary (monoid closure), unary applied after a sum,
    unary substituted into each variable of a sum, a sum substituted into
    each variable of another sum, and identification of variables.  The
    essentially unary part must come out as exactly the monoid.
    """
    if not inst.poset.is_downward_closed(ideal.carrier):
        raise ValueError(f"{ideal.label()} is not downward closed")
    instance = inst.fingerprint()
    part = binary_part(inst, clone_for(ideal), cap)
    sums = sorted(part.all_sums(), key=lambda s: s.canonical_key())
    d_keys = {s.canonical_key() for s in part.d_sums}
    violations: list = []
    counts = {
        "unary_pairs": 0,
        "unary_into_sum": 0,
        "sum_into_sum": 0,
        "identifications": 0,
    }

    def note(kind: str, payload: dict) -> None:
        if len(violations) < 20:
            payload["case"] = kind
            violations.append(payload)

    def check_unary_pair(f: LinearMap, g: LinearMap) -> None:
        counts["unary_pairs"] += 1
        if mo.classify(inst, lm.compose(f, g)) is None:
            note("unary-unary", {"f": f.to_text(), "g": g.to_text()})

    members: list[tuple[ClassTag, LinearMap]] = []
    if policy.exhaustive:
        members = mo.enumerate_monoid(inst)
        for _, f in members:
            for _, g in members:
                check_unary_pair(f, g)
    else:
        rep_maps = list(mo.canonical_representatives(inst).values())
        for f in rep_maps:
            for g in rep_maps:
                check_unary_pair(f, g)
        rng = random.Random(policy.seed + 7)
        for _ in range(policy.count):
            check_unary_pair(
                mo.sample_monoid(inst, rng)[1], mo.sample_monoid(inst, rng)[1]
            )

    ideal_phis = {inst.phi[p] for p in ideal.carrier}

    def check_unary_into_sum(s: BinarySum, m: LinearMap) -> None:
        counts["unary_into_sum"] += 1
        in_d = s.canonical_key() in d_keys
        # m applied after the sum: the left composite must vanish and the
        # right composite stays unary inside the monoid.
        after_left = lm.compose(m, s.left)
        after_right = lm.compose(m, s.right)
        if not after_left.is_zero():
            note("apply-after", {"m": m.to_text(), "sum_left": s.left.to_text()})
        if mo.classify(inst, after_right) is None:
            note("apply-after", {"m": m.to_text(), "sum_right": s.right.to_text()})
        # m substituted for the left variable.
        new_left = lm.compose(s.left, m)
        cls = mo.classify(inst, new_left)
        if cls is None:
            note("substitute-x", {"m": m.to_text(), "left": s.left.to_text()})
        elif cls.tag is ClassTag.PHI:
            if not in_d or cls.p not in ideal.carrier:
                note(
                    "substitute-x",
                    {
                        "m": m.to_text(),
                        "left": s.left.to_text(),
                        "escapes_to": cls.p,
                    },
                )
        elif cls.tag not in (ClassTag.NPRIME, ClassTag.ZERO):
            note("substitute-x", {"m": m.to_text(), "got": cls.tag.value})
        # m substituted for the right variable.
        new_right = lm.compose(s.right, m)
        rcls = mo.classify(inst, new_right)
        if rcls is None or rcls.tag not in (ClassTag.NDOUBLEPRIME, ClassTag.ZERO):
            note("substitute-y", {"m": m.to_text(), "right": s.right.to_text()})

    reps = mo.canonical_representatives(inst)
    if policy.exhaustive:
        for s in sums:
            for _, m in members:
                check_unary_into_sum(s, m)
    else:
        # Deterministic probes (every sum against each class representative)
        # plus a policy-bounded random sweep.
        for s in sums:
            for m in reps.values():
                check_unary_into_sum(s, m)
        rng = random.Random(policy.seed)
        for _ in range(policy.count):
            check_unary_into_sum(
                rng.choice(sums), mo.sample_monoid(inst, rng)[1]
            )

    v_keys = {v.canonical_key() for v in part.v_sums}
    pair_budget = policy.count if not policy.exhaustive else len(sums) ** 2
    pair_iter: Iterable[tuple[BinarySum, BinarySum]]
    if policy.exhaustive or len(sums) ** 2 <= pair_budget:
        pair_iter = itertools.product(sums, sums)
    else:
        rng = random.Random(policy.seed + 1)
        pair_iter = (
            (rng.choice(sums), rng.choice(sums)) for _ in range(pair_budget)
        )
    for s, t in pair_iter:
        counts["sum_into_sum"] += 1
        # Substituting t into the left variable of s: both composites with
        # t's parts vanish, leaving the essentially unary right part of s.
        if not lm.compose(s.left, t.left).is_zero() or not lm.compose(
            s.left, t.right
        ).is_zero():
            note("sum-into-x", {"s": s.left.to_text(), "t": t.left.to_text()})
        # Substituting t into the right variable: the left composite
        # vanishes and the right one collapses to an N''-or-zero map, so the
        # outcome is either essentially unary or a sum with the same left
        # part, hence inside the same part family.
        if not lm.compose(s.right, t.left).is_zero():
            note("sum-into-y", {"s": s.right.to_text(), "t": t.left.to_text()})
        rr = lm.compose(s.right, t.right)
        rcls = mo.classify(inst, rr)
        if rcls is None or rcls.tag not in (ClassTag.NDOUBLEPRIME, ClassTag.ZERO):
            note("sum-into-y", {"s": s.right.to_text(), "t": t.right.to_text()})
        elif rcls.tag is ClassTag.NDOUBLEPRIME:
            rebuilt = BinarySum(s.left, rr)
            expected_keys = d_keys if s.left in ideal_phis else v_keys
            if rebuilt.canonical_key() not in expected_keys:
                note("sum-into-y", {"rebuilt": "left escaped the part family"})

    for s in sums:
        counts["identifications"] += 1
        u = s.identified()
        cls = mo.classify(inst, u)
        expected = ClassTag.SPHI if s.canonical_key() in d_keys else ClassTag.SNPRIME
        if cls is None or cls.tag is not expected:
            note(
                "identification",
                {
                    "sum": s.left.to_text() + " // " + s.right.to_text(),
                    "got": cls.tag.value if cls else "not-in-monoid",
                },
            )

    counts["binary_sums"] = len(sums)
    if violations:
        return rp.failed("ci-closure", instance, policy.echo(), violations, counts)
    return rp.passed("ci-closure", instance, policy.echo(), counts)


# ---------------------------------------------------------------------------
# Forcing


@dataclass(frozen=True)
class Derivation:
    """One forced sum with the composition witness that produces it."""

    target: BinarySum
    rule: str
    witnesses: tuple[tuple[str, LinearMap], ...]
    verified: bool


def _solve_nprime_transport(
    inst: MonoidInstance, source: LinearMap, target: LinearMap
) -> LinearMap:
    """An N-map n1 with source . n1 = target, for span{b}-valued source and
    target with source(c) = b: route every A-column through c."""
    b_i = inst.basis.b_index
    cols = dict(mo._fixed_columns(inst, ClassTag.N))
    c_unit = inst._unit(inst.basis.c)
    for d in inst.basis.a_labels:
        beta = target.column(d)[b_i]
        if beta:
            cols[d] = tuple(beta * v % inst.q for v in c_unit)
    return lm.map_from_images(inst.basis, inst.q, cols)


def _solve_ndp_transport(
    inst: MonoidInstance, source: LinearMap, target: LinearMap
) -> LinearMap:
    """An N-map n2 with source . n2 = target, for span{a}-valued source and
    target fixing a: route every A-column through a."""
    a_i = inst.basis.a_index
    cols = dict(mo._fixed_columns(inst, ClassTag.N))
    a_unit = inst._unit(inst.basis.a)
    for d in inst.basis.a_labels:
        alpha = target.column(d)[a_i]
        if alpha:
            cols[d] = tuple(alpha * v % inst.q for v in a_unit)
    return lm.map_from_images(inst.basis, inst.q, cols)


def forced_functions(
    inst: MonoidInstance, from_sum: BinarySum, cap: int = MATERIALIZE_CAP
) -> list[Derivation]:
    """Everything a clone containing the monoid and one D-sum must contain:
    all of V, and phi_q(x) + m''(y) for every q below p and every m'' --
    each exhibited by explicit substitution witnesses."""
    left_cls = mo.classify(inst, from_sum.left)
    right_cls = mo.classify(inst, from_sum.right)
    if (
        left_cls is None
        or right_cls is None
        or left_cls.tag is not ClassTag.PHI
        or right_cls.tag is not ClassTag.NDOUBLEPRIME
    ):
        raise NotAPolymorphism(
            "forcing starts from a sum phi_p(x) + n''(y); got "
            f"{left_cls and left_cls.tag}, {right_cls and right_cls.tag}"
        )
    p = left_cls.p
    n_dp = from_sum.right
    out: list[Derivation] = []

    # Dropping into V: compose the phi part with the base N-map.
    base_n = mo.canonical_representatives(inst)[ClassTag.N]
    seed_nprime = lm.compose(from_sum.left, base_n)
    seed_v = BinarySum(seed_nprime, n_dp)
    cls = mo.classify(inst, seed_nprime)
    out.append(
        Derivation(
            seed_v,
            "v-from-d",
            (("x", base_n),),
            cls is not None and cls.tag is ClassTag.NPRIME,
        )
    )

    # All of V by transporting the seed.
    for target in sorted(v_sums(inst, cap), key=lambda s: s.canonical_key()):
        n1 = _solve_nprime_transport(inst, seed_nprime, target.left)
        n2 = _solve_ndp_transport(inst, n_dp, target.right)
        ok = (
            lm.compose(seed_nprime, n1) == target.left
            and lm.compose(n_dp, n2) == target.right
        )
        out.append(Derivation(target, "v-transport", (("x", n1), ("y", n2)), ok))

    # Descent along the order: phi_q + m'' for q below p.
    ndps = _class_members(inst, ClassTag.NDOUBLEPRIME, cap)
    for q in sorted_labels(inst.poset.elements):
        if not inst.poset.le(q, p):
            continue
        psi = inst.psi[p, q]
        for m_dp in ndps:
            n2 = _solve_ndp_transport(inst, n_dp, m_dp)
            target = BinarySum(inst.phi[q], m_dp)
            ok = (
                lm.compose(from_sum.left, psi) == inst.phi[q]
                and lm.compose(n_dp, n2) == m_dp
            )
            out.append(Derivation(target, "phi-descent", (("x", psi), ("y", n2)), ok))
    return out


def verify_forcing(
    inst: MonoidInstance, cap: int = MATERIALIZE_CAP
) -> rp.VerificationReport:
    """For each poset element, forcing from one of its D-sums must derive
    exactly V plus the D-sums of its downset, every derivation carrying a
    verified witness; classifying a clone from its own binary part must
    return the same clone."""
    instance = inst.fingerprint()
    ndp = mo.canonical_representatives(inst)[ClassTag.NDOUBLEPRIME]
    violations: list = []
    counts = {"derivations": 0, "roundtrips": 0}
    v_keys = {s.canonical_key() for s in v_sums(inst, cap)}
    for p in sorted_labels(inst.poset.elements):
        derivations = forced_functions(inst, BinarySum(inst.phi[p], ndp), cap)
        counts["derivations"] += len(derivations)
        for d in derivations:
            if not d.verified:
                violations.append({"p": p, "rule": d.rule, "check": "witness"})
        targets = {d.target.canonical_key() for d in derivations}
        downset = inst.poset.downset(p)
        expected = v_keys | {
            s.canonical_key() for s in d_sums(inst, downset, cap)
        }
        if targets != expected:
            violations.append(
                {
                    "p": p,
                    "check": "forced-set",
                    "missing": len(expected - targets),
                    "extra": len(targets - expected),
                }
            )
    for ideal in order_ideals(inst.poset).ideals:
        clone = clone_for(ideal)
        part = binary_part(inst, clone, cap)
        counts["roundtrips"] += 1
        if part.all_sums() and classify_clone(inst, part.all_sums()) != clone:
            violations.append({"ideal": ideal.label(), "check": "roundtrip"})
    if violations:
        return rp.failed("forcing", instance, "exhaustive", violations, counts)
    return rp.passed("forcing", instance, "exhaustive", counts)


def forcing_closure(
    inst: MonoidInstance, generators: Iterable[BinarySum]
) -> tuple[bool, frozenset[str]]:
    """Worklist fixpoint over the class-level forcing rules.

    State is (does the clone contain V, which poset elements have their
    D-sums forced); both grow monotonically, so the loop terminates.
    """
    has_v = False
    elements: set[str] = set()
    work: list[BinarySum] = []
    for s in generators:
        if not s.is_essentially_binary():
            continue
        oriented = _orient(inst, s)
        left_tag = mo.classify(inst, oriented.left).tag
        if left_tag is ClassTag.NPRIME:
            has_v = True
        else:
            work.append(oriented)
    while work:
        s = work.pop()
        has_v = True  # any D-sum forces all of V
        p = mo.classify(inst, s.left).p
        fresh = {
            q
            for q in inst.poset.elements
            if inst.poset.le(q, p) and q not in elements
        }
        elements.update(fresh)
    return has_v, frozenset(elements)


def _orient(inst: MonoidInstance, s: BinarySum) -> BinarySum:
    """Rotate an essentially binary sum so the N'-or-phi part sits on the
    left; raises NotAPolymorphism when neither orientation fits."""
    for candidate in (s, s.swap()):
        lcls = mo.classify(inst, candidate.left)
        rcls = mo.classify(inst, candidate.right)
        if (
            lcls is not None
            and rcls is not None
            and lcls.tag in (ClassTag.NPRIME, ClassTag.PHI)
            and rcls.tag is ClassTag.NDOUBLEPRIME
        ):
            return candidate
    raise NotAPolymorphism(
        "essentially binary sum does not pair N' or phi with N''"
    )


def classify_clone(
    inst: MonoidInstance, generators: Iterable[BinarySum]
) -> IntervalClone:
    """The interval clone generated by the monoid plus the given sums.

    Unary or constant summands contribute nothing; with no essentially
    binary generator the bottom clone comes back.  Otherwise the forcing
    closure determines the ideal.
    """
    gens = list(generators)
    for s in gens:
        if mo.classify(inst, s.left) is None or mo.classify(inst, s.right) is None:
            raise NotAPolymorphism("sum parts must belong to the monoid")
    binaries = [s for s in gens if s.is_essentially_binary()]
    for s in binaries:
        _orient(inst, s)
    if not binaries:
        return BOTTOM
    _, elements = forcing_closure(inst, binaries)
    return clone_for(OrderIdeal(elements))


# ---------------------------------------------------------------------------
# The interval map


@dataclass
class IntervalMap:
    """The full ideal-lattice-shaped family of clones over one instance."""

    instance: str
    lattice: IdealLattice
    clones: tuple[IntervalClone, ...]
    hasse: tuple[tuple[str, str], ...]
    report: rp.VerificationReport

    @property
    def size(self) -> int:
        return len(self.clones)

    def to_json_dict(self) -> dict:
        return {
            "schema": "clonelab-interval-map/1",
            "instance": self.instance,
            "size": self.size,
            "nodes": [c.label() for c in self.clones],
            "hasse_edges": [list(e) for e in self.hasse],
            "certificate": self.report.to_json_dict(),
        }


def build_interval_map(
    inst: MonoidInstance, cap: int = MATERIALIZE_CAP
) -> IntervalMap:
    """Construct one clone per order ideal plus the bottom, and certify at
    the binary level that the assignment is a lattice isomorphism onto the
    ideal lattice with an extra least element."""
    lattice = order_ideals(inst.poset)
    clones = (BOTTOM,) + tuple(clone_for(i) for i in lattice.ideals)
    parts = {c.label(): binary_part(inst, c, cap) for c in clones}
    keysets = {label: part.keys() for label, part in parts.items()}
    violations: list = []
    counts = {"clones": len(clones), "ideal_pairs": 0}

    # Order embedding: inclusion of binary parts tracks inclusion of ideals.
    for i in lattice.ideals:
        for j in lattice.ideals:
            counts["ideal_pairs"] += 1
            ci, cj = clone_for(i), clone_for(j)
            part_incl = keysets[ci.label()] <= keysets[cj.label()]
            if part_incl != (i.carrier <= j.carrier):
                violations.append(
                    {"i": i.label(), "j": j.label(), "check": "order-embedding"}
                )
            # Meets agree with ideal intersection.
            meet_keys = keysets[ci.label()] & keysets[cj.label()]
            expected_meet = binary_part(
                inst, clone_for(OrderIdeal(i.carrier & j.carrier)), cap
            ).keys()
            if meet_keys != expected_meet:
                violations.append({"i": i.label(), "j": j.label(), "check": "meet"})
            # Joins agree with the forcing closure of the union.
            gens = list(parts[ci.label()].all_sums()) + list(
                parts[cj.label()].all_sums()
            )
            has_v, elements = forcing_closure(inst, gens)
            union = i.carrier | j.carrier
            if elements != union or (bool(gens) and not has_v):
                violations.append({"i": i.label(), "j": j.label(), "check": "join"})

    # All clones distinct, bottom strictly below everything.
    labels = [c.label() for c in clones]
    if len(set(keysets[lab] for lab in labels)) != len(labels):
        violations.append({"check": "distinctness"})
    for i in lattice.ideals:
        if not keysets["bottom"] < keysets[clone_for(i).label()]:
            violations.append({"i": i.label(), "check": "bottom-strict"})

    counts["size"] = len(clones)
    instance = inst.fingerprint()
    if violations:
        report = rp.failed("interval-map", instance, "exhaustive", violations, counts)
    else:
        report = rp.passed("interval-map", instance, "exhaustive", counts)

    edges = [("bottom", OrderIdeal(frozenset()).label())]
    edges.extend(
        (a.label(), b.label()) for a, b in lattice.covers()
    )
    return IntervalMap(instance, lattice, clones, tuple(edges), report)


# ---------------------------------------------------------------------------
# Binary polymorphism sweep


EXHAUSTIVE_SWEEP_LIMIT = 200


def binary_polymorphism_sums(
    inst: MonoidInstance, policy: rp.Policy, cap: int = MATERIALIZE_CAP
) -> tuple[frozenset[BinarySum], rp.VerificationReport]:
    """Search for the sums f1(x) + f2(y) that preserve the monoid.

    A candidate survives when every substitution of monoid members g1, g2
    keeps f1.g1 + f2.g2 inside the monoid.  The essentially binary
    survivors must be exactly V together with the full D family, up to
    swapping the two variables; candidates with a zero side are essentially
    unary and always survive.  Nonconstant three-variable sums never
    survive: a single all-N probe breaks each one.
    """
    instance = inst.fingerprint()
    small = inst.monoid_size() <= EXHAUSTIVE_SWEEP_LIMIT
    members = (
        [f for _, f in mo.enumerate_monoid(inst)]
        if small
        else None
    )
    reps = mo.canonical_representatives(inst)
    probe_pairs: list[tuple[LinearMap, LinearMap]] = []
    if members is not None:
        probe_pairs = [(g1, g2) for g1 in members for g2 in members]
    else:
        rng = random.Random(policy.seed)
        probe_pairs = [
            (reps[t1], reps[t2]) for t1 in mo.ALL_TAGS for t2 in mo.ALL_TAGS
        ]
        probe_pairs.extend(
            (mo.sample_monoid(inst, rng)[1], mo.sample_monoid(inst, rng)[1])
            for _ in range(64)
        )

    def survives(f1: LinearMap, f2: LinearMap) -> bool:
        for g1, g2 in probe_pairs:
            total = lm.add(lm.compose(f1, g1), lm.compose(f2, g2))
            if mo.classify(inst, total) is None:
                return False
        return True

    expected = frozenset(
        s.canonical_key()
        for s in v_sums(inst, cap) | d_sums(inst, inst.poset.elements, cap)
    )
    violations: list = []
    survivors: set[BinarySum] = set()
    counts = {"candidates": 0, "unary_survivors": 0, "binary_survivors": 0}

    if members is not None:
        candidates = [(f1, f2) for f1 in members for f2 in members]
    else:
        rng = random.Random(policy.seed + 17)
        n_cand = min(policy.count or 1000, 2000)
        candidates = [
            (mo.sample_monoid(inst, rng)[1], mo.sample_monoid(inst, rng)[1])
            for _ in range(n_cand)
        ]
        candidates.extend(
            (s.left, s.right)
            for s in sorted(
                v_sums(inst, cap) | d_sums(inst, inst.poset.elements, cap),
                key=lambda s: s.canonical_key(),
            )[:64]
        )

    for f1, f2 in candidates:
        counts["candidates"] += 1
        s = BinarySum(f1, f2)
        if survives(f1, f2):
            if s.is_essentially_binary():
                survivors.add(s)
                counts["binary_survivors"] += 1
                if s.canonical_key() not in expected:
                    violations.append(
                        {
                            "check": "unexpected-survivor",
                            "f1": f1.to_text(),
                            "f2": f2.to_text(),
                        }
                    )
            else:
                counts["unary_survivors"] += 1
        elif s.is_essentially_binary() and s.canonical_key() in expected:
            violations.append(
                {"check": "expected-survivor-killed", "f1": f1.to_text()}
            )

    if members is not None:
        got = frozenset(s.canonical_key() for s in survivors)
        if got != expected:
            violations.append(
                {
                    "check": "survivor-set",
                    "missing": len(expected - got),
                    "extra": len(got - expected),
                }
            )

    # Three-variable sums: one all-N probe must break every nonconstant triple.
    n_rep = reps[ClassTag.N]
    triple_pool: list[tuple[LinearMap, LinearMap, LinearMap]]
    if members is not None:
        nonzero = [f for f in members if not f.is_zero()]
        triple_pool = list(itertools.product(nonzero, nonzero, nonzero))
    else:
        rng = random.Random(policy.seed + 23)
        triple_pool = [
            tuple(mo.sample_nonzero(inst, rng)[1] for _ in range(3))
            for _ in range(min(policy.count or 1000, 1000))
        ]
    counts["triples"] = len(triple_pool)
    for f1, f2, f3 in triple_pool:
        total = lm.add(
            lm.add(lm.compose(f1, n_rep), lm.compose(f2, n_rep)),
            lm.compose(f3, n_rep),
        )
        if mo.classify(inst, total) is not None:
            violations.append({"check": "triple-survivor", "f1": f1.to_text()})

    if violations:
        report = rp.failed("binary-sums", instance, policy.echo(), violations, counts)
    else:
        report = rp.passed("binary-sums", instance, policy.echo(), counts)
    return frozenset(survivors), report


def verify_pol_top(
    inst: MonoidInstance,
    policy: rp.Policy,
    trials: int = 100,
    seed: int = 0,
    sweep_report: rp.VerificationReport | None = None,
) -> rp.VerificationReport:
    """Certify that the monoid's polymorphisms stop at the full-ideal clone.

    Needs the witness premise (all A-singletons small); degenerate instances
    come back not-applicable.  The certification is conditional at finite
    scale: sums are checked at the binary level and witnesses guarantee the
    sum decomposition for the checked arities.
    """
    instance = inst.fingerprint()
    quasi = mo.verify_quasilinearity(inst, trials=trials, seed=seed)
    if quasi.verdict is rp.Verdict.NOT_APPLICABLE:
        return rp.not_applicable("pol-top", instance, policy.echo(), quasi.reason)
    if quasi.verdict is rp.Verdict.FAIL:
        return rp.failed("pol-top", instance, policy.echo(), quasi.counterexamples)
    sweep = sweep_report
    if sweep is None:
        _, sweep = binary_polymorphism_sums(inst, policy)
    if sweep.verdict is rp.Verdict.FAIL:
        return rp.failed(
            "pol-top", instance, policy.echo(), sweep.counterexamples, sweep.counts
        )
    notes = [
        "witness premise holds: every A-singleton is small",
        "binary survivors match the full-ideal clone; higher arities are"
        " covered by the witness decomposition at the checked sizes",
    ]
    return rp.passed("pol-top", instance, policy.echo(), sweep.counts, notes)
