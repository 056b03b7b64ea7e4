"""The monoid of linear functions built from a poset-indexed set family.

Eight classes make up the monoid M:

* N        fixes a and c, kills b, and has small support;
* N'       kills a and b, sends c to b, small support, range inside span{b};
* N''      fixes a, kills b and c, small support, range inside span{a};
* Phi      one map per poset element p: the span{b}-valued characteristic
           map of the family member indexed by p (plus c -> b);
* Psi      one map per comparable pair q <= p, translating the member at q
           bijectively onto the member at p while fixing a and c;
* S_Phi    sums phi_p + n'' ;
* S_N'     sums n' + n'' ;
* Zero     the zero map.

Composition never leaves this union, and which class a composite lands in
depends only on the classes of the factors; COMPOSITION_TABLE records the
possible outcomes and the verifiers check it against brute-force evidence.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from . import linmodel as lm
from . import report as rp
from .errors import (
    BasisMismatch,
    NotComparable,
    SingletonsNotSmall,
    TooLarge,
    UnknownElement,
)
from .linmodel import BasisSpec, Field, LinearMap, Vector
from .poset import Poset, SpernerFamily, is_small, small_sets, sorted_labels

EXHAUSTIVE_LIMIT = 5000


class ClassTag(str, Enum):
    N = "N"
    NPRIME = "Nprime"
    NDOUBLEPRIME = "Ndoubleprime"
    PHI = "Phi"
    PSI = "Psi"
    SPHI = "SPhi"
    SNPRIME = "SNprime"
    ZERO = "Zero"


NONZERO_TAGS = (
    ClassTag.N,
    ClassTag.NPRIME,
    ClassTag.NDOUBLEPRIME,
    ClassTag.PHI,
    ClassTag.PSI,
    ClassTag.SPHI,
    ClassTag.SNPRIME,
)
ALL_TAGS = NONZERO_TAGS + (ClassTag.ZERO,)


@dataclass(frozen=True)
class FunctionClass:
    """Class membership of a monoid element; Phi carries its poset element,
    Psi its comparable pair (p, q) with q below p."""

    tag: ClassTag
    p: str | None = None
    pair: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if self.tag is ClassTag.PHI and self.p is None:
            raise ValueError("Phi class needs its poset element")
        if self.tag is ClassTag.PSI and self.pair is None:
            raise ValueError("Psi class needs its element pair")


@dataclass(frozen=True)
class ClassifiedMap:
    map: LinearMap
    cls: FunctionClass


# Composition outcomes per (class of f, class of g); a composite f.g of
# nonzero-class factors always lands in one of the listed classes.
_T = ClassTag
COMPOSITION_TABLE: dict[tuple[ClassTag, ClassTag], frozenset[ClassTag]] = {}


def _set_row(row: ClassTag, entries: Sequence[Iterable[ClassTag] | ClassTag]) -> None:
    for col, entry in zip(NONZERO_TAGS, entries):
        cell = frozenset(entry) if not isinstance(entry, ClassTag) else frozenset({entry})
        COMPOSITION_TABLE[row, col] = cell


_set_row(_T.N, [_T.N, _T.ZERO, _T.NDOUBLEPRIME, _T.ZERO, _T.N, _T.NDOUBLEPRIME, _T.NDOUBLEPRIME])
_set_row(_T.NPRIME, [_T.NPRIME, _T.ZERO, _T.ZERO, _T.ZERO, _T.NPRIME, _T.ZERO, _T.ZERO])
_set_row(_T.NDOUBLEPRIME, [_T.NDOUBLEPRIME, _T.ZERO, _T.NDOUBLEPRIME, _T.ZERO, _T.NDOUBLEPRIME, _T.NDOUBLEPRIME, _T.NDOUBLEPRIME])
_set_row(_T.PHI, [_T.NPRIME, _T.ZERO, _T.ZERO, _T.ZERO, {_T.PHI, _T.NPRIME}, _T.ZERO, _T.ZERO])
_set_row(_T.PSI, [_T.N, _T.ZERO, _T.NDOUBLEPRIME, _T.ZERO, {_T.PSI, _T.N}, _T.NDOUBLEPRIME, _T.NDOUBLEPRIME])
_set_row(_T.SPHI, [_T.SNPRIME, _T.ZERO, _T.NDOUBLEPRIME, _T.ZERO, {_T.SPHI, _T.SNPRIME}, _T.NDOUBLEPRIME, _T.NDOUBLEPRIME])
_set_row(_T.SNPRIME, [_T.SNPRIME, _T.ZERO, _T.NDOUBLEPRIME, _T.ZERO, _T.SNPRIME, _T.NDOUBLEPRIME, _T.NDOUBLEPRIME])


def allowed_composite_tags(x: ClassTag, y: ClassTag) -> frozenset[ClassTag]:
    """Lookup extended to the zero class: anything composed with the zero map
    on either side is zero."""
    if ClassTag.ZERO in (x, y):
        return frozenset({ClassTag.ZERO})
    return COMPOSITION_TABLE[x, y]


@dataclass(frozen=True)
class MonoidInstance:
    """A finite model: prime field, basis, incomparable family, poset.

    The per-element maps phi_p and the translation maps psi_{p,q} are built
    once from the family, with each bijection mu_p sending the sorted member
    at p to positions 1..m.
    """

    field: Field
    basis: BasisSpec
    family: SpernerFamily
    poset: Poset
    name: str = ""

    def __post_init__(self) -> None:
        if set(self.family.indices()) != set(self.poset.elements):
            raise UnknownElement("family indices must match poset elements")
        if set(self.basis.a_labels) != set(self.family.ground):
            raise BasisMismatch("basis A-labels must equal the family ground set")

    # -- construction helpers ------------------------------------------------

    @property
    def q(self) -> int:
        return self.field.q

    @cached_property
    def dim(self) -> int:
        return self.basis.dim

    @cached_property
    def mu(self) -> dict[str, tuple[str, ...]]:
        """mu[p][i] is the member element at position i+1 of the sorted order."""
        return {p: sorted_labels(self.family.member(p)) for p in self.poset.elements}

    @cached_property
    def phi(self) -> dict[str, LinearMap]:
        return {p: self._build_phi(p) for p in sorted_labels(self.poset.elements)}

    @cached_property
    def psi(self) -> dict[tuple[str, str], LinearMap]:
        return {
            (p, q): self._build_psi(p, q) for p, q in self.poset.comparable_pairs()
        }

    @cached_property
    def exact_classes(self) -> dict[LinearMap, FunctionClass]:
        out = {}
        for p, f in self.phi.items():
            out[f] = FunctionClass(ClassTag.PHI, p=p)
        for pair, f in self.psi.items():
            out[f] = FunctionClass(ClassTag.PSI, pair=pair)
        return out

    @cached_property
    def smalls(self) -> tuple[frozenset[str], ...]:
        return tuple(small_sets(self.family))

    def _unit(self, label: str) -> tuple[int, ...]:
        return lm.unit(self.basis, label).coords

    def _build_phi(self, p: str) -> LinearMap:
        b = self._unit(self.basis.b)
        images = {self.basis.c: b}
        for d in self.family.member(p):
            images[d] = b
        return lm.map_from_images(self.basis, self.q, images)

    def _build_psi(self, p: str, q: str) -> LinearMap:
        images = {
            self.basis.a: self._unit(self.basis.a),
            self.basis.c: self._unit(self.basis.c),
        }
        source, target = self.mu[q], self.mu[p]
        for i, d in enumerate(source):
            images[d] = self._unit(target[i])
        return lm.map_from_images(self.basis, self.q, images)

    def psi_image_label(self, p: str, q: str, d: str) -> str:
        """Where psi_{p,q} sends a member element d of the source member."""
        i = self.mu[q].index(d)
        return self.mu[p][i]

    # -- basic values ----------------------------------------------------------

    @cached_property
    def zero(self) -> LinearMap:
        return lm.zero_map(self.basis, self.q)

    def small_support(self, f: LinearMap) -> bool:
        return is_small(lm.support(f), self.family)

    def fingerprint(self) -> str:
        payload = "|".join(
            (
                str(self.q),
                " ".join(self.basis.labels),
                self.poset.to_text(),
                self.family.to_lines(),
                self.family.policy,
            )
        )
        digest = rp.fingerprint(payload)
        return f"{self.name}:{digest}" if self.name else digest

    # -- class sizes -----------------------------------------------------------

    @cached_property
    def class_sizes(self) -> dict[ClassTag, int]:
        nv = self.q**self.dim - 1
        scalars = self.q - 1
        n_size = sum(nv ** len(s) for s in self.smalls)
        np_size = sum(scalars ** len(s) for s in self.smalls)
        ndp_size = np_size
        phi_size = len(self.poset.elements)
        psi_size = len(self.poset.comparable_pairs())
        return {
            ClassTag.N: n_size,
            ClassTag.NPRIME: np_size,
            ClassTag.NDOUBLEPRIME: ndp_size,
            ClassTag.PHI: phi_size,
            ClassTag.PSI: psi_size,
            ClassTag.SPHI: phi_size * ndp_size,
            ClassTag.SNPRIME: np_size * ndp_size,
            ClassTag.ZERO: 1,
        }

    def monoid_size(self) -> int:
        return sum(self.class_sizes.values())


def build_instance(
    q: int, family: SpernerFamily, poset: Poset, name: str = ""
) -> MonoidInstance:
    return MonoidInstance(
        Field(q), lm.basis_for_ground(family.ground), family, poset, name
    )


def build_phi(inst: MonoidInstance, p: str) -> LinearMap:
    if p not in inst.poset.elements:
        raise UnknownElement(f"{p!r} is not a poset element")
    return inst.phi[p]


def build_psi(inst: MonoidInstance, p: str, q: str) -> LinearMap:
    if p not in inst.poset.elements or q not in inst.poset.elements:
        raise UnknownElement("psi indices must be poset elements")
    if not inst.poset.le(q, p):
        raise NotComparable(f"{q!r} is not below {p!r}")
    return inst.psi[p, q]


# ---------------------------------------------------------------------------
# Classification


def _split_ab(
    inst: MonoidInstance, f: LinearMap
) -> tuple[LinearMap, LinearMap] | None:
    """Split f = g + h with g valued in span{b} (killing a) and h valued in
    span{a} (fixing a).  Returns None when some column leaves span{a, b}."""
    a_i = inst.basis.a_index
    b_i = inst.basis.b_index
    n = inst.dim
    g_cols, h_cols = [], []
    for col in f.cols:
        if any(v for i, v in enumerate(col) if i not in (a_i, b_i)):
            return None
        g_col = [0] * n
        h_col = [0] * n
        g_col[b_i] = col[b_i]
        h_col[a_i] = col[a_i]
        g_cols.append(tuple(g_col))
        h_cols.append(tuple(h_col))
    g = LinearMap(inst.basis, inst.q, tuple(g_cols))
    h = LinearMap(inst.basis, inst.q, tuple(h_cols))
    return g, h


def classify(inst: MonoidInstance, f: LinearMap) -> FunctionClass | None:
    """The unique class of f inside the monoid, or None when f is outside.

    Membership in Phi and Psi is exact-match against the built maps; the sum
    classes are recognized by splitting off the span{a}-valued component,
    which is unique because the other summand vanishes on a.
    """
    if f.basis != inst.basis or f.q != inst.q:
        raise BasisMismatch("map does not live over this instance")
    if f.is_zero():
        return FunctionClass(ClassTag.ZERO)
    if any(f.column(inst.basis.b)):
        return None
    a_vec = inst._unit(inst.basis.a)
    b_vec = inst._unit(inst.basis.b)
    c_vec = inst._unit(inst.basis.c)
    zero = (0,) * inst.dim
    fa = f.column(inst.basis.a)
    fc = f.column(inst.basis.c)

    if fa == a_vec and fc == c_vec:
        if inst.small_support(f):
            return FunctionClass(ClassTag.N)
        return inst.exact_classes.get(f)
    if fa == zero and fc == b_vec:
        if inst.small_support(f) and lm.range_in_span(f, inst.basis.b):
            return FunctionClass(ClassTag.NPRIME)
        return inst.exact_classes.get(f)
    if fa == a_vec and fc == zero:
        if inst.small_support(f) and lm.range_in_span(f, inst.basis.a):
            return FunctionClass(ClassTag.NDOUBLEPRIME)
        return None
    if fa == a_vec and fc == b_vec:
        parts = _split_ab(inst, f)
        if parts is None:
            return None
        g, h = parts
        if not inst.small_support(h):
            return None
        if inst.small_support(g):
            return FunctionClass(ClassTag.SNPRIME)
        if inst.exact_classes.get(g, FunctionClass(ClassTag.ZERO)).tag is ClassTag.PHI:
            return FunctionClass(ClassTag.SPHI)
        return None
    return None


def decompose_sum(
    inst: MonoidInstance, f: LinearMap
) -> tuple[LinearMap, LinearMap] | None:
    """For S_Phi and S_N' members, the unique split into the span{b}-valued
    part (phi_p or n') and the span{a}-valued part (n'')."""
    cls = classify(inst, f)
    if cls is None or cls.tag not in (ClassTag.SPHI, ClassTag.SNPRIME):
        return None
    return _split_ab(inst, f)


# ---------------------------------------------------------------------------
# Enumeration and sampling


def _nonzero_vectors(inst: MonoidInstance) -> Iterator[tuple[int, ...]]:
    for coords in itertools.product(range(inst.q), repeat=inst.dim):
        if any(coords):
            yield coords


def _scaled_units(inst: MonoidInstance, label: str) -> list[tuple[int, ...]]:
    base = inst._unit(label)
    return [tuple(s * v % inst.q for v in base) for s in range(1, inst.q)]


def _enumerate_small_support_class(
    inst: MonoidInstance,
    fixed: dict[str, tuple[int, ...]],
    image_pool: Iterable[tuple[int, ...]] | None,
) -> Iterator[LinearMap]:
    """All maps with the given fixed a/b/c columns and every small support
    pattern; image_pool limits support images (None = all nonzero vectors)."""
    for s in inst.smalls:
        labels = sorted_labels(s)
        pools = [
            list(image_pool) if image_pool is not None else list(_nonzero_vectors(inst))
            for _ in labels
        ]
        for images in itertools.product(*pools):
            cols = dict(fixed)
            cols.update(dict(zip(labels, images)))
            yield lm.map_from_images(inst.basis, inst.q, cols)


def _fixed_columns(inst: MonoidInstance, tag: ClassTag) -> dict[str, tuple[int, ...]]:
    a, b, c = inst.basis.a, inst.basis.b, inst.basis.c
    unit = inst._unit
    if tag is ClassTag.N:
        return {a: unit(a), c: unit(c)}
    if tag is ClassTag.NPRIME:
        return {c: unit(b)}
    if tag is ClassTag.NDOUBLEPRIME:
        return {a: unit(a)}
    raise ValueError(f"no fixed-column template for {tag}")


def class_size(inst: MonoidInstance, tag: ClassTag) -> int:
    return inst.class_sizes[tag]


def enumerate_class(
    inst: MonoidInstance, tag: ClassTag, cap: int = EXHAUSTIVE_LIMIT, seed: int = 0
) -> list[LinearMap]:
    """All members of a class when its size fits under cap, otherwise cap
    distinct samples drawn with the given seed."""
    size = class_size(inst, tag)
    if size <= cap:
        return list(_iterate_class(inst, tag))
    rng = random.Random(seed)
    out: set[LinearMap] = set()
    while len(out) < cap:
        out.add(sample_class(inst, tag, rng))
    return sorted(out, key=lambda f: f.cols)


def _iterate_class(inst: MonoidInstance, tag: ClassTag) -> Iterator[LinearMap]:
    if tag is ClassTag.ZERO:
        yield inst.zero
    elif tag is ClassTag.PHI:
        for p in sorted_labels(inst.poset.elements):
            yield inst.phi[p]
    elif tag is ClassTag.PSI:
        for pair in inst.poset.comparable_pairs():
            yield inst.psi[pair]
    elif tag is ClassTag.N:
        yield from _enumerate_small_support_class(
            inst, _fixed_columns(inst, tag), None
        )
    elif tag is ClassTag.NPRIME:
        yield from _enumerate_small_support_class(
            inst, _fixed_columns(inst, tag), _scaled_units(inst, inst.basis.b)
        )
    elif tag is ClassTag.NDOUBLEPRIME:
        yield from _enumerate_small_support_class(
            inst, _fixed_columns(inst, tag), _scaled_units(inst, inst.basis.a)
        )
    elif tag is ClassTag.SPHI:
        for p in sorted_labels(inst.poset.elements):
            for ndp in _iterate_class(inst, ClassTag.NDOUBLEPRIME):
                yield lm.add(inst.phi[p], ndp)
    elif tag is ClassTag.SNPRIME:
        for npr in _iterate_class(inst, ClassTag.NPRIME):
            for ndp in _iterate_class(inst, ClassTag.NDOUBLEPRIME):
                yield lm.add(npr, ndp)
    else:
        raise ValueError(f"unknown class {tag}")


def _weighted_small_support(
    inst: MonoidInstance, rng: random.Random, images_per_element: int
) -> frozenset[str]:
    weights = [images_per_element ** len(s) for s in inst.smalls]
    pick = rng.randrange(sum(weights))
    for s, w in zip(inst.smalls, weights):
        if pick < w:
            return s
        pick -= w
    raise AssertionError("unreachable")


def _sample_nonzero_vector(inst: MonoidInstance, rng: random.Random) -> tuple[int, ...]:
    while True:
        coords = tuple(rng.randrange(inst.q) for _ in range(inst.dim))
        if any(coords):
            return coords


def sample_class(inst: MonoidInstance, tag: ClassTag, rng: random.Random) -> LinearMap:
    """One member drawn uniformly from a class."""
    if tag is ClassTag.ZERO:
        return inst.zero
    if tag is ClassTag.PHI:
        return inst.phi[rng.choice(sorted_labels(inst.poset.elements))]
    if tag is ClassTag.PSI:
        return inst.psi[rng.choice(inst.poset.comparable_pairs())]
    if tag is ClassTag.SPHI:
        return lm.add(
            sample_class(inst, ClassTag.PHI, rng),
            sample_class(inst, ClassTag.NDOUBLEPRIME, rng),
        )
    if tag is ClassTag.SNPRIME:
        return lm.add(
            sample_class(inst, ClassTag.NPRIME, rng),
            sample_class(inst, ClassTag.NDOUBLEPRIME, rng),
        )
    if tag is ClassTag.N:
        support = _weighted_small_support(inst, rng, inst.q**inst.dim - 1)
        images = {d: _sample_nonzero_vector(inst, rng) for d in support}
    elif tag is ClassTag.NPRIME:
        support = _weighted_small_support(inst, rng, inst.q - 1)
        pool = _scaled_units(inst, inst.basis.b)
        images = {d: rng.choice(pool) for d in support}
    elif tag is ClassTag.NDOUBLEPRIME:
        support = _weighted_small_support(inst, rng, inst.q - 1)
        pool = _scaled_units(inst, inst.basis.a)
        images = {d: rng.choice(pool) for d in support}
    else:
        raise ValueError(f"unknown class {tag}")
    cols = dict(_fixed_columns(inst, tag))
    cols.update(images)
    return lm.map_from_images(inst.basis, inst.q, cols)


def sample_monoid(inst: MonoidInstance, rng: random.Random) -> tuple[ClassTag, LinearMap]:
    """One member drawn uniformly from the whole monoid."""
    sizes = inst.class_sizes
    pick = rng.randrange(sum(sizes.values()))
    for tag in ALL_TAGS:
        if pick < sizes[tag]:
            return tag, sample_class(inst, tag, rng)
        pick -= sizes[tag]
    raise AssertionError("unreachable")


def sample_nonzero(inst: MonoidInstance, rng: random.Random) -> tuple[ClassTag, LinearMap]:
    while True:
        tag, f = sample_monoid(inst, rng)
        if tag is not ClassTag.ZERO:
            return tag, f


def enumerate_monoid(
    inst: MonoidInstance, limit: int = EXHAUSTIVE_LIMIT
) -> list[tuple[ClassTag, LinearMap]]:
    """Every monoid element with its class; guarded by a size limit."""
    total = inst.monoid_size()
    if total > limit:
        raise TooLarge(
            f"monoid has {total} elements, above the exhaustive limit {limit};"
            " use a sampled policy"
        )
    out = []
    for tag in ALL_TAGS:
        out.extend((tag, f) for f in _iterate_class(inst, tag))
    return out


def canonical_representatives(inst: MonoidInstance) -> dict[ClassTag, LinearMap]:
    """One minimal-support member per class, used as deterministic probes in
    sampled sweeps (compositions behave class-wise, so probes catch the
    class-level failures deterministically)."""
    first_p = sorted_labels(inst.poset.elements)[0]
    first_pair = inst.poset.comparable_pairs()[0]
    base_n = lm.map_from_images(inst.basis, inst.q, _fixed_columns(inst, ClassTag.N))
    base_np = lm.map_from_images(inst.basis, inst.q, _fixed_columns(inst, ClassTag.NPRIME))
    base_ndp = lm.map_from_images(inst.basis, inst.q, _fixed_columns(inst, ClassTag.NDOUBLEPRIME))
    return {
        ClassTag.N: base_n,
        ClassTag.NPRIME: base_np,
        ClassTag.NDOUBLEPRIME: base_ndp,
        ClassTag.PHI: inst.phi[first_p],
        ClassTag.PSI: inst.psi[first_pair],
        ClassTag.SPHI: lm.add(inst.phi[first_p], base_ndp),
        ClassTag.SNPRIME: lm.add(base_np, base_ndp),
        ClassTag.ZERO: inst.zero,
    }


# ---------------------------------------------------------------------------
# Verifiers


def _ce_pair(f: LinearMap, g: LinearMap, got, expected) -> dict:
    return {
        "f": f.to_text(),
        "g": g.to_text(),
        "got": got.tag.value if got else "not-in-monoid",
        "expected": sorted(t.value for t in expected),
    }


def verify_composition_table(
    inst: MonoidInstance, policy: rp.Policy
) -> rp.VerificationReport:
    """Check that every composite lands where the class table says."""
    violations = []
    pairs = nviol = 0

    def check(xt: ClassTag, f: LinearMap, yt: ClassTag, g: LinearMap) -> None:
        nonlocal pairs, nviol
        pairs += 1
        got = classify(inst, lm.compose(f, g))
        allowed = allowed_composite_tags(xt, yt)
        if got is None or got.tag not in allowed:
            nviol += 1
            if len(violations) < 20:
                violations.append(_ce_pair(f, g, got, allowed))

    if policy.exhaustive:
        members = enumerate_monoid(inst)
        for xt, f in members:
            for yt, g in members:
                check(xt, f, yt, g)
    else:
        reps = canonical_representatives(inst)
        for xt in ALL_TAGS:
            for yt in ALL_TAGS:
                check(xt, reps[xt], yt, reps[yt])
        rng = random.Random(policy.seed)
        for _ in range(policy.count):
            xt, f = sample_monoid(inst, rng)
            yt, g = sample_monoid(inst, rng)
            check(xt, f, yt, g)

    counts = {"pairs": pairs, "violations": nviol}
    if violations:
        return rp.failed(
            "composition-table", inst.fingerprint(), policy.echo(), violations, counts
        )
    return rp.passed("composition-table", inst.fingerprint(), policy.echo(), counts)


def check_phi_psi_translation(
    inst: MonoidInstance, r: str, p: str, q: str
) -> rp.VerificationReport:
    """phi_r composed with psi_{p,q} equals phi_q when r = p and otherwise
    drops into N' with support inside the psi-preimage of the member overlap."""
    if not inst.poset.le(q, p):
        raise NotComparable(f"{q!r} is not below {p!r}")
    composite = lm.compose(inst.phi[r], inst.psi[p, q])
    instance = inst.fingerprint()
    label = f"r={r},p={p},q={q}"
    if r == p:
        ok = composite == inst.phi[q]
        detail = {"triple": label, "expected": f"phi_{q}", "got": composite.to_text()}
    else:
        cls = classify(inst, composite)
        ok = cls is not None and cls.tag is ClassTag.NPRIME
        if ok:
            overlap = inst.family.member(r) & inst.family.member(p)
            preimage = frozenset(
                d
                for d in inst.family.member(q)
                if inst.psi_image_label(p, q, d) in overlap
            )
            ok = lm.support(composite) <= preimage
        detail = {
            "triple": label,
            "expected": "Nprime with support in the translated overlap",
            "got": cls.tag.value if cls else "not-in-monoid",
        }
    if ok:
        return rp.passed(
            "phi-psi-translation", instance, "exhaustive", {"triples": 1}
        )
    return rp.failed("phi-psi-translation", instance, "exhaustive", [detail])


def verify_phi_psi_all(inst: MonoidInstance) -> rp.VerificationReport:
    """Sweep every triple (r, p, q) with q below p."""
    violations = []
    triples = 0
    for r in sorted_labels(inst.poset.elements):
        for p, q in inst.poset.comparable_pairs():
            triples += 1
            sub = check_phi_psi_translation(inst, r, p, q)
            if sub.verdict is rp.Verdict.FAIL:
                violations.extend(sub.counterexamples)
    counts = {"triples": triples}
    if violations:
        return rp.failed(
            "phi-psi-translation", inst.fingerprint(), "exhaustive", violations, counts
        )
    return rp.passed("phi-psi-translation", inst.fingerprint(), "exhaustive", counts)


def verify_psi_coherence(inst: MonoidInstance) -> rp.VerificationReport:
    """psi_{p,r} . psi_{r,q} = psi_{p,q} for every chain q <= r <= p."""
    violations = []
    triples = 0
    elems = sorted_labels(inst.poset.elements)
    for p in elems:
        for r in elems:
            if not inst.poset.le(r, p):
                continue
            for q in elems:
                if not inst.poset.le(q, r):
                    continue
                triples += 1
                got = lm.compose(inst.psi[p, r], inst.psi[r, q])
                if got != inst.psi[p, q]:
                    violations.append(
                        {"triple": f"q={q},r={r},p={p}", "got": got.to_text()}
                    )
    counts = {"triples": triples}
    if violations:
        return rp.failed(
            "psi-coherence", inst.fingerprint(), "exhaustive", violations, counts
        )
    return rp.passed("psi-coherence", inst.fingerprint(), "exhaustive", counts)


_SUM_LEFT = (ClassTag.NPRIME, ClassTag.PHI)


def _sum_shape_ok(xt: ClassTag, yt: ClassTag) -> bool:
    return (xt in _SUM_LEFT and yt is ClassTag.NDOUBLEPRIME) or (
        yt in _SUM_LEFT and xt is ClassTag.NDOUBLEPRIME
    )


def verify_sum_lemmas(
    inst: MonoidInstance, policy: rp.Policy
) -> list[rp.VerificationReport]:
    """Two reports: nonconstant pairs summing into the monoid must pair N'
    or Phi with N'' (and all such pairs do land inside); no nonconstant
    triple sums back into the monoid."""
    pair_viol: list = []
    triple_viol: list = []
    pairs = triples = in_monoid = 0

    def check_pair(xt: ClassTag, f: LinearMap, yt: ClassTag, g: LinearMap) -> None:
        nonlocal pairs, in_monoid
        pairs += 1
        s = classify(inst, lm.add(f, g))
        if s is not None:
            in_monoid += 1
            if not _sum_shape_ok(xt, yt):
                pair_viol.append(_ce_pair(f, g, s, set()))
        elif _sum_shape_ok(xt, yt):
            pair_viol.append(
                {
                    "f": f.to_text(),
                    "g": g.to_text(),
                    "got": "not-in-monoid",
                    "expected": "sum classes",
                }
            )

    def check_triple(f: LinearMap, g: LinearMap, h: LinearMap) -> None:
        nonlocal triples
        triples += 1
        s = classify(inst, lm.add(lm.add(f, g), h))
        if s is not None:
            triple_viol.append(
                {"f": f.to_text(), "g": g.to_text(), "h": h.to_text(), "got": s.tag.value}
            )

    if policy.exhaustive:
        members = [
            (t, f) for t, f in enumerate_monoid(inst) if t is not ClassTag.ZERO
        ]
        for xt, f in members:
            for yt, g in members:
                check_pair(xt, f, yt, g)
        for _, f in members:
            for _, g in members:
                for _, h in members:
                    check_triple(f, g, h)
    else:
        reps = canonical_representatives(inst)
        for xt in NONZERO_TAGS:
            for yt in NONZERO_TAGS:
                check_pair(xt, reps[xt], yt, reps[yt])
        rng = random.Random(policy.seed)
        for _ in range(policy.count):
            xt, f = sample_nonzero(inst, rng)
            yt, g = sample_nonzero(inst, rng)
            check_pair(xt, f, yt, g)
        for _ in range(policy.count):
            check_triple(
                sample_nonzero(inst, rng)[1],
                sample_nonzero(inst, rng)[1],
                sample_nonzero(inst, rng)[1],
            )

    instance = inst.fingerprint()
    echo = policy.echo()
    two = (
        rp.failed("sums-of-two", instance, echo, pair_viol, {"pairs": pairs, "sums_in_monoid": in_monoid})
        if pair_viol
        else rp.passed("sums-of-two", instance, echo, {"pairs": pairs, "sums_in_monoid": in_monoid})
    )
    three = (
        rp.failed("sums-of-three", instance, echo, triple_viol, {"triples": triples})
        if triple_viol
        else rp.passed("sums-of-three", instance, echo, {"triples": triples})
    )
    return [two, three]


def quasilinearity_witnesses(
    inst: MonoidInstance, targets: Sequence[Vector]
) -> list[tuple[str, LinearMap]]:
    """Witness maps h_j in N with h_j(e_j) = target_j and h_j(e_i) = 0 for
    i != j, over distinct A-labels e_j.

    Needs every singleton of A to be small; degenerate instances (members of
    size 1) cannot provide witnesses and raise SingletonsNotSmall.
    """
    a_labels = sorted_labels(inst.basis.a_labels)
    k = len(targets)
    if k > len(a_labels):
        raise ValueError(f"need {k} distinct A-labels, have {len(a_labels)}")
    not_small = [d for d in a_labels if not is_small({d}, inst.family)]
    if not_small:
        raise SingletonsNotSmall(
            f"singletons {not_small} are not small; witnesses unavailable"
        )
    out = []
    for j in range(k):
        target = targets[j]
        if target.basis != inst.basis:
            raise BasisMismatch("target vector uses a different basis")
        e_j = a_labels[j]
        cols = dict(_fixed_columns(inst, ClassTag.N))
        cols[e_j] = target.coords
        out.append((e_j, lm.map_from_images(inst.basis, inst.q, cols)))
    return out


def verify_quasilinearity(
    inst: MonoidInstance, trials: int, seed: int, max_k: int | None = None
) -> rp.VerificationReport:
    """Random-target trials of the witness construction for k up to |A|."""
    instance = inst.fingerprint()
    a_labels = sorted_labels(inst.basis.a_labels)
    k_top = min(max_k or len(a_labels), len(a_labels))
    rng = random.Random(seed)
    policy_echo = f"sampled:{trials}:seed={seed}"
    violations = []
    checked = 0
    try:
        for _ in range(trials):
            k = rng.randrange(1, k_top + 1)
            targets = [
                Vector(
                    inst.basis,
                    tuple(rng.randrange(inst.q) for _ in range(inst.dim)),
                )
                for _ in range(k)
            ]
            witnesses = quasilinearity_witnesses(inst, targets)
            checked += 1
            for j, (e_j, h_j) in enumerate(witnesses):
                cls = classify(inst, h_j)
                ok = cls is not None and cls.tag is ClassTag.N
                ok = ok and lm.apply(h_j, lm.unit(inst.basis, e_j)) == targets[j]
                for i, (e_i, _) in enumerate(witnesses):
                    if i != j:
                        ok = ok and lm.apply(
                            h_j, lm.unit(inst.basis, e_i)
                        ).is_zero()
                if not ok:
                    violations.append(
                        {"k": k, "j": j, "witness": h_j.to_text()}
                    )
    except SingletonsNotSmall as exc:
        return rp.not_applicable(
            "quasilinearity-witnesses", instance, policy_echo, str(exc)
        )
    counts = {"trials": checked}
    if violations:
        return rp.failed(
            "quasilinearity-witnesses", instance, policy_echo, violations, counts
        )
    return rp.passed("quasilinearity-witnesses", instance, policy_echo, counts)
