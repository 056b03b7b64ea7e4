import itertools
import random
from fractions import Fraction

import pytest

from clonelab import cloneengine as ce
from clonelab import machida as ma
from clonelab import report as rp
from clonelab.errors import ArityBeyondCap, CapMismatch, TooLarge


def enum22():
    return ma.enumerate_operations(2, 2)


# ---------------------------------------------------------------------------
# enumeration


def test_enumeration_counts():
    assert len(ma.enumerate_operations(2, 1).ops) == 4
    assert len(enum22().ops) == 20
    assert len(ma.enumerate_operations(3, 2).ops) == 27 + 19683


def test_enumeration_arity_monotone_and_lex():
    enum = enum22()
    arities = [f.arity for f in enum.ops]
    assert arities == sorted(arities)
    for n in (1, 2):
        tables = [f.table for f in enum.ops if f.arity == n]
        assert tables == sorted(tables)


def test_enumeration_guards():
    with pytest.raises(TooLarge):
        ma.enumerate_operations(4, 2)
    with pytest.raises(TooLarge):
        ma.enumerate_operations(2, 3)


# ---------------------------------------------------------------------------
# encode / decode


def test_encode_empty_and_full():
    enum = enum22()
    assert ma.encode([], enum).bits == (0,) * 20
    assert ma.encode(enum.ops, enum).bits == (1,) * 20


def test_encode_projections_at_projection_indices():
    enum = enum22()
    projs = [p for n in (1, 2) for p in ce.projections(n, 2)]
    bits = ma.encode(projs, enum).bits
    # Oracle: locate the projections in the enumeration directly.
    expected = set(enum.projection_indices())
    assert {i for i, b in enumerate(bits) if b} == expected


def test_encode_rejects_over_cap():
    enum = enum22()
    with pytest.raises(ArityBeyondCap):
        ma.encode([ce.med_op(2)], enum)


def test_encode_decode_roundtrip_random():
    enum = enum22()
    rng = random.Random(5)
    seen = set()
    for _ in range(30):
        ops = frozenset(f for f in enum.ops if rng.random() < 0.3)
        bits = ma.encode(ops, enum)
        assert ma.decode(bits, enum) == ops
        seen.add(bits.bits)
    # encode is injective: distinct sets gave distinct sequences.
    assert len(seen) >= 25


def test_bit_sequence_text_roundtrip():
    enum = enum22()
    bits = ma.encode([enum.ops[0], enum.ops[7]], enum)
    text = bits.to_text()
    assert text.splitlines()[0] == "2 2 20"
    assert ma.parse_bit_sequence(text) == bits


# ---------------------------------------------------------------------------
# lambda membership


def test_lambda_projections_only():
    enum = enum22()
    projs = [p for n in (1, 2) for p in ce.projections(n, 2)]
    l1, l2 = ma.lambda_membership(ma.encode(projs, enum), enum)
    assert l1 and l2


def test_lambda_all_zero():
    enum = enum22()
    l1, l2 = ma.lambda_membership(ma.BitSequence(2, 2, (0,) * 20), enum)
    assert not l1
    assert l2  # vacuous: every identity has a cleared factor bit


def test_lambda_all_one():
    enum = enum22()
    l1, l2 = ma.lambda_membership(ma.BitSequence(2, 2, (1,) * 20), enum)
    assert l1 and l2


def test_lambda_agreement_50_random_sets():
    report = ma.verify_lambda_agreement(domain=2, cap=2, trials=50, seed=20260809)
    assert report.verdict is rp.Verdict.PASS
    assert report.counts["trials"] == 50
    # Non-vacuous: genuine clones appeared among the trials.
    assert report.counts["clones_seen"] > 0


def test_lambda_agreement_spot_check():
    # A set closed under composition but missing a projection: lambda1 fails,
    # lambda2 holds; direct check fails.
    enum = enum22()
    const0 = ce.FiniteOperation(1, 2, (0, 0))
    ops = frozenset({const0})
    l1, l2 = ma.lambda_membership(ma.encode(ops, enum), enum)
    assert not l1
    assert l2
    assert not ma.is_capped_clone(ops, 2, 2)


def test_is_capped_clone_on_closure():
    clone = ce.closure([ce.min_op(2)], cap=2, domain=2)
    ops = frozenset(f for part in clone.parts for f in part)
    assert ma.is_capped_clone(ops, 2, 2)
    # Adding a unary op without its binary polymer breaks closure.
    neg = ce.FiniteOperation(1, 2, (1, 0))
    assert not ma.is_capped_clone(ops | {neg}, 2, 2)


# ---------------------------------------------------------------------------
# the metric


def pool():
    return ma.standard_pool(cap=3)


def test_distance_zero_iff_equal():
    p = pool()
    for c in p.values():
        assert ma.machida_distance(c, c) == 0


def test_distance_min_max_is_half():
    p = pool()
    # Oracle: the closure computation itself shows equal unary parts and
    # different binary parts.
    assert p["min"].unary_part() == p["max"].unary_part()
    assert p["min"].part(2) != p["max"].part(2)
    assert ma.machida_distance(p["min"], p["max"]) == Fraction(1, 2)


def test_distance_min_minmed_is_quarter():
    p = pool()
    assert p["min"].part(2) == p["min-med"].part(2)
    assert p["min"].part(3) != p["min-med"].part(3)
    assert ma.machida_distance(p["min"], p["min-med"]) == Fraction(1, 4)


def test_distance_one_iff_different_unary():
    p = pool()
    assert ma.machida_distance(p["proj"], p["perms"]) == 1
    assert ma.machida_distance(p["min"], p["perms"]) == 1


def test_cap_mismatch():
    a = ce.closure([ce.min_op(3)], cap=2)
    b = ce.closure([ce.min_op(3)], cap=3)
    with pytest.raises(CapMismatch):
        ma.machida_distance(a, b)


def test_metric_report():
    report = ma.verify_metric_properties(pool(), cap=3)
    assert report.verdict is rp.Verdict.PASS
    assert report.counts["pool"] == 7
    assert report.counts["triples"] == 343


def test_ultrametric_oracle():
    p = pool()
    names = sorted(p)
    for x, y, z in itertools.product(names, repeat=3):
        dxz = ma.machida_distance(p[x], p[z])
        dxy = ma.machida_distance(p[x], p[y])
        dyz = ma.machida_distance(p[y], p[z])
        assert dxz <= max(dxy, dyz)


def test_monotone_difference_on_pool():
    # Genuinely closed clones that differ at arity n also differ at every
    # larger arity within the cap.
    p = pool()
    for a, b in itertools.combinations(sorted(p), 2):
        ca, cb = p[a], p[b]
        differ = [ca.part(n) != cb.part(n) for n in (1, 2, 3)]
        if True in differ:
            first = differ.index(True)
            assert all(differ[first:]), (a, b)
