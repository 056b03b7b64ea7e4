"""Acceptance suite: one test per release criterion, each printing a
pass/fail line.  Run with -s to see the lines on success."""

import time

from clonelab import cli
from clonelab import cloneengine as ce
from clonelab import instances
from clonelab import interval as iv
from clonelab import linmodel as lm
from clonelab import machida as ma
from clonelab import monoid as mo
from clonelab import poset as po
from clonelab import report as rp
from clonelab.monoid import ClassTag

from test_interval import interval_order, one_plus_ideals, order_isomorphic

M0 = instances.m0()
M1 = instances.m1()
C2 = instances.c2()
CHAIN3 = instances.chain3()


def _criterion(num, desc, body):
    try:
        body()
    except AssertionError as exc:
        print(f"criterion {num:02d} [{desc}]: FAIL - {exc}")
        raise
    print(f"criterion {num:02d} [{desc}]: PASS")


def test_criterion_01_m0_enumeration_and_composition_table():
    def body():
        sizes = {tag: mo.class_size(M0, tag) for tag in mo.ALL_TAGS}
        assert sizes == {
            ClassTag.N: 1,
            ClassTag.NPRIME: 1,
            ClassTag.NDOUBLEPRIME: 1,
            ClassTag.PHI: 2,
            ClassTag.PSI: 2,
            ClassTag.SPHI: 2,
            ClassTag.SNPRIME: 1,
            ClassTag.ZERO: 1,
        }
        assert M0.monoid_size() == 11
        assert len(mo.enumerate_monoid(M0)) == 11
        t0 = time.perf_counter()
        report = mo.verify_composition_table(M0, rp.EXHAUSTIVE)
        elapsed = time.perf_counter() - t0
        assert report.verdict is rp.Verdict.PASS
        assert report.counts["pairs"] == 121
        assert report.counts["violations"] == 0
        assert elapsed < 1.0, f"composition sweep took {elapsed:.2f}s"

    _criterion(1, "m0 class sizes + exhaustive composition table", body)


def test_criterion_02_m0_sum_lemmas_exhaustive():
    def body():
        two, three = mo.verify_sum_lemmas(M0, rp.EXHAUSTIVE)
        assert two.verdict is rp.Verdict.PASS
        assert two.counts["pairs"] == 100
        assert three.verdict is rp.Verdict.PASS
        assert three.counts["triples"] == 1000

    _criterion(2, "m0 sums of two and three, exhaustive", body)


def test_criterion_03_m0_binary_sweep_and_interval():
    def body():
        survivors, report = iv.binary_polymorphism_sums(M0, rp.EXHAUSTIVE)
        assert report.verdict is rp.Verdict.PASS
        assert report.counts["candidates"] == 121  # 11^2 pairs x 11^2 probes
        expected = {s.canonical_key() for s in iv.v_sums(M0)}
        expected |= {s.canonical_key() for s in iv.d_sums(M0, M0.poset.elements)}
        assert {s.canonical_key() for s in survivors} == expected
        imap = iv.build_interval_map(M0)
        assert imap.size == 5
        assert imap.report.verdict is rp.Verdict.PASS
        nodes, le = interval_order(M0, imap)
        exp_nodes, exp_le = one_plus_ideals(M0)
        assert order_isomorphic(nodes, le, exp_nodes, exp_le)

    _criterion(3, "m0 survivor sweep + five-clone interval", body)


def test_criterion_04_c2_forcing_and_chain_interval():
    def body():
        ndp = mo.canonical_representatives(C2)[ClassTag.NDOUBLEPRIME]
        derivations = iv.forced_functions(C2, iv.BinarySum(C2.phi["p"], ndp))
        assert all(d.verified for d in derivations)
        descended = [
            d
            for d in derivations
            if d.rule == "phi-descent" and d.target.left == C2.phi["r"]
        ]
        assert descended, "no descent to phi_r"
        for d in descended:
            assert dict(d.witnesses)["x"] == C2.psi["p", "r"]
        imap = iv.build_interval_map(C2)
        assert imap.size == 4
        assert imap.report.verdict is rp.Verdict.PASS
        nodes, le = interval_order(C2, imap)
        for x in nodes:
            for y in nodes:
                assert le(x, y) or le(y, x), "interval is not a chain"
        exp_nodes, exp_le = one_plus_ideals(C2)
        assert order_isomorphic(nodes, le, exp_nodes, exp_le)

    _criterion(4, "c2 forcing with translation witness + four-chain", body)


def test_criterion_05_m1_smallness_witnesses_sampled_table():
    def body():
        smalls = po.small_sets(M1.family)
        assert smalls == [
            frozenset(),
            frozenset({"d1"}),
            frozenset({"d2"}),
            frozenset({"d3"}),
        ]
        witness_report = mo.verify_quasilinearity(M1, trials=100, seed=20260809)
        assert witness_report.verdict is rp.Verdict.PASS
        assert witness_report.counts["trials"] == 100
        for k in (1, 2, 3):
            targets = [
                lm.Vector(M1.basis, tuple((i + j) % 5 for i in range(M1.dim)))
                for j in range(k)
            ]
            witnesses = mo.quasilinearity_witnesses(M1, targets)
            for j, (e_j, h_j) in enumerate(witnesses):
                assert lm.apply(h_j, lm.unit(M1.basis, e_j)) == targets[j]
        table_report = mo.verify_composition_table(
            M1, rp.Policy("sampled", 10_000, seed=42)
        )
        assert table_report.verdict is rp.Verdict.PASS
        assert table_report.counts["violations"] == 0
        assert table_report.policy == "sampled:10000:seed=42"

    _criterion(5, "m1 smallness + witnesses + sampled table", body)


def test_criterion_06_psi_coherence_on_three_chain():
    def body():
        report = mo.verify_psi_coherence(CHAIN3)
        assert report.verdict is rp.Verdict.PASS
        assert report.counts["triples"] == 10  # all q <= r <= p chains

    _criterion(6, "translation coherence on the 3-chain", body)


def test_criterion_07_collapsing_checks():
    def body():
        t0 = time.perf_counter()
        report3 = ce.collapsing_check(3)
        elapsed = time.perf_counter() - t0
        assert report3.verdict is rp.Verdict.PASS
        assert report3.counts["polymorphisms"] == 12
        assert report3.counts["tables_scanned"] == 19683
        assert elapsed < 5.0, f"domain-3 scan took {elapsed:.2f}s"
        report4 = ce.collapsing_check(4)
        assert report4.verdict is rp.Verdict.PASS
        assert report4.counts["polymorphisms"] == 48

    _criterion(7, "permutation monoid collapsing, domains 3 and 4", body)


def test_criterion_08_pentagon_certificate():
    def body():
        report = ce.pentagon_check(cap=3)
        assert report.verdict is rp.Verdict.PASS
        clones = ce.pentagon_clones(cap=3)
        assert clones["min-max"].contains(ce.med_op(3))
        assert not clones["min-med"].contains(ce.max_op(3))
        meet = clones["min-med"].intersect(clones["max"])
        assert meet.parts == clones["proj"].parts

    _criterion(8, "pentagon certificate at cap 3", body)


def test_criterion_09_machida_suite():
    def body():
        pool = ma.standard_pool(cap=3)
        assert len(pool) >= 6
        metric_report = ma.verify_metric_properties(pool, cap=3)
        assert metric_report.verdict is rp.Verdict.PASS
        # Both regimes show up: same-unary pairs (d < 1) and the
        # permutation clone at distance one.
        assert metric_report.counts["distinct_distances"] >= 3
        lam = ma.verify_lambda_agreement(domain=2, cap=2, trials=50, seed=20260809)
        assert lam.verdict is rp.Verdict.PASS
        assert lam.counts["trials"] == 50
        assert lam.counts["clones_seen"] > 0

    _criterion(9, "ultrametric + sphere law + encoding agreement", body)


def test_criterion_10_determinism(tmp_path):
    def body():
        for argv_tail, sub in (
            (["--instance", "m0"], "a"),
            (["--instance", "m1", "--policy", "sampled:300:seed=5"], "b"),
        ):
            d1, d2 = tmp_path / f"{sub}1", tmp_path / f"{sub}2"
            assert cli.main(["verify", *argv_tail, "--out", str(d1)]) == 0
            assert cli.main(["verify", *argv_tail, "--out", str(d2)]) == 0
            for f1 in sorted(d1.iterdir()):
                f2 = d2 / f1.name
                assert f1.read_bytes() == f2.read_bytes(), f1.name

    _criterion(10, "byte-identical reports under fixed seeds", body)
