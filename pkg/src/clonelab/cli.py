"""Command-line interface: instance files in, JSON verification reports out.

Exit codes: 0 all checks pass (or are not applicable), 1 at least one check
failed, 2 configuration problem, 3 a size guard or budget tripped.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import cloneengine as ce
from . import interval as iv
from . import machida as ma
from . import monoid as mo
from . import report as rp
from .errors import BudgetExceeded, ConfigError, TooLarge
from .instances import load_instance
from .monoid import MonoidInstance
from .poset import order_ideals
from .report import Policy, VerificationReport, Verdict, parse_policy

BUNDLE_SCHEMA = "clonelab-bundle/1"


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    elapsed = (time.perf_counter() - t0) * 1000.0
    reports = out if isinstance(out, list) else [out]
    for r in reports:
        if isinstance(r, VerificationReport):
            r.wall_time_ms = elapsed / len(reports)
    return out


def _merged_ci_closure(inst: MonoidInstance, policy: Policy) -> VerificationReport:
    """One report covering the closure check of every ideal's clone; a
    sampled budget is split across the ideals."""
    lattice = order_ideals(inst.poset)
    if not policy.exhaustive:
        per_ideal = max(200, policy.count // len(lattice.ideals))
        sub_policy = Policy("sampled", per_ideal, policy.seed)
    else:
        sub_policy = policy
    counts: dict[str, int] = {"ideals": 0}
    counterexamples: list = []
    for ideal in lattice.ideals:
        sub = iv.verify_ci_closed(inst, ideal, sub_policy)
        counts["ideals"] += 1
        for key, value in sub.counts.items():
            counts[key] = counts.get(key, 0) + value
        if sub.verdict is Verdict.FAIL:
            for ce_payload in sub.counterexamples:
                ce_payload = dict(ce_payload)
                ce_payload["ideal"] = ideal.label()
                counterexamples.append(ce_payload)
    if counterexamples:
        return rp.failed(
            "ci-closure", inst.fingerprint(), policy.echo(), counterexamples, counts
        )
    return rp.passed("ci-closure", inst.fingerprint(), policy.echo(), counts)


def run_verify_suite(
    inst: MonoidInstance, policy: Policy, trials: int = 100
) -> list[VerificationReport]:
    """The full lemma suite for one instance, one report per check."""
    reports: list[VerificationReport] = []
    reports.append(_timed(mo.verify_composition_table, inst, policy))
    reports.append(_timed(mo.verify_phi_psi_all, inst))
    reports.append(_timed(mo.verify_psi_coherence, inst))
    reports.extend(_timed(mo.verify_sum_lemmas, inst, policy))
    reports.append(_timed(mo.verify_quasilinearity, inst, trials, policy.seed))
    reports.append(_timed(_merged_ci_closure, inst, policy))
    reports.append(_timed(iv.verify_forcing, inst))
    t0 = time.perf_counter()
    _, sweep = iv.binary_polymorphism_sums(inst, policy)
    sweep.wall_time_ms = (time.perf_counter() - t0) * 1000.0
    reports.append(sweep)
    reports.append(
        _timed(
            iv.verify_pol_top,
            inst,
            policy,
            trials=trials,
            seed=policy.seed,
            sweep_report=sweep,
        )
    )
    reports.append(_timed(lambda: iv.build_interval_map(inst).report))
    if inst.family.policy == "generated":
        for r in reports:
            r.notes.append(
                "family members were picked by the built-in generator policy"
            )
    return reports


def _bundle(reports: list[VerificationReport], include_timing: bool) -> dict:
    worst = Verdict.PASS
    for r in reports:
        if r.verdict is Verdict.FAIL:
            worst = Verdict.FAIL
    return {
        "schema": BUNDLE_SCHEMA,
        "verdict": worst.value,
        "reports": [r.to_json_dict(include_timing) for r in reports],
    }


def _emit(
    reports: list[VerificationReport],
    out_dir: str | None,
    include_timing: bool,
) -> None:
    for r in reports:
        print(r.summary_line())
        print(f"  ({r.wall_time_ms:.0f} ms)", file=sys.stderr)
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        for i, r in enumerate(reports, 1):
            name = f"{i:02d}_{r.check_id.replace('-', '_')}.json"
            (path / name).write_text(r.to_json(include_timing) + "\n")
        bundle = _bundle(reports, include_timing)
        (path / "bundle.json").write_text(
            json.dumps(bundle, indent=2, sort_keys=True) + "\n"
        )


def _exit_code(reports: list[VerificationReport]) -> int:
    return 1 if any(r.verdict is Verdict.FAIL for r in reports) else 0


def cmd_verify(args: argparse.Namespace) -> int:
    inst, policy = load_instance(args.instance)
    if args.policy:
        policy = parse_policy(args.policy)
    reports = run_verify_suite(inst, policy, trials=args.trials)
    _emit(reports, args.out, args.timing)
    return _exit_code(reports)


def cmd_interval_map(args: argparse.Namespace) -> int:
    inst, _ = load_instance(args.instance)
    imap = iv.build_interval_map(inst)
    payload = json.dumps(imap.to_json_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(payload)
        print(f"interval map with {imap.size} clones -> {args.out}")
    else:
        print(payload, end="")
    return 0 if imap.report.verdict is Verdict.PASS else 1


def cmd_collapse(args: argparse.Namespace) -> int:
    report = _timed(ce.collapsing_check, args.domain)
    _emit([report], args.out, args.timing)
    return _exit_code([report])


def cmd_pentagon(args: argparse.Namespace) -> int:
    report = _timed(ce.pentagon_check, args.cap, args.budget)
    _emit([report], args.out, args.timing)
    return _exit_code([report])


def cmd_metric(args: argparse.Namespace) -> int:
    if args.domain != 3:
        raise ConfigError("metric pools are built on the 3-element domain")
    pool = ma.standard_pool(args.cap)
    if args.pool == "minmax":
        pool = {k: v for k, v in pool.items() if k != "perms"}
    reports = [
        _timed(ma.verify_metric_properties, pool, args.cap),
        _timed(
            ma.verify_lambda_agreement,
            domain=2,
            cap=2,
            trials=args.trials,
            seed=args.seed,
        ),
    ]
    _emit(reports, args.out, args.timing)
    return _exit_code(reports)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clonelab",
        description=(
            "verify the linear-monoid construction and run brute-force clone"
            " checks on small domains"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="directory (or file) for JSON reports")
        p.add_argument(
            "--timing",
            action="store_true",
            help="include wall times in report files (breaks byte determinism)",
        )

    p_verify = sub.add_parser("verify", help="run the full lemma suite")
    p_verify.add_argument("--instance", required=True, help="TOML file or builtin name")
    p_verify.add_argument("--policy", help="exhaustive or sampled:N:seed=S")
    p_verify.add_argument(
        "--trials", type=int, default=100, help="witness trials (default 100)"
    )
    common(p_verify)
    p_verify.set_defaults(fn=cmd_verify)

    p_imap = sub.add_parser("interval-map", help="emit the interval diagram")
    p_imap.add_argument("--instance", required=True)
    p_imap.add_argument("--out", help="output file for the diagram JSON")
    p_imap.set_defaults(fn=cmd_interval_map)

    p_col = sub.add_parser("collapse", help="permutation-monoid collapsing check")
    p_col.add_argument("--domain", type=int, default=3, choices=(3, 4))
    common(p_col)
    p_col.set_defaults(fn=cmd_collapse)

    p_pent = sub.add_parser("pentagon", help="nonmodular sublattice certificate")
    p_pent.add_argument("--cap", type=int, default=3)
    p_pent.add_argument("--budget", type=int, default=ce.DEFAULT_BUDGET)
    common(p_pent)
    p_pent.set_defaults(fn=cmd_pentagon)

    p_met = sub.add_parser("metric", help="clone-metric and encoding checks")
    p_met.add_argument("--domain", type=int, default=3)
    p_met.add_argument("--cap", type=int, default=3)
    p_met.add_argument("--pool", choices=("minmax", "standard"), default="standard")
    p_met.add_argument("--trials", type=int, default=50)
    p_met.add_argument("--seed", type=int, default=0)
    common(p_met)
    p_met.set_defaults(fn=cmd_metric)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceeded, TooLarge) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
