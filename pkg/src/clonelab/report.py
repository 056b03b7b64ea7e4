"""Structured verification reports and check policies."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import ConfigError

SCHEMA = "clonelab-report/1"


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class Policy:
    """How a verifier sweeps its search space.

    Sampled policies always carry an explicit seed so runs are repeatable.
    """

    kind: str  # "exhaustive" | "sampled"
    count: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("exhaustive", "sampled"):
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.kind == "sampled" and self.count <= 0:
            raise ConfigError("sampled policy needs a positive count")

    @property
    def exhaustive(self) -> bool:
        return self.kind == "exhaustive"

    def echo(self) -> str:
        if self.exhaustive:
            return "exhaustive"
        return f"sampled:{self.count}:seed={self.seed}"


EXHAUSTIVE = Policy("exhaustive")


def parse_policy(text: str) -> Policy:
    """Parse "exhaustive" or "sampled:COUNT:seed=SEED"."""
    text = text.strip()
    if text == "exhaustive":
        return EXHAUSTIVE
    m = re.fullmatch(r"sampled:(\d+):seed=(\d+)", text)
    if not m:
        raise ConfigError(
            f"bad policy {text!r}; expected 'exhaustive' or 'sampled:N:seed=S'"
        )
    return Policy("sampled", int(m.group(1)), int(m.group(2)))


@dataclass
class VerificationReport:
    """Outcome of one named check on one instance.

    A fail verdict must carry at least one counterexample payload; a
    not-applicable verdict must carry a reason.
    """

    check_id: str
    instance: str
    policy: str
    verdict: Verdict
    reason: str = ""
    counterexamples: list[Any] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    wall_time_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.verdict is Verdict.FAIL and not self.counterexamples:
            raise ValueError("fail verdict requires a counterexample payload")
        if self.verdict is Verdict.NOT_APPLICABLE and not self.reason:
            raise ValueError("not-applicable verdict requires a reason")

    def to_json_dict(self, include_timing: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema": SCHEMA,
            "check": self.check_id,
            "instance": self.instance,
            "policy": self.policy,
            "verdict": self.verdict.value,
            "counts": dict(sorted(self.counts.items())),
            "counterexamples": self.counterexamples[:20],
            "notes": list(self.notes),
        }
        if self.reason:
            out["reason"] = self.reason
        if include_timing:
            out["wall_time_ms"] = round(self.wall_time_ms, 3)
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(
            self.to_json_dict(include_timing), indent=2, sort_keys=True
        )

    def summary_line(self) -> str:
        head = f"{self.check_id}: {self.verdict.value}"
        bits = [f"{k}={v}" for k, v in sorted(self.counts.items())]
        if self.reason:
            bits.append(self.reason)
        return head + (f" ({', '.join(bits)})" if bits else "")


def passed(
    check_id: str,
    instance: str,
    policy: str,
    counts: dict[str, int] | None = None,
    notes: list[str] | None = None,
) -> VerificationReport:
    return VerificationReport(
        check_id,
        instance,
        policy,
        Verdict.PASS,
        counts=counts or {},
        notes=notes or [],
    )


def failed(
    check_id: str,
    instance: str,
    policy: str,
    counterexamples: list[Any],
    counts: dict[str, int] | None = None,
) -> VerificationReport:
    return VerificationReport(
        check_id,
        instance,
        policy,
        Verdict.FAIL,
        counterexamples=counterexamples,
        counts=counts or {},
    )


def not_applicable(
    check_id: str, instance: str, policy: str, reason: str
) -> VerificationReport:
    return VerificationReport(
        check_id, instance, policy, Verdict.NOT_APPLICABLE, reason=reason
    )


def fingerprint(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()[:12]
