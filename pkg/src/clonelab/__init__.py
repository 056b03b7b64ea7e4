"""clonelab: finite models of a linear-function monoid whose clone interval
mirrors an order-ideal lattice, plus brute-force clone machinery and the
clone metric on small domains."""

from . import cloneengine, errors, instances, interval, linmodel, machida, monoid, poset, report
from .monoid import MonoidInstance, build_instance
from .report import Policy, VerificationReport, Verdict, parse_policy

__all__ = [
    "cloneengine",
    "errors",
    "instances",
    "interval",
    "linmodel",
    "machida",
    "monoid",
    "poset",
    "report",
    "MonoidInstance",
    "build_instance",
    "Policy",
    "VerificationReport",
    "Verdict",
    "parse_policy",
]

__version__ = "0.1.0"
