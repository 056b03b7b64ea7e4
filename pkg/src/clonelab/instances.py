"""Bundled example instances and the TOML instance-file loader.

An instance file names the field size, the poset (text format), and the
indexed family (either explicit "p: d1 d2" lines or a generated family of a
given ground size).  Bare names like "m0" resolve to the packaged files.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import monoid as mo
from . import poset as po
from .errors import CloneLabError, ConfigError
from .linmodel import BasisSpec
from .monoid import MonoidInstance
from .report import Policy, parse_policy

BUILTIN_NAMES = ("m0", "m1", "c2", "chain3", "antichain3")


def builtin_text(name: str) -> str:
    if name not in BUILTIN_NAMES:
        raise ConfigError(
            f"unknown builtin instance {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        )
    return (
        resources.files("clonelab").joinpath(f"data/{name}.toml").read_text()
    )


def load_instance(path_or_name: str) -> tuple[MonoidInstance, Policy]:
    """Load an instance from a TOML file path or a builtin name."""
    if path_or_name in BUILTIN_NAMES:
        text = builtin_text(path_or_name)
        source = f"builtin:{path_or_name}"
    else:
        p = Path(path_or_name)
        if not p.exists():
            raise ConfigError(f"instance file {path_or_name!r} does not exist")
        text = p.read_text()
        source = str(p)
    return parse_instance(text, source)


def parse_instance(text: str, source: str = "<string>") -> tuple[MonoidInstance, Policy]:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: not valid TOML: {exc}") from exc
    return instance_from_dict(data, source)


def instance_from_dict(data: dict, source: str = "<dict>") -> tuple[MonoidInstance, Policy]:
    def need(key: str):
        if key not in data:
            raise ConfigError(f"{source}: missing field {key!r}")
        return data[key]

    q = need("q")
    if not isinstance(q, int):
        raise ConfigError(f"{source}: field 'q' must be an integer")
    poset_text = need("poset")
    try:
        p = po.parse_poset(poset_text)
    except CloneLabError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: field 'poset': {exc}") from exc

    family_spec = data.get("family")
    ground = data.get("ground")
    if family_spec is not None:
        if isinstance(family_spec, list):
            family_spec = "\n".join(family_spec)
        try:
            members = po.parse_sperner_lines(family_spec)
        except ValueError as exc:
            raise ConfigError(f"{source}: field 'family': {exc}") from exc
        if ground is None:
            ground = sorted(
                {d for s in members.values() for d in s}, key=po.natural_key
            )
        fam = po.build_sperner(list(ground), p, members)
    else:
        size = data.get("ground_size")
        if size is None:
            raise ConfigError(
                f"{source}: need either a 'family' section or 'ground_size'"
            )
        fam = po.build_sperner(int(size), p)

    name = data.get("name", "")
    try:
        basis_labels = data.get("basis")
        if basis_labels is not None:
            inst = MonoidInstance(
                mo.Field(q), BasisSpec(tuple(basis_labels)), fam, p, name
            )
        else:
            inst = mo.build_instance(q, fam, p, name)
    except (ValueError, CloneLabError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    policy_text = data.get("policy", "exhaustive")
    policy = parse_policy(policy_text)
    return inst, policy


# Convenience builders mirroring the packaged files.


def m0() -> MonoidInstance:
    return load_instance("m0")[0]


def m1() -> MonoidInstance:
    return load_instance("m1")[0]


def c2() -> MonoidInstance:
    return load_instance("c2")[0]


def chain3() -> MonoidInstance:
    return load_instance("chain3")[0]


def antichain3() -> MonoidInstance:
    return load_instance("antichain3")[0]
