"""Reader and writer for the subset of the MATPOWER case format used here.

Only ``baseMVA``, the ``bus`` matrix (id, type) and the ``branch`` matrix
(from, to, x, status) are interpreted. Every other section and column is
parsed positionally and discarded.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import CaseError

__all__ = [
    "BusRole",
    "BusRecord",
    "BranchRecord",
    "CaseFile",
    "parse_case",
    "load_case",
    "format_case",
]

# MATPOWER column positions (0-based)
BUS_I, BUS_TYPE = 0, 1
F_BUS, T_BUS, BR_X, BR_STATUS = 0, 1, 3, 10


class BusRole(str, enum.Enum):
    SLACK = "slack"
    PV = "pv"
    PQ = "pq"


_TYPE_TO_ROLE = {3: BusRole.SLACK, 2: BusRole.PV, 1: BusRole.PQ}
_ROLE_TO_TYPE = {v: k for k, v in _TYPE_TO_ROLE.items()}


@dataclass(frozen=True)
class BusRecord:
    id: int
    role: BusRole


@dataclass(frozen=True)
class BranchRecord:
    from_bus: int
    to_bus: int
    reactance: float
    in_service: bool = True


@dataclass(frozen=True)
class CaseFile:
    base_mva: float
    buses: tuple[BusRecord, ...]
    branches: tuple[BranchRecord, ...]

    def __post_init__(self):
        _validate(self)

    @property
    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    @property
    def slack_bus(self) -> int:
        return next(b.id for b in self.buses if b.role is BusRole.SLACK)

    @property
    def in_service_branches(self) -> list[BranchRecord]:
        return [br for br in self.branches if br.in_service]


def _validate(case: CaseFile) -> None:
    if not case.base_mva > 0:
        raise CaseError(f"malformed case: baseMVA must be positive, got {case.base_mva}")
    if not case.buses:
        raise CaseError("malformed case: no buses")
    ids = set()
    for bus in case.buses:
        if bus.id < 1:
            raise CaseError(f"malformed case: bus id {bus.id} < 1")
        if bus.id in ids:
            raise CaseError(f"malformed case: duplicate bus id {bus.id}")
        ids.add(bus.id)
    for br in case.branches:
        for end in (br.from_bus, br.to_bus):
            if end not in ids:
                raise CaseError(f"unknown bus: branch {br.from_bus}-{br.to_bus} references bus {end}")
        if br.from_bus == br.to_bus:
            raise CaseError(f"malformed case: branch connects bus {br.from_bus} to itself")
        if br.in_service and br.reactance == 0:
            raise CaseError(f"degenerate branch: {br.from_bus}-{br.to_bus} has zero reactance")
    n_slack = sum(b.role is BusRole.SLACK for b in case.buses)
    if n_slack != 1:
        raise CaseError(f"slack bus violation: expected exactly one type-3 bus, found {n_slack}")


_COMMENT = re.compile(r"%[^\n]*")
_SCALAR = r"\b(?:\w+\.)?{name}\s*=\s*([^;\n]+)"
_MATRIX = r"\b(?:\w+\.)?{name}\s*=\s*\[(.*?)\]"


def _number(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise CaseError(f"malformed case: not a number: {token!r}") from None


def _matrix(text: str, name: str, min_cols: int) -> list[list[float]]:
    m = re.search(_MATRIX.format(name=name), text, flags=re.S)
    if m is None:
        raise CaseError(f"malformed case: missing '{name}' matrix")
    rows = []
    for raw in re.split(r"[;\n]", m.group(1)):
        tokens = raw.replace(",", " ").split()
        if not tokens:
            continue
        if len(tokens) < min_cols:
            raise CaseError(
                f"malformed case: '{name}' row has {len(tokens)} columns, need at least {min_cols}"
            )
        rows.append([_number(t) for t in tokens])
    return rows


def _as_int(value: float, what: str) -> int:
    if value != int(value):
        raise CaseError(f"malformed case: {what} must be an integer, got {value}")
    return int(value)


def parse_case(text: str) -> CaseFile:
    """Parse MATPOWER-style case text into a validated :class:`CaseFile`.

    Raises :class:`~gridstealth.errors.CaseError` with one of the messages
    "malformed case", "slack bus violation", "degenerate branch" or
    "unknown bus".
    """
    text = _COMMENT.sub("", text)
    m = re.search(_SCALAR.format(name="baseMVA"), text)
    if m is None:
        raise CaseError("malformed case: missing 'baseMVA'")
    base_mva = _number(m.group(1).strip())

    buses = []
    for row in _matrix(text, "bus", 2):
        code = _as_int(row[BUS_TYPE], "bus type")
        if code not in _TYPE_TO_ROLE:
            raise CaseError(f"malformed case: unsupported bus type {code}")
        buses.append(BusRecord(_as_int(row[BUS_I], "bus id"), _TYPE_TO_ROLE[code]))

    branches = []
    for row in _matrix(text, "branch", BR_STATUS + 1):
        branches.append(
            BranchRecord(
                from_bus=_as_int(row[F_BUS], "branch endpoint"),
                to_bus=_as_int(row[T_BUS], "branch endpoint"),
                reactance=row[BR_X],
                in_service=row[BR_STATUS] != 0,
            )
        )
    return CaseFile(base_mva, tuple(buses), tuple(branches))


def load_case(path: str | Path) -> CaseFile:
    return parse_case(Path(path).read_text(encoding="utf-8"))


def format_case(case: CaseFile, name: str = "case") -> str:
    """Serialize to canonical case text that :func:`parse_case` reads back unchanged.

    Uninterpreted MATPOWER columns are written as zeros; floats use ``repr``
    so the round trip is exact.
    """
    lines = [
        f"function mpc = {name}",
        "mpc.version = '2';",
        f"mpc.baseMVA = {case.base_mva!r};",
        "",
        "%\tbus_i\ttype",
        "mpc.bus = [",
    ]
    lines += [f"\t{b.id}\t{_ROLE_TO_TYPE[b.role]};" for b in case.buses]
    lines += [
        "];",
        "",
        "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus",
        "mpc.branch = [",
    ]
    lines += [
        f"\t{br.from_bus}\t{br.to_bus}\t0\t{br.reactance!r}\t0\t0\t0\t0\t0\t0\t{int(br.in_service)};"
        for br in case.branches
    ]
    lines += ["];", ""]
    return "\n".join(lines)
