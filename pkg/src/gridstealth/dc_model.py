"""DC measurement Jacobian.

State: voltage angles at the non-slack buses (slack angle is the zero
reference). Measurements: one active-power injection per bus followed by
one from-end active-power flow per in-service branch, all per unit.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CaseError
from .matpower import CaseFile


@dataclass(frozen=True)
class MeasurementDescriptor:
    kind: Literal["injection", "flow"]
    buses: tuple[int, ...]  # (bus,) for injections, (from, to) for flows

    @classmethod
    def injection(cls, bus: int) -> "MeasurementDescriptor":
        return cls("injection", (bus,))

    @classmethod
    def flow(cls, from_bus: int, to_bus: int) -> "MeasurementDescriptor":
        return cls("flow", (from_bus, to_bus))

    @property
    def label(self) -> str:
        if self.kind == "injection":
            return f"inj:{self.buses[0]}"
        return f"flow:{self.buses[0]}-{self.buses[1]}"


@dataclass(frozen=True, eq=False)
class Jacobian:
    matrix: np.ndarray
    row_meta: tuple[MeasurementDescriptor, ...]
    state_buses: tuple[int, ...]
    slack_bus: int

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]

    def full_matrix(self) -> np.ndarray:
        """H with the slack column re-inserted; column order follows the case's bus order."""
        all_buses = sorted(self.state_buses + (self.slack_bus,), key=self._bus_order().get)
        out = np.zeros((self.M, len(all_buses)))
        state_pos = {b: j for j, b in enumerate(self.state_buses)}
        for j, bus in enumerate(all_buses):
            if bus == self.slack_bus:
                # injection rows of the susceptance matrix sum to zero; flow rows too
                out[:, j] = -self.matrix.sum(axis=1)
            else:
                out[:, j] = self.matrix[:, state_pos[bus]]
        return out

    def _bus_order(self) -> dict[int, int]:
        order = [m.buses[0] for m in self.row_meta if m.kind == "injection"]
        return {b: i for i, b in enumerate(order)}


def _connected(n_bus: int, index: dict[int, int], case: CaseFile) -> bool:
    rows = [index[br.from_bus] for br in case.in_service_branches]
    cols = [index[br.to_bus] for br in case.in_service_branches]
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_bus, n_bus))
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


def build_jacobian(case: CaseFile) -> Jacobian:
    """Build the (n_bus + n_branch) x (n_bus - 1) DC measurement matrix."""
    n_bus = len(case.buses)
    if n_bus < 2:
        raise CaseError("degenerate system: a single bus has no state variables")
    index = {bus_id: i for i, bus_id in enumerate(case.bus_ids)}
    if not _connected(n_bus, index, case):
        raise CaseError("islanded network: in-service branches do not connect every bus")

    branches = case.in_service_branches
    B = np.zeros((n_bus, n_bus))
    flows = np.zeros((len(branches), n_bus))
    for r, br in enumerate(branches):
        f, t = index[br.from_bus], index[br.to_bus]
        b = 1.0 / br.reactance
        B[f, f] += b
        B[t, t] += b
        B[f, t] -= b
        B[t, f] -= b
        flows[r, f] = b
        flows[r, t] = -b

    slack = index[case.slack_bus]
    keep = [i for i in range(n_bus) if i != slack]
    matrix = np.vstack([B, flows])[:, keep]
    meta = tuple(MeasurementDescriptor.injection(b) for b in case.bus_ids) + tuple(
        MeasurementDescriptor.flow(br.from_bus, br.to_bus) for br in branches
    )
    state_buses = tuple(case.bus_ids[i] for i in keep)
    return Jacobian(matrix, meta, state_buses, case.slack_bus)


def export_csv(jacobian: Jacobian, path: str | Path) -> None:
    """Write H as CSV: one row per measurement, label in the first column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["measurement"] + [f"theta:{b}" for b in jacobian.state_buses])
        for meta, row in zip(jacobian.row_meta, jacobian.matrix):
            writer.writerow([meta.label] + [repr(float(v)) for v in row])
