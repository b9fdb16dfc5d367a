"""Bundled case files and seeded synthetic grids."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .matpower import BranchRecord, BusRecord, BusRole, CaseFile, load_case, parse_case

BUILTIN_CASES = ("case2", "case3", "case5", "case30")


def builtin_text(name: str) -> str:
    if name not in BUILTIN_CASES:
        raise KeyError(f"no bundled case named {name!r}; choose from {BUILTIN_CASES}")
    return resources.files("gridstealth").joinpath("data", f"{name}.m").read_text(encoding="utf-8")


def load_builtin(name: str) -> CaseFile:
    return parse_case(builtin_text(name))


def resolve_case(source: str | Path) -> tuple[CaseFile, str]:
    """Load a case from a path, or from a bundled name such as ``case30``.

    Returns the parsed case and the raw text (used for checksums).
    """
    path = Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    elif str(source) in BUILTIN_CASES:
        text = builtin_text(str(source))
    else:
        raise FileNotFoundError(f"case not found: {source}")
    return parse_case(text), text


def random_case(n_bus: int, seed: int, extra_branches: int | None = None,
                x_range: tuple[float, float] = (0.05, 0.5)) -> CaseFile:
    """Connected random grid: a random spanning tree plus ``extra_branches`` chords.

    Bus 1 is the slack. Reactances are uniform on ``x_range``.
    """
    if n_bus < 2:
        raise ValueError("need at least two buses")
    rng = np.random.default_rng(seed)
    if extra_branches is None:
        extra_branches = max(1, n_bus // 2)
    order = rng.permutation(n_bus) + 1
    edges = set()
    for i in range(1, n_bus):
        parent = order[rng.integers(0, i)]
        edges.add(tuple(sorted((int(order[i]), int(parent)))))
    candidates = [(a, b) for a in range(1, n_bus + 1) for b in range(a + 1, n_bus + 1)
                  if (a, b) not in edges]
    n_extra = min(extra_branches, len(candidates))
    for j in rng.choice(len(candidates), size=n_extra, replace=False):
        edges.add(candidates[j])
    buses = tuple(BusRecord(i, BusRole.SLACK if i == 1 else BusRole.PQ) for i in range(1, n_bus + 1))
    branches = tuple(
        BranchRecord(a, b, float(rng.uniform(*x_range))) for a, b in sorted(edges)
    )
    return CaseFile(100.0, buses, branches)


__all__ = ["BUILTIN_CASES", "builtin_text", "load_builtin", "load_case", "resolve_case", "random_case"]
