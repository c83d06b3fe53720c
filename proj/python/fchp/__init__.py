"""Python interface to the fchp solvers.

Instances and solutions are plain dicts in the same layout as the JSON files
read and written by the ``fchp`` command line tool.
"""

from __future__ import annotations

import json
from typing import Any, Sequence

from . import _fchp
from ._fchp import BudgetExhausted, DomainError, FchpError, Infeasible, InvalidInstance

__all__ = [
    "BudgetExhausted",
    "DomainError",
    "FchpError",
    "Infeasible",
    "InvalidInstance",
    "compute_gap",
    "construct",
    "evaluate",
    "exact",
    "generate_trace",
    "ils",
    "load",
    "run_cli",
    "violations",
]

compute_gap = _fchp.compute_gap


def _dump(doc: Any) -> str:
    return doc if isinstance(doc, str) else json.dumps(doc)


def load(path: str) -> Any:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def evaluate(instance: dict, solution: list) -> dict:
    """Cost breakdown (attend, backlog, replication, total, servers_od, financial)."""
    return json.loads(_fchp.evaluate(_dump(instance), _dump(solution)))


def violations(instance: dict, solution: list) -> list[str]:
    return _fchp.violations(_dump(instance), _dump(solution))


def construct(instance: dict, seed: int = 0) -> list:
    return json.loads(_fchp.construct(_dump(instance), seed))


def ils(instance: dict, *, iters: int = 3, level_max: int = 7, delay: int = 1, seed: int = 0,
        threads: int = 0) -> dict:
    """Best plan found, with keys ``cost``, ``assignments`` and ``best_after_start``."""
    return json.loads(_fchp.ils(_dump(instance), iters, level_max, delay, seed, threads))


def exact(instance: dict, *, node_limit: int = 5_000_000) -> dict:
    return json.loads(_fchp.exact(_dump(instance), node_limit))


def generate_trace(config: dict, seed: int | None = None) -> list[tuple[int, str, int]]:
    """Rows of (time_step, content_id, access_count)."""
    lines = _fchp.trace_csv(_dump(config), seed).splitlines()
    rows = []
    for line in lines[1:]:
        step, content, count = line.split(",")
        rows.append((int(step), content, int(count)))
    return rows


def run_cli(args: Sequence[str]) -> tuple[int, str, str]:
    """Runs one ``fchp`` subcommand in process; returns (exit code, stdout, stderr)."""
    return _fchp.run_cli(list(args))
