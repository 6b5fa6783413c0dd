"""Resource budgets and the error types shared by every module."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

DEFAULT_BUDGET_MS = 60_000
DEFAULT_EXACT_CAP = 24


class SparsicodeError(Exception):
    """Base class for library errors."""


class InvalidInput(SparsicodeError, ValueError):
    """An argument violates a documented precondition."""


class BudgetExceeded(SparsicodeError):
    """A search or enumeration ran past its configured budget."""


class VerificationFailure(SparsicodeError):
    """A constructed object failed its mandatory re-verification."""


class SolverError(SparsicodeError):
    """The LP solver did not return a certified optimum."""


def default_budget_ms() -> int:
    raw = os.environ.get("SPARSICODE_BUDGET_MS")
    if raw is None or raw.strip() == "":
        return DEFAULT_BUDGET_MS
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidInput(f"SPARSICODE_BUDGET_MS must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise InvalidInput("SPARSICODE_BUDGET_MS must be positive")
    return value


@dataclass
class Budget:
    """Node and wall-clock budget for an exhaustive search.

    ``tick`` is cheap; the clock is only consulted every 4096 nodes.
    """

    max_nodes: int | None = 50_000_000
    time_ms: int | None = None
    label: str = "search"
    nodes: int = 0
    _deadline: float | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.time_ms is None:
            self.time_ms = default_budget_ms()
        self._deadline = time.monotonic() + self.time_ms / 1000.0

    def tick(self, n: int = 1) -> None:
        self.nodes += n
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise BudgetExceeded(f"{self.label}: node budget {self.max_nodes} exhausted")
        if (self.nodes & 0xFFF) < n and time.monotonic() > self._deadline:
            raise BudgetExceeded(f"{self.label}: time budget {self.time_ms} ms exhausted")


def make_budget(budget: Budget | None, label: str) -> Budget:
    return budget if budget is not None else Budget(label=label)
