"""End-to-end scenario runs and strategy comparison."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .engine import HopRecord, NodeSpec, Verdict, traverse
from .entries import DEFAULT_INDICATOR, ENTRY_BYTES, MplsStack
from .errors import SimulationError
from .planner import (
    ActionMatrix,
    ActionRequest,
    PlanResult,
    Strategy,
    action_matrix,
    check_path,
    plan,
)


@dataclass(frozen=True)
class Scenario:
    name: str
    path: tuple[NodeSpec, ...]
    requests: ActionRequest = field(default_factory=ActionRequest)
    strategy: Strategy = Strategy.PRESERVING
    packet_count: int = 1
    explicit_stack: MplsStack | None = None
    indicator: int = DEFAULT_INDICATOR

    def __post_init__(self):
        if self.packet_count < 1:
            raise ValueError("packet_count must be >= 1")
        if self.strategy is Strategy.EXPLICIT and self.explicit_stack is None:
            raise ValueError("explicit strategy needs a stack")


@dataclass(frozen=True)
class SimReport:
    scenario: str
    strategy: Strategy
    hops: tuple[HopRecord, ...]
    verdict: Verdict
    drop_node: str | None
    drop_reason: str | None
    max_parsed_entries: dict[str, int]
    stack_bytes_initial: int
    overhead_bytes: int
    hashes_per_hop: tuple[int, ...]
    action_matrix: ActionMatrix
    plan: PlanResult | None = None

    @property
    def delivered(self) -> bool:
        return self.verdict is Verdict.DELIVERED


def initial_stack(scenario: Scenario) -> tuple[MplsStack, PlanResult | None]:
    if scenario.strategy is Strategy.EXPLICIT:
        return scenario.explicit_stack, None
    result = plan(scenario.path, scenario.requests, scenario.strategy, scenario.indicator)
    return result.stack, result


def _verdict(hops: Sequence[HopRecord]) -> tuple[Verdict, str | None, str | None]:
    last = hops[-1]
    outcome = last.outcome
    if outcome.verdict is Verdict.DROPPED:
        return Verdict.DROPPED, last.node_id, outcome.reason
    if outcome.verdict is Verdict.FORWARDED:
        # path exhausted with labels left on the stack
        return Verdict.DROPPED, last.node_id, "residual-stack"
    return Verdict.DELIVERED, None, None


def run(scenario: Scenario) -> SimReport:
    """Plan the stack and forward ``packet_count`` identical packets along the path.

    Every packet of the flow must see the same per-hop stacks and hashes;
    a divergence raises :class:`SimulationError`.
    """
    if scenario.strategy is not Strategy.EXPLICIT:
        check_path(scenario.path)
    stack, result = initial_stack(scenario)
    hops = traverse(scenario.path, stack)
    for packet in range(1, scenario.packet_count):
        again = traverse(scenario.path, stack)
        if again != hops:
            raise SimulationError(f"packet {packet} diverged from the first packet of the flow")

    verdict, drop_node, reason = _verdict(hops)
    max_parsed: dict[str, int] = {}
    for hop in hops:
        max_parsed[hop.node_id] = max(max_parsed.get(hop.node_id, 0), hop.outcome.parsed_entries)
    overhead = ENTRY_BYTES * (len(stack) - len(stack.forwarding_labels()))
    return SimReport(
        scenario=scenario.name,
        strategy=scenario.strategy,
        hops=tuple(hops),
        verdict=verdict,
        drop_node=drop_node,
        drop_reason=reason,
        max_parsed_entries=max_parsed,
        stack_bytes_initial=stack.byte_length,
        overhead_bytes=overhead,
        hashes_per_hop=tuple(h.hash for h in hops),
        action_matrix=action_matrix(scenario.path, hops),
        plan=result,
    )


@dataclass(frozen=True)
class Comparison:
    baseline: SimReport
    preserving: SimReport

    @property
    def matrices_equal(self) -> bool:
        return self.baseline.action_matrix == self.preserving.action_matrix

    @property
    def entry_difference(self) -> int:
        """Baseline initial entries minus preserving initial entries."""
        return (self.baseline.stack_bytes_initial - self.preserving.stack_bytes_initial) // ENTRY_BYTES


def compare(scenario: Scenario) -> Comparison:
    reports = {
        s: run(replace(scenario, strategy=s, explicit_stack=None))
        for s in (Strategy.BASELINE, Strategy.PRESERVING)
    }
    return Comparison(reports[Strategy.BASELINE], reports[Strategy.PRESERVING])
