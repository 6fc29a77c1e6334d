"""Ingress stack construction.

Two strategies build the initial stack for a path:

* baseline: the HBH NAS sits at the bottom of the stack and copies of it are
  inserted wherever a node could not otherwise read one within its RLD.
* preserving: a single HBH NAS carrying a stack-management action sits just
  below the first label and is kept there by every MNA node. Nodes followed
  by legacy nodes get a select NAS telling them to lift past those nodes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .engine import HopRecord, NodeSpec, Verdict, traverse
from .entries import (
    ENTRY_BYTES,
    LABEL_MAX,
    NAS_MAX_ENTRIES,
    RESERVED_LABEL_MAX,
    ForwardingEntry,
    LabelStackEntry,
    MplsStack,
    Nas,
    NetworkAction,
    Opaque,
    Scope,
    StackManagement,
    DEFAULT_INDICATOR,
)
from .errors import PlanningError
from .stack import in_between_capacity

ACTION_OVERHEAD_BYTES = ENTRY_BYTES


class Strategy(str, enum.Enum):
    BASELINE = "baseline"
    PRESERVING = "preserving"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class ActionRequest:
    hbh_actions: tuple[NetworkAction, ...] = ()
    select_actions: Mapping[str, tuple[NetworkAction, ...]] = field(default_factory=dict)

    def select_for(self, node_id: str) -> tuple[NetworkAction, ...]:
        return tuple(self.select_actions.get(node_id, ()))


@dataclass(frozen=True)
class PlanResult:
    stack: MplsStack
    strategy: Strategy
    copies_inserted: int = 0
    lifts_planned: Mapping[str, int] = field(default_factory=dict)
    overhead_bytes: int = 0
    stack_management_actions: int = 0
    compat_select_headers: int = 0

    @property
    def stack_management_bytes(self) -> int:
        return ACTION_OVERHEAD_BYTES * self.stack_management_actions


def check_path(path: Sequence[NodeSpec]) -> None:
    if not path:
        raise PlanningError("empty path")
    ids = [n.id for n in path]
    labels = [n.label for n in path]
    if len(set(ids)) != len(ids):
        raise PlanningError("node ids on the path are not unique")
    if len(set(labels)) != len(labels):
        raise PlanningError("forwarding labels on the path are not unique")
    for node in path:
        if not RESERVED_LABEL_MAX < node.label <= LABEL_MAX:
            raise PlanningError(f"node {node.id}: label {node.label} is reserved or out of range",
                                node_id=node.id)
        if node.rld is not None and node.rld < 1:
            raise PlanningError(f"node {node.id}: rld must be >= 1", node_id=node.id)


def _check_request(path: Sequence[NodeSpec], requests: ActionRequest, hbh_room: int) -> None:
    by_id = {n.id: n for n in path}
    for action in requests.hbh_actions:
        if not isinstance(action, Opaque):
            raise PlanningError("requested actions must be opaque; stack management is planner-owned")
    if len(requests.hbh_actions) > hbh_room:
        raise PlanningError(f"HBH request of {len(requests.hbh_actions)} actions exceeds {hbh_room}")
    for node_id, actions in requests.select_actions.items():
        if node_id not in by_id:
            raise PlanningError(f"select actions for unknown node {node_id}", node_id=node_id)
        if actions and not by_id[node_id].is_mna:
            raise PlanningError(f"select actions target legacy node {node_id}", node_id=node_id)
        if len(actions) > NAS_MAX_ENTRIES - 1:
            raise PlanningError(f"select NAS for {node_id} exceeds {NAS_MAX_ENTRIES} entries",
                                node_id=node_id)
        for action in actions:
            if not isinstance(action, Opaque):
                raise PlanningError("requested actions must be opaque; stack management is planner-owned")
    if requests.hbh_actions and not path[-1].is_mna:
        raise PlanningError(f"path ends at legacy node {path[-1].id}; the HBH NAS could never be removed",
                            node_id=path[-1].id)


def _label(node: NodeSpec) -> ForwardingEntry:
    return ForwardingEntry(node.label, 0, False, 64)


def _nas_size(actions: Sequence[NetworkAction]) -> int:
    return 1 + len(actions) if actions else 0


def _overhead(stack: MplsStack, path: Sequence[NodeSpec]) -> int:
    return ENTRY_BYTES * (len(stack) - len(path))


def _deficit_error(node: NodeSpec, required: int, what: str) -> PlanningError:
    return PlanningError(
        f"node {node.id}: {what} needs {required} readable entries but RLD is {node.rld} "
        f"(deficit {required - node.rld})",
        node_id=node.id, required=required, rld=node.rld)


def baseline_reach(path: Sequence[NodeSpec], requests: ActionRequest) -> list[int | None]:
    """For each node, the deepest path index whose HBH copy it could still read.

    Entry ``i`` is None for legacy nodes. A copy "at k" sits directly below
    node k's label and select NAS; only MNA nodes can own a copy.
    """
    hbh = _nas_size(requests.hbh_actions)
    sel = [_nas_size(requests.select_for(n.id)) for n in path]
    reach: list[int | None] = []
    for i, node in enumerate(path):
        if not node.is_mna:
            reach.append(None)
            continue
        best = None
        depth = hbh
        for k in range(i, len(path)):
            depth += 1 + sel[k]
            if depth > node.rld:
                break
            if path[k].is_mna:
                best = k
        if best is None:
            required = 1 + sel[i] + hbh
            raise PlanningError(
                f"node {node.id}: in-between capacity {in_between_capacity(node.rld, sel[i], hbh)} "
                f"(needs {required} entries, RLD {node.rld}, deficit {required - node.rld})",
                node_id=node.id, required=required, rld=node.rld)
        reach.append(best)
    return reach


def baseline_copy_positions(path: Sequence[NodeSpec], requests: ActionRequest) -> list[int]:
    """Path indices below whose label an HBH copy goes, excluding the bottom original.

    Nodes are visited back to front. A node that cannot read any copy
    already chosen gets one below its own label, which is then popped on
    exposure at that node. Visiting in this order makes the copy count
    minimal.
    """
    reach = baseline_reach(path, requests)
    last = len(path) - 1
    chosen = [last]
    for i in range(last, -1, -1):
        r = reach[i]
        if r is None or chosen[-1] <= r:
            continue
        chosen.append(i)
    return sorted(c for c in chosen if c != last)


def build_baseline_stack(path: Sequence[NodeSpec], requests: ActionRequest, copies: Sequence[int],
                         indicator: int = DEFAULT_INDICATOR) -> MplsStack:
    """Lay out labels, select NAS and HBH NAS copies below the labels in ``copies``."""
    hbh = Nas(Scope.HBH, tuple(requests.hbh_actions)) if requests.hbh_actions else None
    items: list[LabelStackEntry | Nas] = []
    for i, node in enumerate(path):
        items.append(_label(node))
        actions = requests.select_for(node.id)
        if actions:
            items.append(Nas(Scope.SELECT, actions))
        if hbh is not None and (i in copies or i == len(path) - 1):
            items.append(hbh)
    return MplsStack.build(items, indicator)


def plan_baseline(path: Sequence[NodeSpec], requests: ActionRequest,
                  indicator: int = DEFAULT_INDICATOR) -> PlanResult:
    check_path(path)
    if not requests.hbh_actions and not any(requests.select_actions.values()):
        raise PlanningError("nothing to plan: no HBH or select actions requested")
    _check_request(path, requests, NAS_MAX_ENTRIES - 1)
    if requests.hbh_actions:
        copies = baseline_copy_positions(path, requests)
    else:
        copies = []
        for node in path:
            size = _nas_size(requests.select_for(node.id))
            if node.is_mna and 1 + size > node.rld:
                raise _deficit_error(node, 1 + size, "its select NAS")
    stack = build_baseline_stack(path, requests, copies, indicator)
    return PlanResult(stack, Strategy.BASELINE, copies_inserted=len(copies),
                      overhead_bytes=_overhead(stack, path))


def legacy_runs(path: Sequence[NodeSpec]) -> dict[int, int]:
    """Map index of each MNA node to the length of the legacy run right after it."""
    if not path[0].is_mna:
        raise PlanningError(f"first node {path[0].id} is legacy", node_id=path[0].id)
    runs: dict[int, int] = {}
    owner = None
    for i, node in enumerate(path):
        if node.is_mna:
            owner = i
            runs[i] = 0
        elif owner is None:
            raise PlanningError(f"legacy node {node.id} has no MNA predecessor", node_id=node.id)
        else:
            runs[owner] += 1
    return runs


def plan_preserving(path: Sequence[NodeSpec], requests: ActionRequest,
                    indicator: int = DEFAULT_INDICATOR) -> PlanResult:
    check_path(path)
    runs = legacy_runs(path)
    _check_request(path, requests, NAS_MAX_ENTRIES - 2)

    select: list[tuple[NetworkAction, ...]] = []
    created = 0
    sm_count = 0
    has_hbh = bool(requests.hbh_actions)
    for i, node in enumerate(path):
        actions = requests.select_for(node.id)
        if has_hbh and runs.get(i):
            if not actions:
                created += 1
            elif len(actions) >= NAS_MAX_ENTRIES - 1:
                raise PlanningError(f"select NAS for {node.id} has no room for stack management",
                                    node_id=node.id)
            actions = actions + (StackManagement(runs[i]),)
            sm_count += 1
        select.append(actions)

    hbh = None
    if has_hbh:
        hbh = Nas(Scope.HBH, tuple(requests.hbh_actions) + (StackManagement(1),))
        sm_count += 1
    hbh_size = hbh.entry_count if hbh else 0
    sel_size = [_nas_size(a) for a in select]

    lifts: dict[str, int] = {}
    for i, node in enumerate(path):
        if not node.is_mna:
            continue
        n = 1 + runs[i] if has_hbh else 0
        if has_hbh:
            lifts[node.id] = n
        below = [1 + sel_size[j] for j in range(i + 1, len(path))][:n]
        required = 1 + sel_size[i] + hbh_size + sum(below)
        if required > node.rld:
            raise _deficit_error(node, required, "label, select NAS, HBH NAS and lifted labels")

    items: list[LabelStackEntry | Nas] = []
    for i, node in enumerate(path):
        items.append(_label(node))
        if select[i]:
            items.append(Nas(Scope.SELECT, select[i]))
        if i == 0 and hbh is not None:
            items.append(hbh)
    stack = MplsStack.build(items, indicator)
    return PlanResult(stack, Strategy.PRESERVING, copies_inserted=0, lifts_planned=lifts,
                      overhead_bytes=_overhead(stack, path), stack_management_actions=sm_count,
                      compat_select_headers=created)


def plan(path: Sequence[NodeSpec], requests: ActionRequest, strategy: Strategy,
         indicator: int = DEFAULT_INDICATOR) -> PlanResult:
    if strategy is Strategy.BASELINE:
        return plan_baseline(path, requests, indicator)
    if strategy is Strategy.PRESERVING:
        return plan_preserving(path, requests, indicator)
    raise ValueError(f"strategy {strategy} is not planned")


ActionMatrix = dict[str, tuple[tuple[Scope, NetworkAction], ...]]


def action_matrix(path: Sequence[NodeSpec], hops: Sequence[HopRecord]) -> ActionMatrix:
    """Requested (non stack-management) actions executed per node, in execution order."""
    matrix: ActionMatrix = {n.id: () for n in path}
    for hop in hops:
        matrix[hop.node_id] = tuple(
            (scope, a) for scope, a in hop.outcome.actions_processed
            if not isinstance(a, StackManagement))
    return matrix


@dataclass(frozen=True)
class PlanCheck:
    ok: bool
    delivered: bool
    matrix: ActionMatrix
    failures: tuple[str, ...]
    hops: tuple[HopRecord, ...]


def expected_matrix(path: Sequence[NodeSpec], requests: ActionRequest) -> ActionMatrix:
    out: ActionMatrix = {}
    for node in path:
        if node.is_mna:
            out[node.id] = tuple((Scope.SELECT, a) for a in requests.select_for(node.id)) + \
                tuple((Scope.HBH, a) for a in requests.hbh_actions)
        else:
            out[node.id] = ()
    return out


def validate_plan(path: Sequence[NodeSpec], stack: MplsStack, requests: ActionRequest) -> PlanCheck:
    """Forward ``stack`` through the node engine and check every requested action ran where it should."""
    hops = traverse(path, stack)
    matrix = action_matrix(path, hops)
    failures = []
    last = hops[-1]
    delivered = last.outcome.verdict is Verdict.DELIVERED and len(hops) == len(path)
    if last.outcome.verdict is Verdict.DROPPED:
        failures.append(f"dropped at {last.node_id}: {last.outcome.reason}")
    elif not delivered:
        failures.append(f"not delivered after {last.node_id}")
    expected = expected_matrix(path, requests)
    for node in path:
        if matrix[node.id] != expected[node.id]:
            failures.append(f"{node.id}: executed {len(matrix[node.id])} actions, "
                            f"expected {len(expected[node.id])}")
    for hop in hops:
        failures.extend(f"{hop.node_id}: {d}" for d in hop.outcome.diagnostics)
    return PlanCheck(not failures, delivered, matrix, tuple(failures), tuple(hops))
