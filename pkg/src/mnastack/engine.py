"""Per-hop processing at MNA-capable and legacy nodes.

An MNA node handles an arriving packet in a fixed order: pop its own
forwarding label, process and pop an exposed select NAS, process the first
HBH NAS readable within its RLD, and, if that HBH NAS is now on top, lift
``n_hbh + n_select`` labels from below it. Any NAS still exposed after that
is popped. Legacy nodes only know push, pop and swap.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .entries import (
    RESERVED_LABEL_MAX,
    ForwardingEntry,
    MplsStack,
    NasHeaderEntry,
    NetworkAction,
    Scope,
    StackManagement,
    fix_s_flags,
)
from .errors import MisroutedError, StackError
from .stack import find_first_nas, move_below_to_above, nas_end, pop_exposed_nas, validate

FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193


@dataclass(frozen=True)
class NodeSpec:
    """A node on the path. ``rld`` is None for MNA-incapable (legacy) nodes."""

    id: str
    label: int
    rld: int | None = None

    @classmethod
    def mna(cls, id: str, label: int, rld: int) -> "NodeSpec":
        if rld < 1:
            raise ValueError("rld must be >= 1")
        return cls(id, label, rld)

    @classmethod
    def legacy(cls, id: str, label: int) -> "NodeSpec":
        return cls(id, label, None)

    @property
    def is_mna(self) -> bool:
        return self.rld is not None


class Verdict(str, enum.Enum):
    FORWARDED = "Forwarded"
    DELIVERED = "Delivered"
    DROPPED = "Dropped"


@dataclass(frozen=True)
class HopOutcome:
    verdict: Verdict
    stack_after: MplsStack
    parsed_entries: int
    actions_processed: tuple[tuple[Scope, NetworkAction], ...] = ()
    lifted_labels: int = 0
    reason: str | None = None
    diagnostics: tuple[str, ...] = field(default=())


def _finish(entries, parsed, actions, lifted, diags) -> HopOutcome:
    after = MplsStack(fix_s_flags(entries))
    verdict = Verdict.FORWARDED if after.entries else Verdict.DELIVERED
    return HopOutcome(verdict, after, parsed, tuple(actions), lifted, None, tuple(diags))


def _dropped(stack: MplsStack, parsed: int, reason: str, actions=(), diags=()) -> HopOutcome:
    return HopOutcome(Verdict.DROPPED, stack, parsed, tuple(actions), 0, reason, tuple(diags))


def _check_top(stack: MplsStack, node: NodeSpec) -> None:
    top = stack.top
    if not isinstance(top, ForwardingEntry) or top.label != node.label:
        found = top.label if isinstance(top, ForwardingEntry) else top
        raise MisroutedError(node.id, node.label, found)


def process_mna_node(stack: MplsStack, node: NodeSpec) -> HopOutcome:
    if not node.is_mna:
        raise ValueError(f"node {node.id} is not MNA-capable")
    if not stack.entries:
        return HopOutcome(Verdict.DELIVERED, stack, 0)
    violation = validate(stack)
    if violation is not None:
        raise StackError(f"malformed stack: {violation}")
    _check_top(stack, node)

    rld = node.rld
    entries = stack.entries
    actions: list[tuple[Scope, NetworkAction]] = []
    diags: list[str] = []
    parsed = 1
    offset = 1  # arriving-stack index of the current top

    n_select = 0
    exposed = entries[offset] if offset < len(entries) else None
    if isinstance(exposed, NasHeaderEntry) and exposed.scope == Scope.SELECT:
        end = nas_end(stack, offset)
        if end <= rld:
            for action in stack.nas_at(offset).actions:
                actions.append((Scope.SELECT, action))
                if isinstance(action, StackManagement):
                    n_select = action.n
            parsed = end
        else:
            diags.append(f"select NAS at {offset} exceeds RLD {rld}; popped unprocessed")
            parsed = min(end, rld)
        offset = end

    n_hbh = 0
    hbh_pos = find_first_nas(stack, Scope.HBH, rld)
    if hbh_pos is not None:
        for action in stack.nas_at(hbh_pos).actions:
            actions.append((Scope.HBH, action))
            if isinstance(action, StackManagement):
                n_hbh = action.n
        parsed = max(parsed, nas_end(stack, hbh_pos))
    else:
        parsed = max(parsed, min(rld, len(entries)))
        if any(entries[p].scope == Scope.HBH for p in stack.nas_positions()):
            diags.append(f"HBH NAS not readable within RLD {rld}")

    current = MplsStack(entries[offset:])
    lifted = 0
    if hbh_pos == offset and n_hbh + n_select > 0:
        try:
            current, lifted, cut = move_below_to_above(current, 0, n_hbh + n_select)
        except StackError as exc:
            return _dropped(stack, parsed, "malformed", actions, diags + [str(exc)])
        if lifted:
            if cut + offset > rld:
                diags.append(f"lift of {lifted} labels reaches entry {cut + offset}, beyond RLD {rld}")
                return _dropped(stack, rld, "lift-beyond-rld", actions, diags)
            parsed = max(parsed, cut + offset)

    while isinstance(current.top, NasHeaderEntry):
        if offset != hbh_pos:
            diags.append(f"exposed {current.top.scope} NAS popped unprocessed")
        parsed = max(parsed, min(offset + 1, rld))
        offset = offset + nas_end(current, 0)
        current = pop_exposed_nas(current)

    return _finish(current.entries, parsed, actions, lifted, diags)


def raw_label(entry) -> int:
    """Label field as a legacy parser sees it in the top 20 bits of the word."""
    from .codec import encode_entry

    return encode_entry(entry) >> 12


def process_legacy_node(stack: MplsStack, node: NodeSpec) -> HopOutcome:
    if not stack.entries:
        return HopOutcome(Verdict.DELIVERED, stack, 0)
    top = stack.entries[0]
    if raw_label(top) <= RESERVED_LABEL_MAX:
        return _dropped(stack, 1, "reserved-label")
    _check_top(stack, node)
    return _finish(stack.entries[1:], 1, (), 0, ())


def process_node(stack: MplsStack, node: NodeSpec) -> HopOutcome:
    if node.is_mna:
        return process_mna_node(stack, node)
    return process_legacy_node(stack, node)


def apply_stack_management(stack: MplsStack, nas_position: int, n: int) -> MplsStack:
    """Lift up to ``n`` labels from directly below the NAS at ``nas_position`` to directly above it.

    A select NAS sitting under a lifted label moves along with it.
    """
    new, _, _ = move_below_to_above(stack, nas_position, n)
    return new


def fnv1a32(data: bytes, h: int = FNV_OFFSET) -> int:
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & 0xFFFFFFFF
    return h


def ecmp_hash(stack: MplsStack, window: int | None = None) -> int:
    """FNV-1a over the forwarding labels among the first ``window`` entries.

    Each label contributes 4 big-endian bytes; NAS entries are skipped.
    """
    entries = stack.entries if window is None else stack.entries[:window]
    h = FNV_OFFSET
    for e in entries:
        if isinstance(e, ForwardingEntry):
            h = fnv1a32(e.label.to_bytes(4, "big"), h)
    return h


@dataclass(frozen=True)
class HopRecord:
    node_id: str
    arriving: MplsStack
    hash: int
    outcome: HopOutcome


def traverse(path, stack: MplsStack) -> list[HopRecord]:
    """Forward ``stack`` along ``path`` until it is delivered, dropped or the path ends.

    Misrouted and malformed packets become drops rather than exceptions.
    """
    records = []
    for node in path:
        window = node.rld if node.is_mna else None
        h = ecmp_hash(stack, window)
        try:
            outcome = process_node(stack, node)
        except MisroutedError as exc:
            outcome = _dropped(stack, 1, "label-mismatch", (), (str(exc),))
        except StackError as exc:
            outcome = _dropped(stack, 1, "malformed", (), (str(exc),))
        records.append(HopRecord(node.id, stack, h, outcome))
        if outcome.verdict is not Verdict.FORWARDED:
            break
        stack = outcome.stack_after
    return records
