"""Stack operations, RLD-window scanning and the capacity arithmetic."""
from __future__ import annotations

from dataclasses import dataclass

from .entries import (
    OPCODE_STACK_MANAGEMENT,
    ForwardingEntry,
    LabelStackEntry,
    MplsStack,
    NasActionEntry,
    NasHeaderEntry,
    Scope,
    fix_s_flags,
    with_s,
)
from .errors import StackError


@dataclass(frozen=True)
class Violation:
    index: int
    reason: str

    def __str__(self) -> str:
        return f"{self.reason} at index {self.index}"


def push(stack: MplsStack, entry: LabelStackEntry) -> MplsStack:
    return MplsStack((with_s(entry, not stack.entries),) + stack.entries)


def pop(stack: MplsStack) -> tuple[LabelStackEntry, MplsStack]:
    if not stack.entries:
        raise StackError("pop on empty stack")
    return stack.entries[0], MplsStack(stack.entries[1:])


def swap(stack: MplsStack, label: int) -> MplsStack:
    top = stack.top
    if top is None:
        raise StackError("swap on empty stack")
    if not isinstance(top, ForwardingEntry):
        raise StackError("swap on a non-forwarding top entry")
    return MplsStack((ForwardingEntry(label, top.tc, top.s, top.ttl),) + stack.entries[1:])


def nas_end(stack: MplsStack, index: int) -> int:
    """Index one past the last action entry of the NAS headed at ``index``."""
    header = stack.entries[index]
    if not isinstance(header, NasHeaderEntry):
        raise StackError(f"entry {index} is not a NAS header")
    return index + 1 + header.nasl


def find_first_nas(stack: MplsStack, scope: Scope, rld: int) -> int | None:
    """Index of the first ``scope`` NAS lying wholly inside the first ``rld`` entries.

    A NAS that is cut by the window edge is unreadable, so the result is None
    even if the header itself is visible.
    """
    limit = min(rld, len(stack.entries))
    for pos in stack.nas_positions():
        if pos >= limit:
            return None
        if stack.entries[pos].scope == scope:
            return pos if nas_end(stack, pos) <= limit else None
    return None


def pop_exposed_nas(stack: MplsStack) -> MplsStack:
    if not isinstance(stack.top, NasHeaderEntry):
        raise StackError("top of stack is not a NAS header")
    end = nas_end(stack, 0)
    if end > len(stack.entries):
        raise StackError("exposed NAS is truncated")
    return MplsStack(stack.entries[end:])


def in_between_capacity(rld: int, max_select: int, max_hbh: int) -> int:
    """Entries left for the in-between stack once both NAS arrays and the top label are reserved.

    Negative values mean the RLD cannot hold the two NAS at all; they are
    returned as-is so planners can report the deficit.
    """
    return rld - max_select - max_hbh - 1


def required_min_rld(max_select: int, max_hbh: int, n: int) -> int:
    if n < 1:
        raise StackError("lift count n must be at least 1")
    return max_select + max_hbh + 1 + n


def validate(stack: MplsStack) -> Violation | None:
    """Return the first structural violation of ``stack``, or None if valid."""
    from .codec import entry_field_error

    entries = stack.entries
    last = len(entries) - 1
    i = 0
    while i <= last:
        e = entries[i]
        problem = entry_field_error(e)
        if problem:
            return Violation(i, problem)
        if e.s and i != last:
            return Violation(i, "interior bottom-of-stack flag")
        if not e.s and i == last:
            return Violation(i, "missing bottom-of-stack flag")
        if isinstance(e, NasActionEntry):
            return Violation(i, "action entry outside a NAS")
        if isinstance(e, NasHeaderEntry):
            if i + e.nasl > last:
                return Violation(i, f"truncated NAS: {e.nasl} actions declared, {last - i} entries follow")
            seen_sm = False
            for j in range(i + 1, i + 1 + e.nasl):
                a = entries[j]
                if not isinstance(a, NasActionEntry):
                    return Violation(j, "non-action entry inside NAS")
                problem = entry_field_error(a)
                if problem:
                    return Violation(j, problem)
                if a.s and j != last:
                    return Violation(j, "interior bottom-of-stack flag")
                if a.opcode == OPCODE_STACK_MANAGEMENT:
                    if seen_sm:
                        return Violation(j, "second stack-management action in one NAS")
                    seen_sm = True
            i += 1 + e.nasl
            if i - 1 == last and not entries[last].s:
                return Violation(last, "missing bottom-of-stack flag")
        else:
            i += 1
    return None


def is_valid(stack: MplsStack) -> bool:
    return validate(stack) is None


def lift_units(stack: MplsStack, start: int) -> list[tuple[int, int]]:
    """Split the region from ``start`` into (begin, end) units.

    A unit is one forwarding entry plus a NAS directly below it that travels
    with it (the select NAS of that label's node). Scanning stops at the first
    entry that does not begin with a forwarding entry.
    """
    units = []
    entries = stack.entries
    i = start
    while i < len(entries) and isinstance(entries[i], ForwardingEntry):
        end = i + 1
        if end < len(entries) and isinstance(entries[end], NasHeaderEntry) \
                and entries[end].scope == Scope.SELECT:
            end = nas_end(stack, end)
        units.append((i, end))
        i = end
    return units


def move_below_to_above(stack: MplsStack, nas_position: int, n: int) -> tuple[MplsStack, int, int]:
    """Move up to ``n`` units from below the NAS at ``nas_position`` to directly above it.

    Returns the new stack, the number of labels moved and the arriving-stack
    index one past the last moved entry (``nas end`` if nothing moved).
    """
    end = nas_end(stack, nas_position)
    if n <= 0 or end >= len(stack.entries):
        return stack, 0, end
    below = stack.entries[end]
    if not isinstance(below, ForwardingEntry):
        raise StackError(f"entry {end} below the NAS is not a forwarding entry")
    units = lift_units(stack, end)[:n]
    if len(units) < n and units[-1][1] < len(stack.entries):
        raise StackError(f"entry {units[-1][1]} among the next {n} labels is not a forwarding entry")
    cut = units[-1][1]
    moved = stack.entries[end:cut]
    new = stack.entries[:nas_position] + moved + stack.entries[nas_position:end] + stack.entries[cut:]
    return MplsStack(fix_s_flags(new)), len(units), cut

