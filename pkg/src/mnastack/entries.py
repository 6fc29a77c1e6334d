"""Label stack entry types and the in-memory stack container.

A stack is a flat, top-first tuple of 32-bit entries. Three entry variants
exist: plain forwarding entries, NAS header entries (introduced by the MNA
indicator label) and NAS action entries. Network action sub-stacks are not
separate objects in the stack; :meth:`MplsStack.nas_at` builds a decoded
:class:`Nas` view on demand.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence, Union

DEFAULT_INDICATOR = 4
RESERVED_LABEL_MAX = 15
LABEL_MAX = (1 << 20) - 1

NAS_MIN_ENTRIES = 2
NAS_MAX_ENTRIES = 17
NASL_MIN = NAS_MIN_ENTRIES - 1
NASL_MAX = NAS_MAX_ENTRIES - 1

OPCODE_STACK_MANAGEMENT = 0x01
OPAQUE_OPCODE_MIN = 0x10
STACK_MANAGEMENT_MAX_N = 32
DATA_MAX = (1 << 15) - 1

ENTRY_BYTES = 4


class Scope(enum.IntEnum):
    SELECT = 0
    HBH = 1

    def __str__(self) -> str:
        return "Select" if self is Scope.SELECT else "HBH"


@dataclass(frozen=True, slots=True)
class ForwardingEntry:
    label: int
    tc: int = 0
    s: bool = False
    ttl: int = 64


@dataclass(frozen=True, slots=True)
class NasHeaderEntry:
    scope: Scope
    nasl: int
    s: bool = False
    indicator: int = DEFAULT_INDICATOR


@dataclass(frozen=True, slots=True)
class NasActionEntry:
    opcode: int
    data: int = 0
    s: bool = False
    ext: int = 0


LabelStackEntry = Union[ForwardingEntry, NasHeaderEntry, NasActionEntry]


@dataclass(frozen=True, slots=True)
class StackManagement:
    """Lift the next ``n`` forwarding labels from below a NAS to the top."""

    n: int

    def __str__(self) -> str:
        return f"StackMgmt(n={self.n})"


@dataclass(frozen=True, slots=True)
class Opaque:
    """A network action whose semantics are not modelled."""

    opcode: int
    data: int = 0
    ext: int = 0

    def __str__(self) -> str:
        return f"Opaque(op=0x{self.opcode:02X},data=0x{self.data:X})"


NetworkAction = Union[StackManagement, Opaque]


def action_to_entry(action: NetworkAction, s: bool = False) -> NasActionEntry:
    if isinstance(action, StackManagement):
        return NasActionEntry(OPCODE_STACK_MANAGEMENT, action.n, s, 0)
    return NasActionEntry(action.opcode, action.data, s, action.ext)


def entry_to_action(entry: NasActionEntry) -> NetworkAction:
    if entry.opcode == OPCODE_STACK_MANAGEMENT:
        return StackManagement(entry.data)
    return Opaque(entry.opcode, entry.data, entry.ext)


@dataclass(frozen=True)
class Nas:
    """Decoded network action sub-stack."""

    scope: Scope
    actions: tuple[NetworkAction, ...]

    @property
    def entry_count(self) -> int:
        return 1 + len(self.actions)

    @property
    def stack_management(self) -> StackManagement | None:
        for action in self.actions:
            if isinstance(action, StackManagement):
                return action
        return None

    def entries(self, indicator: int = DEFAULT_INDICATOR) -> list[LabelStackEntry]:
        """Header plus action entries, all with s cleared."""
        out: list[LabelStackEntry] = [NasHeaderEntry(self.scope, len(self.actions), False, indicator)]
        out.extend(action_to_entry(a) for a in self.actions)
        return out

    def with_action(self, action: NetworkAction) -> "Nas":
        return Nas(self.scope, self.actions + (action,))


def with_s(entry: LabelStackEntry, s: bool) -> LabelStackEntry:
    if entry.s == s:
        return entry
    return replace(entry, s=s)


def fix_s_flags(entries: Sequence[LabelStackEntry]) -> tuple[LabelStackEntry, ...]:
    """Clear every bottom-of-stack flag except the one on the last entry."""
    last = len(entries) - 1
    return tuple(with_s(e, i == last) for i, e in enumerate(entries))


@dataclass(frozen=True)
class MplsStack:
    """Top-first sequence of label stack entries.

    Construction does not check invariants; use :func:`mnastack.stack.validate`
    for that, or :meth:`build` to normalise bottom-of-stack flags.
    """

    entries: tuple[LabelStackEntry, ...] = ()

    @classmethod
    def build(cls, items: Iterable[LabelStackEntry | Nas], indicator: int = DEFAULT_INDICATOR) -> "MplsStack":
        """Flatten entries and :class:`Nas` values top-first and fix s flags."""
        flat: list[LabelStackEntry] = []
        for item in items:
            if isinstance(item, Nas):
                flat.extend(item.entries(indicator))
            else:
                flat.append(item)
        return cls(fix_s_flags(flat))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[LabelStackEntry]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> LabelStackEntry:
        return self.entries[index]

    @property
    def top(self) -> LabelStackEntry | None:
        return self.entries[0] if self.entries else None

    @property
    def byte_length(self) -> int:
        return ENTRY_BYTES * len(self.entries)

    def nas_at(self, index: int) -> Nas:
        """Decode the NAS whose header sits at ``index``."""
        header = self.entries[index]
        if not isinstance(header, NasHeaderEntry):
            raise ValueError(f"entry {index} is not a NAS header")
        body = self.entries[index + 1:index + 1 + header.nasl]
        if len(body) != header.nasl or not all(isinstance(e, NasActionEntry) for e in body):
            raise ValueError(f"NAS at {index} is truncated")
        return Nas(header.scope, tuple(entry_to_action(e) for e in body))

    def nas_positions(self) -> list[int]:
        """Indices of NAS headers, skipping over action regions."""
        out = []
        i = 0
        while i < len(self.entries):
            e = self.entries[i]
            if isinstance(e, NasHeaderEntry):
                out.append(i)
                i += 1 + e.nasl
            else:
                i += 1
        return out

    def forwarding_labels(self) -> list[int]:
        return [e.label for e in self.entries if isinstance(e, ForwardingEntry)]
