"""Bit-exact wire codec for MPLS stacks carrying MNA sub-stacks.

Word layout, bit 0 being the most significant bit::

    forwarding  | label:20           | tc:3    | s | ttl:8  |
    NAS header  | indicator:20       | scope:3 | s | nasl:8 |
    NAS action  | opcode:8 | data:15           | s | ext:8  |

The bottom-of-stack flag sits at the same position in every variant, so a
legacy node scanning raw words for the end of the stack stays correct.
"""
from __future__ import annotations

import struct
from typing import Iterable

from .entries import (
    DATA_MAX,
    DEFAULT_INDICATOR,
    ENTRY_BYTES,
    LABEL_MAX,
    NASL_MAX,
    NASL_MIN,
    OPAQUE_OPCODE_MIN,
    OPCODE_STACK_MANAGEMENT,
    STACK_MANAGEMENT_MAX_N,
    ForwardingEntry,
    LabelStackEntry,
    MplsStack,
    NasActionEntry,
    NasHeaderEntry,
    Scope,
)
from .errors import CodecError

S_BIT = 1 << 8

_SCOPES = {int(s): s for s in Scope}


def entry_field_error(entry: LabelStackEntry) -> str | None:
    """Describe the first out-of-range field of ``entry``, or None."""
    if isinstance(entry, ForwardingEntry):
        if not 0 <= entry.label <= LABEL_MAX:
            return f"label {entry.label} out of range"
        if not 0 <= entry.tc <= 7:
            return f"tc {entry.tc} out of range"
        if not 0 <= entry.ttl <= 255:
            return f"ttl {entry.ttl} out of range"
    elif isinstance(entry, NasHeaderEntry):
        if not 0 <= entry.indicator <= LABEL_MAX:
            return f"indicator {entry.indicator} out of range"
        if entry.scope not in _SCOPES.values():
            return f"unknown scope {entry.scope!r}"
        if not NASL_MIN <= entry.nasl <= NASL_MAX:
            return f"nasl {entry.nasl} outside [{NASL_MIN}, {NASL_MAX}]"
    elif isinstance(entry, NasActionEntry):
        if not 0 <= entry.opcode <= 0xFF:
            return f"opcode {entry.opcode} out of range"
        if not 0 <= entry.data <= DATA_MAX:
            return f"data {entry.data} out of range"
        if not 0 <= entry.ext <= 0xFF:
            return f"ext {entry.ext} out of range"
        if entry.opcode == OPCODE_STACK_MANAGEMENT:
            if not 1 <= entry.data <= STACK_MANAGEMENT_MAX_N:
                return f"stack-management n={entry.data} outside [1, {STACK_MANAGEMENT_MAX_N}]"
            if entry.ext != 0:
                return "stack-management ext must be 0"
        elif entry.opcode < OPAQUE_OPCODE_MIN:
            return f"reserved opcode 0x{entry.opcode:02X}"
    else:
        return f"not a label stack entry: {entry!r}"
    return None


def _pack(entry: LabelStackEntry) -> int:
    s = S_BIT if entry.s else 0
    if isinstance(entry, ForwardingEntry):
        return (entry.label << 12) | (entry.tc << 9) | s | entry.ttl
    if isinstance(entry, NasHeaderEntry):
        return (entry.indicator << 12) | (int(entry.scope) << 9) | s | entry.nasl
    return (entry.opcode << 24) | (entry.data << 9) | s | entry.ext


def encode_entry(entry: LabelStackEntry) -> int:
    problem = entry_field_error(entry)
    if problem:
        raise CodecError(problem)
    return _pack(entry)


def _decode_action(word: int, index: int) -> NasActionEntry:
    opcode = word >> 24
    data = (word >> 9) & DATA_MAX
    ext = word & 0xFF
    if opcode == OPCODE_STACK_MANAGEMENT:
        if not 1 <= data <= STACK_MANAGEMENT_MAX_N or ext:
            raise CodecError(f"word {index}: malformed stack-management action (n={data}, ext={ext})")
    elif opcode < OPAQUE_OPCODE_MIN:
        raise CodecError(f"word {index}: reserved opcode 0x{opcode:02X}")
    return NasActionEntry(opcode, data, bool(word & S_BIT), ext)


def decode_words(words: Iterable[int], indicator: int = DEFAULT_INDICATOR) -> MplsStack:
    words = list(words)
    entries: list[LabelStackEntry] = []
    i = 0
    n = len(words)
    while i < n:
        word = words[i]
        label = word >> 12
        s = bool(word & S_BIT)
        if label != indicator:
            entries.append(ForwardingEntry(label, (word >> 9) & 7, s, word & 0xFF))
            i += 1
            if s:
                break
            continue
        code = (word >> 9) & 7
        if code not in _SCOPES:
            raise CodecError(f"word {i}: reserved scope code {code}")
        nasl = word & 0xFF
        if not NASL_MIN <= nasl <= NASL_MAX:
            raise CodecError(f"word {i}: NAS size {nasl + 1} outside [2, 17] entries")
        if s:
            raise CodecError(f"word {i}: NAS truncated by bottom-of-stack header")
        entries.append(NasHeaderEntry(_SCOPES[code], nasl, False, indicator))
        seen_sm = False
        for k in range(1, nasl + 1):
            j = i + k
            if j >= n:
                raise CodecError(f"word {i}: NAS of {nasl} actions overruns input")
            action = _decode_action(words[j], j)
            if action.s and k != nasl:
                raise CodecError(f"word {i}: NAS of {nasl} actions overruns bottom of stack at word {j}")
            if action.opcode == OPCODE_STACK_MANAGEMENT:
                if seen_sm:
                    raise CodecError(f"word {j}: second stack-management action in one NAS")
                seen_sm = True
            entries.append(action)
        i += 1 + nasl
        if entries[-1].s:
            break
    else:
        if n:
            raise CodecError("input exhausted before bottom-of-stack entry")
    if i != n:
        raise CodecError(f"{n - i} trailing word(s) after bottom of stack")
    return MplsStack(tuple(entries))


def decode_stack(data: bytes, indicator: int = DEFAULT_INDICATOR) -> MplsStack:
    """Parse a byte string into a stack.

    Raises :class:`CodecError` on a length that is not a multiple of four, a
    missing bottom-of-stack flag, a NAS overrunning the stack, reserved
    scope codes or opcodes, or trailing words after the bottom entry.
    """
    if len(data) % ENTRY_BYTES:
        raise CodecError(f"length {len(data)} is not a multiple of {ENTRY_BYTES}")
    words = struct.unpack(f">{len(data) // ENTRY_BYTES}I", data)
    return decode_words(words, indicator)


def encode_words(stack: MplsStack) -> list[int]:
    from .stack import validate

    violation = validate(stack)
    if violation is not None:
        raise CodecError(f"refusing to encode invalid stack: {violation}")
    return [_pack(e) for e in stack.entries]


def encode_stack(stack: MplsStack) -> bytes:
    words = encode_words(stack)
    return struct.pack(f">{len(words)}I", *words)


def hex_dump(data: bytes) -> str:
    """One ``0x%08X`` word per line, top of stack first."""
    words = struct.unpack(f">{len(data) // ENTRY_BYTES}I", data)
    return "".join(f"0x{w:08X}\n" for w in words)


def parse_hex_dump(text: str, indicator: int = DEFAULT_INDICATOR) -> MplsStack:
    words = []
    for line in text.split():
        try:
            words.append(int(line, 16))
        except ValueError:
            raise CodecError(f"not a hex word: {line!r}") from None
        if not 0 <= words[-1] <= 0xFFFFFFFF:
            raise CodecError(f"word out of range: {line}")
    return decode_words(words, indicator)
