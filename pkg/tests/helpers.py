"""Shared builders, generators and independent oracles for the test suite."""
from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from mnastack.engine import NodeSpec
from mnastack.entries import (
    DATA_MAX,
    DEFAULT_INDICATOR,
    LABEL_MAX,
    ForwardingEntry,
    MplsStack,
    Nas,
    NasActionEntry,
    NasHeaderEntry,
    Opaque,
    Scope,
    StackManagement,
)
from mnastack.planner import ActionRequest, build_baseline_stack, validate_plan
from mnastack.errors import PlanningError

OP = Opaque(0x20, 0x1)


def L(label: int, s: bool = False, ttl: int = 64) -> ForwardingEntry:
    return ForwardingEntry(label, 0, s, ttl)


def hbh(*actions) -> Nas:
    return Nas(Scope.HBH, tuple(actions))


def sel(*actions) -> Nas:
    return Nas(Scope.SELECT, tuple(actions))


def bits_word(entry) -> int:
    """Assemble a word from a binary string, field by field, most significant first."""
    if isinstance(entry, ForwardingEntry):
        fields = [(entry.label, 20), (entry.tc, 3), (int(entry.s), 1), (entry.ttl, 8)]
    elif isinstance(entry, NasHeaderEntry):
        fields = [(entry.indicator, 20), (int(entry.scope), 3), (int(entry.s), 1), (entry.nasl, 8)]
    else:
        fields = [(entry.opcode, 8), (entry.data, 15), (int(entry.s), 1), (entry.ext, 8)]
    text = "".join(format(value, f"0{width}b") for value, width in fields)
    assert len(text) == 32
    return int(text, 2)


def bits_bytes(stack: MplsStack) -> bytes:
    return b"".join(bits_word(e).to_bytes(4, "big") for e in stack.entries)


# Reference paths. Labels L1..L4 are 100..400.
def mna_path(n: int, rld: int = 36) -> tuple[NodeSpec, ...]:
    return tuple(NodeSpec.mna(f"R{i}", 100 * i, rld) for i in range(1, n + 1))


def legacy_island_path(rld: int = 36) -> tuple[NodeSpec, ...]:
    return (NodeSpec.mna("R1", 100, rld), NodeSpec.legacy("R2", 200),
            NodeSpec.legacy("R3", 300), NodeSpec.mna("R4", 400, rld))


def no_compat_path() -> tuple[NodeSpec, ...]:
    return (NodeSpec.mna("R1", 100, 36), NodeSpec.legacy("R2", 200), NodeSpec.legacy("R3", 300))


def no_compat_stack() -> MplsStack:
    """HBH preservation stack with no backward-compatibility select NAS."""
    return MplsStack.build([L(100), hbh(OP, StackManagement(1)), L(200), L(300)])


# --- random valid stacks -------------------------------------------------

def random_stack(rng: random.Random, max_entries: int = 64, indicator: int = DEFAULT_INDICATOR) -> MplsStack:
    """A valid stack of 1..max_entries entries mixing forwarding entries and NAS of both scopes."""
    bits = rng.getrandbits
    target = 1 + bits(6) % max_entries
    items: list = []
    n = 0
    while n < target:
        room = target - n
        if room >= 2 and bits(2) == 0:
            size = 2 + bits(5) % min(16, room - 1)
            actions = [Opaque(0x10 + bits(8) % 0xF0, bits(15), bits(8)) for _ in range(size - 1)]
            if bits(1):
                actions[bits(4) % len(actions)] = StackManagement(1 + bits(5))
            items.append(Nas(Scope(bits(1)), tuple(actions)))
            n += size
        else:
            label = bits(20)
            if label == indicator:
                continue
            items.append(ForwardingEntry(label, bits(3), False, bits(8)))
            n += 1
    return MplsStack.build(items, indicator)


actions_st = st.one_of(
    st.builds(Opaque, st.integers(0x10, 0xFF), st.integers(0, DATA_MAX), st.integers(0, 255)),
)


@st.composite
def nas_st(draw, scope=None):
    scope = draw(st.sampled_from(list(Scope))) if scope is None else scope
    actions = draw(st.lists(actions_st, min_size=1, max_size=16))
    if draw(st.booleans()):
        pos = draw(st.integers(0, len(actions) - 1))
        actions[pos] = StackManagement(draw(st.integers(1, 32)))
    return Nas(scope, tuple(actions))


forwarding_st = st.builds(
    ForwardingEntry,
    st.integers(0, LABEL_MAX).filter(lambda v: v != DEFAULT_INDICATOR),
    st.integers(0, 7),
    st.just(False),
    st.integers(0, 255),
)


@st.composite
def stack_st(draw, min_items: int = 1, max_items: int = 8):
    items = draw(st.lists(st.one_of(forwarding_st, nas_st()), min_size=min_items, max_size=max_items))
    return MplsStack.build(items)


# --- brute-force minimal-copy oracle for the baseline planner ------------

def brute_force_min_copies(path, requests: ActionRequest) -> int | None:
    """Smallest number of HBH copies for which the forwarding simulation succeeds.

    Tries every subset of positions below the labels of all but the last node,
    smallest subsets first. Returns None if no subset works.
    """
    candidates = range(len(path) - 1)
    for k in range(len(path)):
        for subset in itertools.combinations(candidates, k):
            stack = build_baseline_stack(path, requests, subset)
            if validate_plan(path, stack, requests).ok:
                return k
    return None


def all_small_paths(max_nodes: int = 4, rlds=range(3, 9), with_legacy: bool = True):
    options = [("mna", r) for r in rlds] + ([("legacy", None)] if with_legacy else [])
    for n in range(1, max_nodes + 1):
        for combo in itertools.product(options, repeat=n):
            yield tuple(
                NodeSpec.mna(f"R{i + 1}", 100 * (i + 1), r) if kind == "mna"
                else NodeSpec.legacy(f"R{i + 1}", 100 * (i + 1))
                for i, (kind, r) in enumerate(combo))


def random_scenario(rng: random.Random, max_nodes: int = 8, rld_range=(4, 64), legacy_prob: float = 0.0):
    """Random path plus request with NAS sizes drawn from [2, 17] where the planners allow it."""
    n = rng.randint(1, max_nodes)
    nodes = []
    for i in range(n):
        if 0 < i < n - 1 and rng.random() < legacy_prob:
            nodes.append(NodeSpec.legacy(f"R{i + 1}", 100 * (i + 1)))
        else:
            nodes.append(NodeSpec.mna(f"R{i + 1}", 100 * (i + 1), rng.randint(*rld_range)))
    hbh_count = rng.randint(1, 15)
    hbh_actions = tuple(Opaque(0x20 + k, rng.randint(0, DATA_MAX)) for k in range(hbh_count))
    select = {}
    for node in nodes:
        if node.is_mna and rng.random() < 0.3:
            select[node.id] = tuple(Opaque(0x40 + k, rng.randint(0, 255)) for k in range(rng.randint(1, 15)))
    return tuple(nodes), ActionRequest(hbh_actions, select)


def feasible(planner, path, requests) -> bool:
    try:
        planner(path, requests)
    except PlanningError:
        return False
    return True
