"""MPLS label stacks with MNA network action sub-stacks.

Bit-exact codec, stack operations, per-hop node processing with HBH
preservation and stack management, ingress planning and a path simulator.
"""
from .codec import decode_stack, encode_entry, encode_stack
from .engine import HopOutcome, NodeSpec, Verdict, apply_stack_management, ecmp_hash, process_legacy_node, process_mna_node
from .entries import (
    DEFAULT_INDICATOR,
    ForwardingEntry,
    MplsStack,
    Nas,
    NasActionEntry,
    NasHeaderEntry,
    Opaque,
    Scope,
    StackManagement,
)
from .errors import CodecError, MisroutedError, MnaError, PlanningError, SimulationError, StackError
from .planner import ActionRequest, PlanResult, Strategy, plan_baseline, plan_preserving, validate_plan
from .simulator import Scenario, SimReport, compare, run
from .stack import find_first_nas, in_between_capacity, pop, pop_exposed_nas, push, required_min_rld, swap, validate

__version__ = "0.1.0"
