"""Text tables and JSON documents for stacks, plans and simulation reports."""
from __future__ import annotations

from typing import Any

from .codec import encode_entry, encode_stack, hex_dump
from .entries import ForwardingEntry, MplsStack, NasActionEntry, NasHeaderEntry, entry_to_action
from .planner import PlanResult
from .simulator import Comparison, SimReport


def describe_entry(entry) -> tuple[str, str]:
    if isinstance(entry, ForwardingEntry):
        return "label", f"{entry.label} tc={entry.tc} ttl={entry.ttl}"
    if isinstance(entry, NasHeaderEntry):
        return "nas", f"{entry.scope} nasl={entry.nasl}"
    return "action", str(entry_to_action(entry))


def stack_table(stack: MplsStack, indent: str = "") -> str:
    lines = [f"{indent}{'idx':>3}  {'kind':<6}  {'content':<32}  s"]
    for i, e in enumerate(stack.entries):
        kind, content = describe_entry(e)
        lines.append(f"{indent}{i:>3}  {kind:<6}  {content:<32}  {int(e.s)}")
    return "\n".join(lines) + "\n"


def entry_json(entry) -> dict[str, Any]:
    word = f"0x{encode_entry(entry):08X}"
    if isinstance(entry, ForwardingEntry):
        return {"kind": "forwarding", "label": entry.label, "tc": entry.tc, "s": entry.s,
                "ttl": entry.ttl, "word": word}
    if isinstance(entry, NasHeaderEntry):
        return {"kind": "nas_header", "scope": str(entry.scope), "nasl": entry.nasl, "s": entry.s,
                "indicator": entry.indicator, "word": word}
    assert isinstance(entry, NasActionEntry)
    return {"kind": "nas_action", "opcode": entry.opcode, "data": entry.data, "s": entry.s,
            "ext": entry.ext, "action": str(entry_to_action(entry)), "word": word}


def stack_json(stack: MplsStack) -> list[dict[str, Any]]:
    return [entry_json(e) for e in stack.entries]


def _action_list(pairs) -> list[dict[str, str]]:
    return [{"scope": str(scope), "action": str(action)} for scope, action in pairs]


def plan_json(result: PlanResult) -> dict[str, Any]:
    return {
        "strategy": result.strategy.value,
        "stack": stack_json(result.stack),
        "hex": hex_dump(encode_stack(result.stack)).split(),
        "copiesInserted": result.copies_inserted,
        "liftsPlanned": dict(result.lifts_planned),
        "overheadBytes": result.overhead_bytes,
        "stackManagementActions": result.stack_management_actions,
        "stackManagementBytes": result.stack_management_bytes,
        "compatSelectHeaders": result.compat_select_headers,
    }


def report_json(report: SimReport) -> dict[str, Any]:
    return {
        "scenario": report.scenario,
        "strategy": report.strategy.value,
        "verdict": {"kind": report.verdict.value, "node": report.drop_node, "reason": report.drop_reason},
        "hops": [
            {
                "node": hop.node_id,
                "verdict": hop.outcome.verdict.value,
                "reason": hop.outcome.reason,
                "parsedEntries": hop.outcome.parsed_entries,
                "liftedLabels": hop.outcome.lifted_labels,
                "hash": f"0x{hop.hash:08X}",
                "actionsProcessed": _action_list(hop.outcome.actions_processed),
                "diagnostics": list(hop.outcome.diagnostics),
                "stackAfter": stack_json(hop.outcome.stack_after),
            }
            for hop in report.hops
        ],
        "maxParsedEntries": dict(report.max_parsed_entries),
        "stackBytesInitial": report.stack_bytes_initial,
        "overheadBytes": report.overhead_bytes,
        "hashesPerHop": [f"0x{h:08X}" for h in report.hashes_per_hop],
        "actionMatrix": {k: _action_list(v) for k, v in report.action_matrix.items()},
        "plan": plan_json(report.plan) if report.plan else None,
    }


def comparison_json(comparison: Comparison) -> dict[str, Any]:
    return {
        "baseline": report_json(comparison.baseline),
        "preserving": report_json(comparison.preserving),
        "actionMatricesEqual": comparison.matrices_equal,
        "entryDifference": comparison.entry_difference,
    }


def render_plan(result: PlanResult) -> str:
    out = [stack_table(result.stack), "hex:\n", hex_dump(encode_stack(result.stack))]
    lifts = " ".join(f"{k}={v}" for k, v in result.lifts_planned.items()) or "-"
    out.append(
        f"strategy={result.strategy.value} copiesInserted={result.copies_inserted} "
        f"liftsPlanned={lifts} overheadBytes={result.overhead_bytes} "
        f"stackManagementBytes={result.stack_management_bytes}\n")
    return "".join(out)


def verdict_line(report: SimReport) -> str:
    if report.delivered:
        return "verdict: Delivered\n"
    return f"verdict: Dropped at {report.drop_node} ({report.drop_reason})\n"


def render_run(report: SimReport) -> str:
    out = []
    for hop in report.hops:
        o = hop.outcome
        verdict = o.verdict.value if o.reason is None else f"{o.verdict.value}({o.reason})"
        out.append(f"{hop.node_id} {verdict} parsed={o.parsed_entries} lifted={o.lifted_labels} "
                   f"hash=0x{hop.hash:08X}\n")
        out.append(stack_table(o.stack_after, "    "))
    out.append(verdict_line(report))
    return "".join(out)


def render_comparison(c: Comparison) -> str:
    b, p = c.baseline, c.preserving
    rows = [
        ("verdict", b.verdict.value, p.verdict.value),
        ("stack entries", b.stack_bytes_initial // 4, p.stack_bytes_initial // 4),
        ("stack bytes", b.stack_bytes_initial, p.stack_bytes_initial),
        ("copies inserted", b.plan.copies_inserted, p.plan.copies_inserted),
        ("overhead bytes", b.overhead_bytes, p.overhead_bytes),
    ]
    ids = list(dict.fromkeys(list(b.max_parsed_entries) + list(p.max_parsed_entries)))
    for node_id in ids:
        rows.append((f"max parsed {node_id}", b.max_parsed_entries.get(node_id, "-"),
                     p.max_parsed_entries.get(node_id, "-")))
    out = [f"{'':<20}  {'baseline':>10}  {'preserving':>10}\n"]
    out.extend(f"{name:<20}  {bv!s:>10}  {pv!s:>10}\n" for name, bv, pv in rows)
    out.append(f"action matrices equal: {'yes' if c.matrices_equal else 'no'}\n")
    return "".join(out)

