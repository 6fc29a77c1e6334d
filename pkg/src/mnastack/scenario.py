"""Line-oriented scenario files.

Example::

    scenario legacy-island
    node R1 mna rld=36 label=100
    node R2 legacy label=200
    path R1 R2
    hbh-action opaque op=0x20 data=0x1
    select-action R1 opaque op=0x21 data=0x0
    strategy preserving
    packets 10

``strategy explicit`` runs a hand-built stack given by one or more
``stack <hex word> ...`` lines instead of planning one.
"""
from __future__ import annotations

from dataclasses import dataclass

from .codec import decode_words
from .engine import NodeSpec
from .entries import DEFAULT_INDICATOR, LABEL_MAX, RESERVED_LABEL_MAX, Opaque
from .errors import CodecError
from .planner import ActionRequest, Strategy
from .simulator import Scenario


@dataclass(frozen=True)
class LineError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class ScenarioError(Exception):
    def __init__(self, errors: list[LineError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


def _kv(tokens: list[str]) -> dict[str, str]:
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or not value:
            raise ValueError(f"expected key=value, got {tok!r}")
        if key in out:
            raise ValueError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _int(value: str, name: str, base: int = 10) -> int:
    try:
        return int(value, base)
    except ValueError:
        raise ValueError(f"{name} is not a number: {value!r}") from None


def _opaque(tokens: list[str]) -> Opaque:
    if not tokens or tokens[0] != "opaque":
        raise ValueError("only 'opaque' actions can be requested")
    fields = _kv(tokens[1:])
    unknown = set(fields) - {"op", "data", "ext"}
    if unknown:
        raise ValueError(f"unknown action field(s): {', '.join(sorted(unknown))}")
    if "op" not in fields:
        raise ValueError("missing op=<hex>")
    op = _int(fields["op"], "op", 16)
    data = _int(fields.get("data", "0"), "data", 16)
    ext = _int(fields.get("ext", "0"), "ext", 16)
    if not 0x10 <= op <= 0xFF:
        raise ValueError(f"opcode 0x{op:X} is not an opaque opcode (0x10-0xFF)")
    if not 0 <= data < 1 << 15:
        raise ValueError(f"data 0x{data:X} exceeds 15 bits")
    if not 0 <= ext <= 0xFF:
        raise ValueError(f"ext 0x{ext:X} exceeds 8 bits")
    return Opaque(op, data, ext)


def parse_scenario(text: str, indicator: int = DEFAULT_INDICATOR) -> Scenario:
    """Parse scenario text, collecting every line error before raising :class:`ScenarioError`."""
    errors: list[LineError] = []
    name = None
    nodes: dict[str, NodeSpec] = {}
    path_ids: list[str] | None = None
    path_line = 0
    hbh: list[Opaque] = []
    select: dict[str, list[Opaque]] = {}
    select_lines: dict[str, int] = {}
    strategy = Strategy.PRESERVING
    packets = 1
    words: list[int] = []
    stack_line = 0

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *args = line.split()
        try:
            if directive == "scenario":
                if name is not None:
                    raise ValueError("second 'scenario' directive")
                if len(args) != 1:
                    raise ValueError("usage: scenario <name>")
                name = args[0]
            elif directive == "node":
                if len(args) < 2:
                    raise ValueError("usage: node <id> mna rld=<k> label=<v> | node <id> legacy label=<v>")
                node_id, kind, *rest = args
                if node_id in nodes:
                    raise ValueError(f"node {node_id} declared twice")
                fields = _kv(rest)
                allowed = {"mna": {"rld", "label"}, "legacy": {"label"}}.get(kind)
                if allowed is None:
                    raise ValueError(f"unknown node kind {kind!r}")
                if set(fields) != allowed:
                    raise ValueError(f"{kind} node needs exactly: {', '.join(sorted(allowed))}")
                label = _int(fields["label"], "label")
                if label <= RESERVED_LABEL_MAX:
                    raise ValueError(f"label {label} is in the reserved range 0-{RESERVED_LABEL_MAX}")
                if label > LABEL_MAX:
                    raise ValueError(f"label {label} exceeds 20 bits")
                if kind == "mna":
                    rld = _int(fields["rld"], "rld")
                    if rld < 1:
                        raise ValueError("rld must be >= 1")
                    nodes[node_id] = NodeSpec.mna(node_id, label, rld)
                else:
                    nodes[node_id] = NodeSpec.legacy(node_id, label)
            elif directive == "path":
                if path_ids is not None:
                    raise ValueError("second 'path' directive")
                if not args:
                    raise ValueError("path needs at least one node")
                path_ids, path_line = args, lineno
            elif directive == "hbh-action":
                hbh.append(_opaque(args))
            elif directive == "select-action":
                if not args:
                    raise ValueError("usage: select-action <id> opaque op=<hex> data=<hex>")
                select.setdefault(args[0], []).append(_opaque(args[1:]))
                select_lines.setdefault(args[0], lineno)
            elif directive == "strategy":
                if len(args) != 1:
                    raise ValueError("usage: strategy baseline|preserving|explicit")
                try:
                    strategy = Strategy(args[0])
                except ValueError:
                    raise ValueError(f"unknown strategy {args[0]!r}") from None
            elif directive == "packets":
                if len(args) != 1:
                    raise ValueError("usage: packets <k>")
                packets = _int(args[0], "packets")
                if packets < 1:
                    raise ValueError("packets must be >= 1")
            elif directive == "stack":
                if not args:
                    raise ValueError("usage: stack <hex word> ...")
                stack_line = stack_line or lineno
                for tok in args:
                    w = _int(tok, "stack word", 16)
                    if not 0 <= w <= 0xFFFFFFFF:
                        raise ValueError(f"stack word {tok} exceeds 32 bits")
                    words.append(w)
            else:
                raise ValueError(f"unknown directive {directive!r}")
        except ValueError as exc:
            errors.append(LineError(lineno, str(exc)))

    last = len(text.splitlines())
    if name is None:
        errors.append(LineError(last, "missing 'scenario' directive"))
    if path_ids is None:
        errors.append(LineError(last, "missing 'path' directive"))
    else:
        for node_id in path_ids:
            if node_id not in nodes:
                errors.append(LineError(path_line, f"undeclared node {node_id}"))
        if len(set(path_ids)) != len(path_ids):
            errors.append(LineError(path_line, "node repeated on path"))
    for node_id, lineno in select_lines.items():
        if node_id not in nodes:
            errors.append(LineError(lineno, f"undeclared node {node_id}"))
        elif path_ids is not None and node_id not in path_ids:
            errors.append(LineError(lineno, f"node {node_id} is not on the path"))

    explicit = None
    if strategy is Strategy.EXPLICIT:
        if not words:
            errors.append(LineError(last, "explicit strategy needs 'stack' lines"))
        else:
            try:
                explicit = decode_words(words, indicator)
            except CodecError as exc:
                errors.append(LineError(stack_line, f"bad stack: {exc}"))
    elif words:
        errors.append(LineError(stack_line, "'stack' given but strategy is not explicit"))

    if errors:
        raise ScenarioError(sorted(errors, key=lambda e: e.line))
    path = tuple(nodes[i] for i in path_ids)
    requests = ActionRequest(tuple(hbh), {k: tuple(v) for k, v in select.items()})
    return Scenario(name, path, requests, strategy, packets, explicit, indicator)


def load_scenario(path: str, indicator: int = DEFAULT_INDICATOR) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), indicator)
