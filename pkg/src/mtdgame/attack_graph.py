"""Attack graphs: typed nodes, pre/post edges, validation and path enumeration.

Node kinds partition the graph into facts, exploits, privileges and the
goal. ``pre`` edges run from a fact or exploit into the privilege it
grants; ``post`` edges run from a held privilege (or the goal) into the
facts and exploits it enables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class NodeKind(str, Enum):
    FACT = "fact"
    EXPLOIT = "exploit"
    PRIVILEGE = "privilege"
    GOAL = "goal"


class EdgeKind(str, Enum):
    PRE = "pre"
    POST = "post"


_PRE_SOURCES = {NodeKind.FACT, NodeKind.EXPLOIT}
_PRIV_KINDS = {NodeKind.PRIVILEGE, NodeKind.GOAL}


class GraphParseError(ValueError):
    """The attack-graph file could not be read or does not match the schema."""


class GraphValidationError(ValueError):
    """A parsed graph breaks one or more structural invariants."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))


@dataclass(frozen=True)
class AgNode:
    id: str
    kind: NodeKind
    label: str = ""
    vuln_ref: str | None = None


@dataclass(frozen=True)
class AgEdge:
    source: str
    target: str
    kind: EdgeKind


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.rule}: {self.subject}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


@dataclass(frozen=True)
class AttackGraph:
    nodes: tuple[AgNode, ...]
    edges: tuple[AgEdge, ...]
    initial: str
    goal: str
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        index = {}
        for node in self.nodes:
            index.setdefault(node.id, node)
        object.__setattr__(self, "_index", index)

    def node(self, node_id: str) -> AgNode:
        try:
            return self._index[node_id]
        except KeyError:
            raise KeyError(f"unknown node id {node_id!r}") from None

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._index

    def nodes_of(self, *kinds: NodeKind) -> list[AgNode]:
        return [n for n in self.nodes if n.kind in kinds]

    def exploits(self) -> list[AgNode]:
        return sorted(self.nodes_of(NodeKind.EXPLOIT), key=lambda n: n.id)

    def enabled_exploits(self, privilege: str) -> list[str]:
        """Exploit ids reachable from ``privilege`` via a post edge, sorted."""
        return sorted(
            e.target
            for e in self.edges
            if e.kind is EdgeKind.POST
            and e.source == privilege
            and e.target in self._index
            and self._index[e.target].kind is NodeKind.EXPLOIT
        )

    def granted_privileges(self, exploit: str) -> list[str]:
        return sorted(
            e.target
            for e in self.edges
            if e.kind is EdgeKind.PRE
            and e.source == exploit
            and e.target in self._index
            and self._index[e.target].kind in _PRIV_KINDS
        )

    def privilege_successors(self) -> dict[str, list[tuple[str, str]]]:
        """Map each privilege/goal id to its ``(exploit, granted privilege)`` hops."""
        succ: dict[str, list[tuple[str, str]]] = {
            n.id: [] for n in self.nodes_of(*_PRIV_KINDS)
        }
        for priv in succ:
            for ex in self.enabled_exploits(priv):
                for target in self.granted_privileges(ex):
                    succ[priv].append((ex, target))
        return succ

    def privilege_ranks(self) -> dict[str, int]:
        """Longest-path depth of each privilege from the sources of the exploit DAG.

        Requires an acyclic privilege graph; raises ``GraphValidationError`` otherwise.
        """
        succ = self.privilege_successors()
        indeg = {p: 0 for p in succ}
        for hops in succ.values():
            for _, t in hops:
                indeg[t] += 1
        rank = {p: 0 for p in succ}
        ready = sorted(p for p, d in indeg.items() if d == 0)
        seen = 0
        while ready:
            p = ready.pop(0)
            seen += 1
            for _, t in succ[p]:
                rank[t] = max(rank[t], rank[p] + 1)
                indeg[t] -= 1
                if indeg[t] == 0:
                    ready.append(t)
            ready.sort()
        if seen != len(succ):
            raise GraphValidationError(
                ValidationReport((Violation("monotonicity", "privilege graph", "cycle"),))
            )
        return rank


def _find_cycle(succ: dict[str, list[tuple[str, str]]]) -> list[str] | None:
    white, grey, black = 0, 1, 2
    color = {p: white for p in succ}
    stack_path: list[str] = []

    def visit(p: str) -> list[str] | None:
        color[p] = grey
        stack_path.append(p)
        for _, t in succ[p]:
            if color[t] == grey:
                return stack_path[stack_path.index(t):] + [t]
            if color[t] == white:
                found = visit(t)
                if found:
                    return found
        stack_path.pop()
        color[p] = black
        return None

    for p in sorted(succ):
        if color[p] == white:
            found = visit(p)
            if found:
                return found
    return None


def validate_graph(g: AttackGraph) -> ValidationReport:
    """Check every structural invariant and list all violations found."""
    out: list[Violation] = []
    ids = [n.id for n in g.nodes]

    if not g.nodes or not g.initial:
        out.append(Violation("no initial state", g.initial or "<none>"))

    seen: set[str] = set()
    for node_id in ids:
        if node_id in seen:
            out.append(Violation("duplicate node id", node_id))
        seen.add(node_id)

    for n in g.nodes:
        if n.kind is NodeKind.EXPLOIT and not n.vuln_ref:
            out.append(Violation("missing vulnerability reference", n.id))
        elif n.kind is not NodeKind.EXPLOIT and n.vuln_ref is not None:
            out.append(Violation("unexpected vulnerability reference", n.id))

    endpoints_ok = True
    for e in g.edges:
        tag = f"{e.source}->{e.target}"
        if e.source not in g or e.target not in g:
            out.append(Violation("dangling edge", tag))
            endpoints_ok = False
            continue
        src, dst = g.node(e.source).kind, g.node(e.target).kind
        if e.kind is EdgeKind.PRE:
            good = src in _PRE_SOURCES and dst in _PRIV_KINDS
        else:
            good = src in _PRIV_KINDS and dst in _PRE_SOURCES
        if not good:
            out.append(
                Violation("edge kind violation", tag, f"{e.kind.value} edge {src.value}->{dst.value}")
            )

    if g.nodes:
        if g.initial and g.initial not in g:
            out.append(Violation("no initial state", g.initial, "initial node missing"))
        elif g.initial and g.node(g.initial).kind is not NodeKind.PRIVILEGE:
            out.append(Violation("initial kind", g.initial, "initial must be a privilege node"))
        if g.goal not in g:
            out.append(Violation("no goal state", g.goal or "<none>"))
        elif g.node(g.goal).kind is not NodeKind.GOAL:
            out.append(Violation("goal kind", g.goal, "goal must be a goal node"))

    for ex in g.exploits():
        granted = g.granted_privileges(ex.id)
        if len(granted) != 1:
            out.append(
                Violation("exploit outcome", ex.id, f"grants {len(granted)} privileges, expected 1")
            )

    if endpoints_ok:
        succ = g.privilege_successors()
        cycle = _find_cycle(succ)
        if cycle:
            out.append(Violation("monotonicity", cycle[0], " -> ".join(cycle)))
        elif g.initial in succ and g.goal in succ and not _reachable(succ, g.initial, g.goal):
            out.append(Violation("goal unreachable", g.goal, f"from {g.initial}"))

    return ValidationReport(tuple(out))


def _reachable(succ: dict[str, list[tuple[str, str]]], start: str, end: str) -> bool:
    stack, seen = [start], {start}
    while stack:
        p = stack.pop()
        if p == end:
            return True
        for _, t in succ[p]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return False


def enumerate_attack_paths(g: AttackGraph, source: str, target: str) -> list[list[str]]:
    """All simple privilege paths from ``source`` to ``target`` as exploit-id lists.

    Output is sorted lexicographically by the exploit sequence.
    """
    for node_id in (source, target):
        if g.node(node_id).kind not in _PRIV_KINDS:
            raise ValueError(f"{node_id!r} is not a privilege or goal node")
    succ = g.privilege_successors()
    paths: set[tuple[str, ...]] = set()
    on_path = {source}
    trail: list[str] = []

    def walk(p: str) -> None:
        if p == target:
            paths.add(tuple(trail))
            return
        for ex, t in succ[p]:
            if t in on_path:
                continue
            on_path.add(t)
            trail.append(ex)
            walk(t)
            trail.pop()
            on_path.discard(t)

    walk(source)
    return [list(p) for p in sorted(paths)]


_NODE_FIELDS = {"id", "kind", "label", "vuln_ref"}
_EDGE_FIELDS = {"from", "to", "kind"}
_TOP_FIELDS = {"nodes", "edges", "initial", "goal"}


def _check_fields(obj, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise GraphParseError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise GraphParseError(f"{where}: unknown fields {sorted(extra)}")
    missing = required - set(obj)
    if missing:
        raise GraphParseError(f"{where}: missing fields {sorted(missing)}")


def graph_from_dict(data: dict) -> AttackGraph:
    """Build an (unvalidated) graph from the JSON object layout."""
    _check_fields(data, _TOP_FIELDS, {"nodes", "edges"}, "graph")
    nodes = []
    for i, raw in enumerate(data["nodes"]):
        _check_fields(raw, _NODE_FIELDS, {"id", "kind"}, f"nodes[{i}]")
        try:
            kind = NodeKind(raw["kind"])
        except ValueError:
            raise GraphParseError(f"nodes[{i}]: unknown node kind {raw['kind']!r}") from None
        nodes.append(AgNode(str(raw["id"]), kind, str(raw.get("label", "")), raw.get("vuln_ref")))
    edges = []
    for i, raw in enumerate(data["edges"]):
        _check_fields(raw, _EDGE_FIELDS, _EDGE_FIELDS, f"edges[{i}]")
        try:
            kind = EdgeKind(raw["kind"])
        except ValueError:
            raise GraphParseError(f"edges[{i}]: unknown edge kind {raw['kind']!r}") from None
        edges.append(AgEdge(str(raw["from"]), str(raw["to"]), kind))
    return AttackGraph(tuple(nodes), tuple(edges), data.get("initial") or "", data.get("goal") or "")


def graph_to_dict(g: AttackGraph) -> dict:
    nodes = []
    for n in g.nodes:
        item = {"id": n.id, "kind": n.kind.value, "label": n.label}
        if n.vuln_ref is not None:
            item["vuln_ref"] = n.vuln_ref
        nodes.append(item)
    edges = [{"from": e.source, "to": e.target, "kind": e.kind.value} for e in g.edges]
    return {"nodes": nodes, "edges": edges, "initial": g.initial, "goal": g.goal}


def load_attack_graph(path: str | Path) -> AttackGraph:
    """Read and validate an attack-graph JSON file.

    Raises ``GraphParseError`` for unreadable or malformed files and
    ``GraphValidationError`` (carrying the full report) for invariant breaks.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GraphParseError(f"{path}: {exc}") from exc
    g = graph_from_dict(data)
    report = validate_graph(g)
    if not report.ok:
        raise GraphValidationError(report)
    return g


def dump_attack_graph(g: AttackGraph, path: str | Path) -> None:
    text = json.dumps(graph_to_dict(g), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")
