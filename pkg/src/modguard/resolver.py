"""Backtracking dependency resolution against a local index.

The search assigns one version per project, depth first.  At each step the
next project is chosen from the pending requirements, either by
:func:`prioritize` (pinned first, then constrained, then unconstrained;
shallower first) or in plain arrival order.  Candidates are tried newest
first among the versions every pending requirement accepts.  Failed
sub-states are memoized so an equivalent dead end is never explored twice.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .errors import MissingPackage, Unsat
from .pep import (
    EnvironmentProfile,
    Requirement,
    Version,
    VersionSpecifier,
    eval_marker,
    parse_requirement,
    parse_version,
)

ROOT = "<root>"


class KnowledgeBase(Protocol):
    def query_versions(self, name) -> list[Version]: ...

    def get(self, name, version): ...


def node_id(name: str, version: Version | str) -> str:
    return f"{name}=={version}"


def split_node(node: str) -> tuple[str, Version]:
    name, _, version = node.partition("==")
    return name, parse_version(version)


@dataclass
class DependencyGraph:
    nodes: dict[str, Version] = field(default_factory=dict)
    edges: set[tuple[str, str, str]] = field(default_factory=set)
    root: str = ROOT

    def node_ids(self) -> set[str]:
        return {self.root} | {node_id(n, v) for n, v in self.nodes.items()}

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {(a, b) for a, b, _ in self.edges}

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "nodes": sorted(node_id(n, v) for n, v in self.nodes.items()),
            "edges": [list(e) for e in sorted(self.edges)],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DependencyGraph":
        nodes = dict(split_node(n) for n in doc["nodes"])
        edges = {tuple(e) for e in doc["edges"]}
        return cls(nodes, edges, doc.get("root", ROOT))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DependencyGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges and self.root == other.root


@dataclass
class ResolutionStats:
    backtracks: int = 0
    candidates_tried: int = 0

    def to_json(self) -> dict:
        return {"backtracks": self.backtracks, "candidates_tried": self.candidates_tried}


# ---------------------------------------------------------------------------
# ordering
# ---------------------------------------------------------------------------


def constraint_class(req: Requirement) -> int:
    if req.specifier.is_pinned:
        return 0
    if req.specifier:
        return 1
    return 2


def prioritize(pending: Iterable[tuple[Requirement, int]]) -> list[tuple[Requirement, int]]:
    """Pinned before ranged before unconstrained; shallower first; then by name."""
    return sorted(pending, key=lambda item: (constraint_class(item[0]), item[1], item[0].name.normalized))


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Item:
    req: Requirement
    depth: int
    parent: str
    chain: tuple[str, ...]


@dataclass
class _State:
    assigned: dict[str, Version]
    extras: dict[str, frozenset[str]]
    pending: list[_Item]
    edges: list[tuple[str, str, str]]

    def key(self) -> tuple:
        return (
            frozenset(self.assigned.items()),
            frozenset(self.extras.items()),
            frozenset((str(i.req), i.parent) for i in self.pending),
        )


class _Resolver:
    def __init__(self, kb: KnowledgeBase, env: EnvironmentProfile, prioritized: bool, global_extras: bool):
        self.kb = kb
        self.env = env
        self.prioritized = prioritized
        self.global_extras = global_extras
        self.stats = ResolutionStats()
        self.failed: set[tuple] = set()
        self.missing: list[str] = []
        self.conflict: tuple[str, tuple[str, ...], list[str]] | None = None
        self._versions: dict[str, list[Version]] = {}

    # -- helpers ------------------------------------------------------------

    def versions(self, name: str) -> list[Version]:
        if name not in self._versions:
            self._versions[name] = list(self.kb.query_versions(name))
        return self._versions[name]

    def _marker_extras(self, state: _State, name: str) -> frozenset[str]:
        if self.global_extras:
            return frozenset().union(*state.extras.values()) if state.extras else frozenset()
        return state.extras.get(name, frozenset())

    def dependencies(self, name: str, version: Version, extras: frozenset[str], marker_extras: frozenset[str]) -> list[Requirement]:
        record = self.kb.get(name, version)
        if record is None:
            return []
        reqs = list(record.install)
        for extra in sorted(extras):
            reqs.extend(record.extras.get(extra, []))
        return [r for r in reqs if eval_marker(r.marker, self.env, marker_extras)]

    def _conflict(self, item: _Item, constraints: list[str]) -> None:
        self.conflict = (item.req.name.normalized, item.chain, constraints)

    def _requested_extras(self, state: _State, name: str) -> frozenset[str]:
        if self.global_extras:
            return frozenset().union(*state.extras.values()) if state.extras else frozenset()
        return state.extras.get(name, frozenset())

    def _grow_extras(self, state: _State, name: str, new: frozenset[str], depth: int, chain: tuple[str, ...]) -> None:
        """Record newly requested extras and queue the dependencies they unlock."""
        targets = list(state.assigned) if self.global_extras else [name]
        before = {t: self.dependencies(t, state.assigned[t], self._requested_extras(state, t), self._marker_extras(state, t))
                  for t in targets if t in state.assigned}
        state.extras[name] = state.extras.get(name, frozenset()) | new
        for t, old in before.items():
            now = self.dependencies(t, state.assigned[t], self._requested_extras(state, t), self._marker_extras(state, t))
            parent = node_id(t, state.assigned[t])
            old_text = {str(r) for r in old}
            for req in now:
                if str(req) not in old_text:
                    state.pending.append(_Item(req, depth, parent, chain + (parent,)))

    def _drain(self, state: _State) -> bool:
        """Settle pending requirements on already assigned projects; False on conflict."""
        i = 0
        while i < len(state.pending):
            item = state.pending[i]
            name = item.req.name.normalized
            if name not in state.assigned:
                i += 1
                continue
            version = state.assigned[name]
            if not item.req.specifier.contains(version):
                self._conflict(item, [str(item.req), f"assigned {node_id(name, version)}"])
                return False
            state.pending.pop(i)
            state.edges.append((item.parent, node_id(name, version), str(item.req)))
            new = item.req.extras - state.extras.get(name, frozenset())
            if new:
                self._grow_extras(state, name, new, item.depth + 1, item.chain)
        return True

    def _next_name(self, state: _State) -> str:
        if not self.prioritized:
            return state.pending[0].req.name.normalized
        ordered = prioritize((i.req, i.depth) for i in state.pending)
        return ordered[0][0].name.normalized

    def _candidates(self, name: str, items: list[_Item]) -> list[Version]:
        spec = VersionSpecifier()
        for item in items:
            spec = spec & item.req.specifier
        matching = [v for v in self.versions(name) if spec.contains(v)]
        if spec.allows_prereleases():
            return matching
        final = [v for v in matching if not v.is_prerelease]
        return final or matching

    # -- recursion ----------------------------------------------------------

    def solve(self, state: _State) -> _State | None:
        if not self._drain(state):
            return None
        if not state.pending:
            return state
        key = state.key()
        if key in self.failed:
            return None
        name = self._next_name(state)
        items = [i for i in state.pending if i.req.name.normalized == name]
        if not self.versions(name):
            if name not in self.missing:
                self.missing.append(name)
            self._conflict(items[0], [str(i.req) for i in items])
            self.failed.add(key)
            return None
        candidates = self._candidates(name, items)
        if not candidates:
            self._conflict(items[0], [str(i.req) for i in items])
        rest = [i for i in state.pending if i.req.name.normalized != name]
        requested = frozenset().union(*(i.req.extras for i in items))
        depth = min(i.depth for i in items)
        for version in candidates:
            self.stats.candidates_tried += 1
            node = node_id(name, version)
            child = _State(
                dict(state.assigned),
                dict(state.extras),
                list(rest),
                list(state.edges) + [(i.parent, node, str(i.req)) for i in items],
            )
            child.assigned[name] = version
            chain = items[0].chain + (node,)
            for req in self.dependencies(name, version, self._requested_extras(child, name), self._marker_extras(child, name)):
                child.pending.append(_Item(req, depth + 1, node, chain))
            new = requested - child.extras.get(name, frozenset())
            if new:
                self._grow_extras(child, name, new, depth + 1, chain)
            found = self.solve(child)
            if found is not None:
                return found
            self.stats.backtracks += 1
        self.failed.add(key)
        return None


def resolve(
    roots: Iterable[Requirement | str],
    env: EnvironmentProfile,
    kb: KnowledgeBase,
    prioritized: bool = True,
    global_extras: bool = False,
) -> tuple[DependencyGraph, ResolutionStats]:
    """Resolve ``roots`` to one version per project.

    Raises :class:`MissingPackage` when the search failed and some required
    project has no releases at all, :class:`Unsat` otherwise.
    """
    reqs = [parse_requirement(r) if isinstance(r, str) else r for r in roots]
    solver = _Resolver(kb, env, prioritized, global_extras)
    root_extras = frozenset()
    pending = [_Item(r, 1, ROOT, (ROOT,)) for r in reqs if eval_marker(r.marker, env, root_extras)]
    found = solver.solve(_State({}, {}, pending, []))
    if found is None:
        if solver.missing:
            raise MissingPackage(solver.missing[0], chain=solver.conflict[1] if solver.conflict else None)
        name, chain, constraints = solver.conflict or ("", (ROOT,), [])
        raise Unsat(name, list(chain), constraints)
    graph = DependencyGraph(dict(found.assigned), set(found.edges))
    return graph, solver.stats


# ---------------------------------------------------------------------------
# checking and comparison
# ---------------------------------------------------------------------------


def validate_graph(
    graph: DependencyGraph,
    roots: Iterable[Requirement | str],
    env: EnvironmentProfile,
    kb: KnowledgeBase,
    global_extras: bool = False,
) -> list[str]:
    """Constraint violations in ``graph``; an empty list means it is a valid resolution."""
    problems: list[str] = []
    reqs = [parse_requirement(r) if isinstance(r, str) else r for r in roots]
    ids = graph.node_ids()
    requested: dict[str, set[str]] = {n: set() for n in graph.nodes}
    for src, dst, label in graph.edges:
        if src not in ids or dst not in ids:
            problems.append(f"edge {src} -> {dst} references a missing node")
            continue
        req = parse_requirement(label)
        name, version = split_node(dst)
        if req.name.normalized != name or not req.specifier.contains(version):
            problems.append(f"edge {src} -> {dst} label {label!r} does not accept the target")
        requested.setdefault(name, set()).update(req.extras)
    everything = set().union(*requested.values()) if requested else set()

    def active(name: str) -> frozenset[str]:
        return frozenset(everything if global_extras else requested.get(name, set()))

    def check(parent: str, deps: list[Requirement], extras: frozenset[str]) -> None:
        for dep in deps:
            if not eval_marker(dep.marker, env, extras):
                continue
            name = dep.name.normalized
            if name not in graph.nodes:
                problems.append(f"{parent} needs {dep} but {name} is absent")
                continue
            target = node_id(name, graph.nodes[name])
            if not dep.specifier.contains(graph.nodes[name]):
                problems.append(f"{parent} needs {dep} but {target} was chosen")
            if (parent, target) not in graph.edge_pairs():
                problems.append(f"missing edge {parent} -> {target}")

    check(graph.root, reqs, frozenset())
    for name, version in graph.nodes.items():
        record = kb.get(name, version)
        if record is None:
            problems.append(f"{node_id(name, version)} is not in the index")
            continue
        extras = active(name)
        deps = list(record.install)
        for extra in sorted(extras):
            deps += record.extras.get(extra, [])
        check(node_id(name, version), deps, extras)

    adjacency: dict[str, set[str]] = {}
    for a, b in graph.edge_pairs():
        adjacency.setdefault(a, set()).add(b)
    seen = {graph.root}
    stack = [graph.root]
    while stack:
        for nxt in adjacency.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    for node in sorted(ids - seen):
        problems.append(f"{node} is unreachable from the root")
    return problems


class Metric(str, enum.Enum):
    Correct = "Correct"
    Miss = "Miss"
    Excess = "Excess"
    Error = "Error"


class Level(str, enum.Enum):
    Node = "node"
    Edge = "edge"


def compare_sets(expected: set, actual: set) -> Metric:
    missing = expected - actual
    extra = actual - expected
    if not missing and not extra:
        return Metric.Correct
    if missing and not extra:
        return Metric.Miss
    if extra and not missing:
        return Metric.Excess
    return Metric.Error


def compare_graphs(expected: DependencyGraph, actual: DependencyGraph, level: Level | str = Level.Node) -> Metric:
    level = Level(level)
    exp: set = set(expected.node_ids())
    act: set = set(actual.node_ids())
    if level is Level.Edge:
        exp |= expected.edge_pairs()
        act |= actual.edge_pairs()
    return compare_sets(exp, act)


def graph_dumps(graph: DependencyGraph, stats: ResolutionStats | None = None) -> str:
    doc = graph.to_json()
    if stats is not None:
        doc["stats"] = stats.to_json()
    return json.dumps(doc, indent=2, sort_keys=True)
