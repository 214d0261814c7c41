"""Module conflict detection.

Three patterns are reported:

* ``module-to-lib``: a package installs a top-level name that the standard
  library already uses, so one of them is imported in place of the other;
* ``module-to-tpl``: two unrelated projects install the same module path and
  overwrite each other when both are present;
* ``module-in-dep``: the same, between two packages of one dependency graph,
  where co-installation is guaranteed.
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Iterable

from .errors import MissingRecord
from .index import PackageRecord
from .resolver import DependencyGraph, KnowledgeBase, node_id
from .simulate import ModuleSet, top_level_names


class Pattern(str, enum.Enum):
    ModuleToLib = "module-to-lib"
    ModuleToTPL = "module-to-tpl"
    ModuleInDep = "module-in-dep"


@dataclass(frozen=True)
class StdlibCatalog:
    names: frozenset[str]
    label: str = ""

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.names)

    @classmethod
    def from_text(cls, text: str) -> "StdlibCatalog":
        label = ""
        names = set()
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("# label:"):
                label = line.split(":", 1)[1].strip()
            elif line and not line.startswith("#"):
                names.add(line)
        return cls(frozenset(names), label)

    @classmethod
    def default(cls) -> "StdlibCatalog":
        text = resources.files("modguard").joinpath("data/stdlib_modules.txt").read_text(encoding="utf-8")
        return cls.from_text(text)


@dataclass(frozen=True)
class ConflictFinding:
    pattern: Pattern
    subjects: tuple[str, ...]
    paths: frozenset[str]
    content_differs: bool = False
    case_insensitive: bool = False

    @property
    def low_severity(self) -> bool:
        """Only ``.pth`` shims collide; these are namespace bookkeeping, not code."""
        return all(p.endswith(".pth") for p in self.paths)

    def sort_key(self) -> tuple:
        return (self.pattern.value, self.subjects, tuple(sorted(self.paths)))

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern.value,
            "subjects": list(self.subjects),
            "paths": sorted(self.paths),
            "content_differs": self.content_differs,
            "case_insensitive": self.case_insensitive,
            "low_severity": self.low_severity,
        }


def _sorted(findings: Iterable[ConflictFinding]) -> list[ConflictFinding]:
    return sorted(findings, key=ConflictFinding.sort_key)


# ---------------------------------------------------------------------------
# detectors
# ---------------------------------------------------------------------------


def detect_module_to_lib(
    ms: ModuleSet | Iterable[str],
    catalog: StdlibCatalog,
    subject: str = "",
    case_insensitive: bool = False,
) -> list[ConflictFinding]:
    out = []
    for name in sorted(top_level_names(ms)):
        key = name.lower() if case_insensitive else name
        if key in catalog:
            subjects = (subject, key) if subject else (key,)
            out.append(ConflictFinding(Pattern.ModuleToLib, subjects, frozenset({name}), False, key != name))
    return out


def _pair_finding(
    pattern: Pattern,
    a: tuple[str, ModuleSet],
    b: tuple[str, ModuleSet],
    case_insensitive: bool,
) -> ConflictFinding | None:
    (id_a, ms_a), (id_b, ms_b) = sorted([a, b], key=lambda x: x[0])
    fold = str.lower if case_insensitive else (lambda p: p)
    keyed_b: dict[str, list[str]] = defaultdict(list)
    for path in ms_b:
        keyed_b[fold(path)].append(path)
    paths: set[str] = set()
    differs = False
    exact = False
    for path in ms_a:
        for other in keyed_b.get(fold(path), ()):
            paths.update((path, other))
            exact = exact or path == other
            da, db = ms_a.digest(path), ms_b.digest(other)
            if da is not None and db is not None and da != db:
                differs = True
    if not paths:
        return None
    return ConflictFinding(pattern, (id_a, id_b), frozenset(paths), differs, not exact)


def _candidate_pairs(sets: list[tuple[str, ModuleSet]], case_insensitive: bool) -> list[tuple[int, int]]:
    """Index pairs sharing at least one (possibly case-folded) path, via a path -> owners map."""
    owners: dict[str, set[int]] = defaultdict(set)
    for i, (_, ms) in enumerate(sets):
        for path in ms:
            owners[path.lower() if case_insensitive else path].add(i)
    pairs = set()
    for group in owners.values():
        if len(group) > 1:
            pairs.update(combinations(sorted(group), 2))
    return sorted(pairs)


def detect_module_to_tpl(records: Iterable[PackageRecord], case_insensitive: bool = False) -> list[ConflictFinding]:
    """Findings for every pair of distinct projects that install a common module path."""
    recs = list(records)
    sets = [(r.node(), r.modules) for r in recs]
    out = []
    for i, j in _candidate_pairs(sets, case_insensitive):
        if recs[i].name.normalized == recs[j].name.normalized:
            continue
        found = _pair_finding(Pattern.ModuleToTPL, sets[i], sets[j], case_insensitive)
        if found is not None:
            out.append(found)
    return _sorted(out)


def detect_module_in_dep(graph: DependencyGraph, kb: KnowledgeBase, case_insensitive: bool = False) -> list[ConflictFinding]:
    sets = []
    for name, version in sorted(graph.nodes.items()):
        record = kb.get(name, version)
        if record is None:
            raise MissingRecord(node_id(name, version))
        sets.append((node_id(name, version), record.modules))
    out = []
    for i, j in _candidate_pairs(sets, case_insensitive):
        found = _pair_finding(Pattern.ModuleInDep, sets[i], sets[j], case_insensitive)
        if found is not None:
            out.append(found)
    return _sorted(out)


def latest_per_project(records: Iterable[PackageRecord]) -> list[PackageRecord]:
    best: dict[str, PackageRecord] = {}
    for r in records:
        cur = best.get(r.name.normalized)
        if cur is None or r.version > cur.version:
            best[r.name.normalized] = r
    return [best[k] for k in sorted(best)]


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------


@dataclass
class ConflictReport:
    findings: list[ConflictFinding] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    severity: dict[str, int] = field(default_factory=dict)
    top_paths: list[tuple[str, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "findings": [f.to_json() for f in self.findings],
            "summary": {
                "counts": dict(self.counts),
                "severity": dict(self.severity),
                "top_paths": [{"path": p, "packages": n} for p, n in self.top_paths],
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = []
        for f in self.findings:
            flags = []
            if f.content_differs:
                flags.append("content differs")
            if f.case_insensitive:
                flags.append("case-insensitive")
            if f.low_severity:
                flags.append("low")
            suffix = f" [{', '.join(flags)}]" if flags else ""
            lines.append(f"{f.pattern.value}: {' <-> '.join(f.subjects)}: {', '.join(sorted(f.paths))}{suffix}")
        lines.append("counts: " + ", ".join(f"{k}={v}" for k, v in self.counts.items()))
        lines.append("severity: " + ", ".join(f"{k}={v}" for k, v in self.severity.items()))
        for path, n in self.top_paths:
            lines.append(f"  {n:5d}  {path}")
        return "\n".join(lines) + "\n"


def summarize(findings: Iterable[ConflictFinding], top_n: int = 10) -> ConflictReport:
    """Counts per pattern, severity tallies and the most widely shared paths.

    A path's weight is the number of distinct packages involved in findings on
    that path, so a path shared by many packages ranks above one repeated in
    many pairs of the same few packages.
    """
    found = _sorted(findings)
    counts = {p.value: 0 for p in Pattern}
    severity = {"content_differs": 0, "same_content": 0, "low": 0}
    involved: dict[str, set[str]] = defaultdict(set)
    for f in found:
        counts[f.pattern.value] += 1
        if f.low_severity:
            severity["low"] += 1
        elif f.content_differs:
            severity["content_differs"] += 1
        else:
            severity["same_content"] += 1
        for path in f.paths:
            involved[path].update(s for s in f.subjects if "==" in s)
    ranked = sorted(((p, len(s)) for p, s in involved.items()), key=lambda x: (-x[1], x[0]))
    return ConflictReport(found, counts, severity, ranked[:top_n])
