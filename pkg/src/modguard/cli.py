"""``modguard`` command line.

Exit codes
----------
0   success (``scan``: no findings)
1   ``scan`` found conflicts
2   usage error, no module evidence (``extract``) or mismatched inputs (``compare``)
3   unsatisfiable requirements
4   a required project has no releases in the index
5   unreadable input (bad archive, requirement or file)
6   network failure
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .archive import open_path
from .conflicts import (
    ConflictFinding,
    StdlibCatalog,
    detect_module_in_dep,
    detect_module_to_lib,
    detect_module_to_tpl,
    latest_per_project,
    summarize,
)
from .errors import (
    IndexFormatError,
    MissingPackage,
    ModguardError,
    NetworkError,
    NoModuleEvidence,
    Unsat,
)
from .index import IndexStore, PackageRecord, fetch_remote, record_from_bytes
from .pep import ENV_VARIABLES, EnvironmentProfile, host_environment, parse_requirement
from .resolver import DependencyGraph, Level, Metric, compare_graphs, compare_sets, resolve
from .simulate import ModuleSet, extract_modules

log = logging.getLogger("modguard")

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_UNSAT, EXIT_MISSING, EXIT_INPUT, EXIT_NETWORK = range(7)


@dataclass
class CliConfig:
    index_dir: Path
    env: list[str] = field(default_factory=list)
    format: str = "json"
    jobs: int = 1
    case_insensitive: bool = False
    global_extras: bool = False

    def __post_init__(self) -> None:
        if self.jobs < 1:
            raise ValueError("--jobs must be at least 1")
        self.profile()

    def profile(self) -> EnvironmentProfile:
        overrides = {}
        for item in self.env:
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"--env expects key=value, got {item!r}")
            if key not in ENV_VARIABLES:
                raise ValueError(f"unknown environment variable {key!r}")
            overrides[key] = value
        return host_environment().with_overrides(overrides)

    def store(self) -> IndexStore:
        return IndexStore(self.index_dir)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def _fail(code: int, message: str) -> int:
    print(f"modguard: {message}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _record_summary(r: PackageRecord) -> dict:
    return {
        "name": r.name.normalized,
        "version": str(r.version),
        "kind": r.kind.value,
        "modules": len(r.modules),
        "incomplete": r.incomplete,
    }


def cmd_ingest(cfg: CliConfig, args) -> int:
    store = cfg.store()
    records = store.ingest_many(args.archives, jobs=cfg.jobs)
    if cfg.format == "json":
        print(_dumps([_record_summary(r) for r in records]))
    else:
        for r in records:
            flag = " (incomplete)" if r.incomplete else ""
            print(f"{r.name.normalized}=={r.version} [{r.kind.value}] {len(r.modules)} modules{flag}")
    return EXIT_OK


def cmd_fetch(cfg: CliConfig, args) -> int:
    store = cfg.store()
    total = {}
    for name in args.names:
        total[name] = fetch_remote(args.index_url, name, store)
    if cfg.format == "json":
        print(_dumps({"new_records": total}))
    else:
        for name, n in total.items():
            print(f"{name}: {n} new")
    return EXIT_OK


def _extract_one(path: str) -> ModuleSet:
    return extract_modules(open_path(path))


def _module_lines(ms: ModuleSet, digests: bool) -> list[str]:
    return [f"{p}  {d}" if digests else p for p, d in ms.entries.items()]


def _module_doc(ms: ModuleSet, digests: bool) -> dict:
    doc = ms.to_json(digests)
    doc["provenance"] = ms.provenance
    return doc


def cmd_extract(cfg: CliConfig, args) -> int:
    paths = args.archives
    try:
        if cfg.jobs > 1 and len(paths) > 1:
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                results = list(pool.map(_extract_one, paths))
        else:
            results = [_extract_one(p) for p in paths]
    except NoModuleEvidence as exc:
        return _fail(EXIT_USAGE, str(exc))
    if len(paths) == 1:
        ms = results[0]
        if cfg.format == "json":
            print(_dumps(_module_doc(ms, args.digests)))
        else:
            print("\n".join(_module_lines(ms, args.digests)))
        return EXIT_OK
    if cfg.format == "json":
        print(_dumps({Path(p).name: _module_doc(ms, args.digests) for p, ms in zip(paths, results)}))
    else:
        for p, ms in zip(paths, results):
            print(f"# {Path(p).name}")
            print("\n".join(_module_lines(ms, args.digests)))
    return EXIT_OK


def cmd_resolve(cfg: CliConfig, args) -> int:
    roots = [parse_requirement(r) for r in args.requirements]
    graph, stats = resolve(roots, cfg.profile(), cfg.store(), prioritized=not args.naive_order, global_extras=cfg.global_extras)
    if cfg.format == "json":
        doc = graph.to_json()
        doc["stats"] = stats.to_json()
        print(_dumps(doc))
    else:
        for node in sorted(graph.to_json()["nodes"]):
            print(node)
        for src, dst, label in sorted(graph.edges):
            print(f"  {src} -> {dst}  ({label})")
        print(f"backtracks: {stats.backtracks}, candidates tried: {stats.candidates_tried}")
    return EXIT_OK


def _records_for(targets: list[str], store: IndexStore) -> list[PackageRecord]:
    """Archives are analysed directly; other targets name index entries (``name`` or ``name==version``)."""
    out = []
    for t in targets:
        p = Path(t)
        if p.is_file():
            out.append(record_from_bytes(p.read_bytes(), p.name))
            continue
        req = parse_requirement(t)
        versions = [v for v in store.query_versions(req.name) if req.specifier.contains(v)]
        if not versions:
            raise MissingPackage(req.name.normalized)
        out.append(store.get(req.name, versions[0]))
    return out


def _scan_findings(cfg: CliConfig, kind: str, targets: list[str]) -> list[ConflictFinding]:
    store = cfg.store()
    if kind == "lib":
        catalog = StdlibCatalog.default()
        records = _records_for(targets, store) if targets else store.latest_records()
        findings = []
        for r in records:
            findings += detect_module_to_lib(r.modules, catalog, r.node(), cfg.case_insensitive)
        return findings
    if kind == "tpl":
        records = _records_for(targets, store) if targets else store.latest_records()
        return detect_module_to_tpl(latest_per_project(records), cfg.case_insensitive)
    roots = [parse_requirement(t) for t in targets]
    graph, _ = resolve(roots, cfg.profile(), store, global_extras=cfg.global_extras)
    return detect_module_in_dep(graph, store, cfg.case_insensitive)


def cmd_scan(cfg: CliConfig, args) -> int:
    if args.kind == "dep" and not args.targets:
        return _fail(EXIT_USAGE, "scan dep needs at least one requirement")
    report = summarize(_scan_findings(cfg, args.kind, args.targets), top_n=args.top)
    print(report.dumps() if cfg.format == "json" else report.to_text(), end="" if cfg.format == "text" else "\n")
    return EXIT_FINDINGS if report.findings else EXIT_OK


def _load_comparable(path: Path) -> tuple[str, object]:
    text = path.read_text()
    try:
        doc = json.loads(text)
    except ValueError:
        return "modules", {line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")}
    if isinstance(doc, dict) and "modules" in doc:
        return "modules", {m["path"] for m in doc["modules"]}
    if isinstance(doc, dict) and "nodes" in doc and "edges" in doc:
        return "graph", DependencyGraph.from_json(doc)
    if isinstance(doc, list) and all(isinstance(x, str) for x in doc):
        return "modules", set(doc)
    raise ValueError(f"{path}: neither a module listing nor a dependency graph")


def _compare_files(expected: Path, actual: Path, level: str) -> Metric:
    kind_e, exp = _load_comparable(expected)
    kind_a, act = _load_comparable(actual)
    if kind_e != kind_a:
        raise TypeError(f"cannot compare {kind_e} in {expected} with {kind_a} in {actual}")
    if kind_e == "graph":
        return compare_graphs(exp, act, level)
    return compare_sets(exp, act)


def cmd_compare(cfg: CliConfig, args) -> int:
    expected, actual = Path(args.expected), Path(args.actual)
    try:
        if expected.is_dir() and actual.is_dir():
            names = sorted(p.name for p in expected.iterdir() if p.is_file())
            results = {}
            for name in names:
                if not (actual / name).is_file():
                    results[name] = Metric.Error
                    continue
                results[name] = _compare_files(expected / name, actual / name, args.level)
            correct = sum(m is Metric.Correct for m in results.values())
            accuracy = correct / len(results) if results else 0.0
            if cfg.format == "json":
                print(_dumps({"results": {k: v.value for k, v in results.items()}, "correct": correct,
                              "total": len(results), "accuracy": round(accuracy, 4)}))
            else:
                for k, v in results.items():
                    print(f"{k}: {v.value}")
                print(f"accuracy: {correct}/{len(results)} = {accuracy:.2f}")
            return EXIT_OK
        if expected.is_dir() != actual.is_dir():
            return _fail(EXIT_USAGE, "compare needs two files or two directories")
        metric = _compare_files(expected, actual, args.level)
    except (TypeError, ValueError, KeyError) as exc:
        return _fail(EXIT_USAGE, str(exc))
    print(_dumps({"metric": metric.value}) if cfg.format == "json" else metric.value)
    return EXIT_OK


def cmd_report(cfg: CliConfig, args) -> int:
    from .plotting import plot_pattern_counts, plot_top_paths

    findings = _scan_findings(cfg, "lib", []) + _scan_findings(cfg, "tpl", [])
    if args.resolve:
        findings += _scan_findings(cfg, "dep", args.resolve)
    report = summarize(findings, top_n=args.top)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "findings.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pattern", "subject_a", "subject_b", "paths", "content_differs", "case_insensitive", "low_severity"])
        for f in report.findings:
            a, b = (f.subjects + ("",))[:2]
            writer.writerow([f.pattern.value, a, b, ";".join(sorted(f.paths)), f.content_differs, f.case_insensitive, f.low_severity])
    summary = report.to_json()["summary"]
    (out / "summary.json").write_text(_dumps(summary) + "\n")
    plot_pattern_counts(report, out / "pattern_counts.png")
    plot_top_paths(report, out / "top_paths.png")
    if cfg.format == "json":
        print(_dumps(summary))
    else:
        print(report.to_text(), end="")
    return EXIT_FINDINGS if report.findings else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    default_index = os.environ.get("MODGUARD_INDEX", ".modguard-index")
    common.add_argument("--index", default=default_index, help="index directory (default: $MODGUARD_INDEX)")
    common.add_argument("--env", action="append", default=[], metavar="KEY=VALUE", help="override an environment marker variable")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for ingest/extract")
    common.add_argument("--case-insensitive", action="store_true", help="compare module paths case-insensitively")
    common.add_argument("--global-extras", action="store_true", help="make requested extras visible to every package")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def _build() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = _common()
    parser = argparse.ArgumentParser(prog="modguard", description="Module conflict analysis for Python distributions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="add distribution files to the index")
    p.add_argument("archives", nargs="+")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fetch", parents=[common], help="download missing files from a simple index")
    p.add_argument("index_url")
    p.add_argument("names", nargs="+")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("extract", parents=[common], help="list post-install module paths of archives")
    p.add_argument("archives", nargs="+")
    p.add_argument("--digests", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("resolve", parents=[common], help="resolve requirements against the index")
    p.add_argument("requirements", nargs="+")
    p.add_argument("--naive-order", action="store_true", help="first-in-first-out instead of prioritized order")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("scan", parents=[common], help="detect module conflicts")
    p.add_argument("kind", choices=("lib", "tpl", "dep"))
    p.add_argument("targets", nargs="*", help="archives, index entries, or requirements for dep")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("compare", parents=[common], help="compare results with ground truth")
    p.add_argument("expected")
    p.add_argument("actual")
    p.add_argument("--level", choices=[lv.value for lv in Level], default=Level.Node.value)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", parents=[common], help="scan the whole index and write CSV, JSON and figures")
    p.add_argument("--out", default="modguard-report")
    p.add_argument("--resolve", nargs="*", default=[], metavar="REQ", help="also scan the graph of these requirements")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_report)
    return parser, dict(sub.choices)


def build_parser() -> argparse.ArgumentParser:
    return _build()[0]


def _parse(argv: list[str]) -> argparse.Namespace:
    parser, commands = _build()
    # options may sit between positionals (``scan tpl --top 3 a.whl b.whl``);
    # only the subcommand parsers can parse intermixed arguments
    if argv and argv[0] in commands:
        args = commands[argv[0]].parse_intermixed_args(argv[1:])
        args.command = argv[0]
        return args
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = _parse(list(sys.argv[1:] if argv is None else argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = CliConfig(Path(args.index), args.env, args.format, args.jobs, args.case_insensitive, args.global_extras)
    except (ValueError, ModguardError) as exc:
        return _fail(EXIT_USAGE, str(exc))
    try:
        return args.func(cfg, args)
    except Unsat as exc:
        return _fail(EXIT_UNSAT, str(exc))
    except MissingPackage as exc:
        return _fail(EXIT_MISSING, str(exc))
    except (NetworkError, IndexFormatError) as exc:
        return _fail(EXIT_NETWORK, str(exc))
    except NoModuleEvidence as exc:
        return _fail(EXIT_USAGE, str(exc))
    except (ModguardError, OSError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))


if __name__ == "__main__":
    sys.exit(main())
