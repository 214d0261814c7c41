"""Local knowledge base of ingested releases.

Each release is stored as one JSON document at ``index/{name}/{version}.json``
under the store directory.  A release may exist as several distribution
files; the record from the most preferred kind wins (wheel, then tar.gz
sdist, then zip sdist, then egg).
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import urllib.error
import urllib.parse
import urllib.request
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Iterable

from .archive import (
    KIND_PREFERENCE,
    DistributionKind,
    PackageArchive,
    classify_distribution,
    locate_metadata_dir,
    open_archive,
    parse_dist_filename,
)
from .config import CONFIG_FILES, merge_layers, parse_config_file
from .errors import (
    IndexFormatError,
    InvalidVersion,
    ModguardError,
    NameVersionUnparseable,
    NetworkError,
)
from .metadata import RawDependencyData, parse_metadata_core, parse_requires_txt
from .pep import ProjectName, Requirement, Version, normalize_name, parse_requirement, parse_version
from .simulate import ModuleSet, extract_modules, find_config_root

log = logging.getLogger(__name__)


@dataclass
class PackageRecord:
    name: ProjectName
    version: Version
    kind: DistributionKind
    modules: ModuleSet
    install: list[Requirement] = field(default_factory=list)
    extras: dict[str, list[Requirement]] = field(default_factory=dict)
    source_file: str = ""
    incomplete: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, Version]:
        return self.name.normalized, self.version

    def node(self) -> str:
        return f"{self.name.normalized}=={self.version}"

    def to_json(self) -> dict:
        return {
            "name": self.name.raw,
            "version": str(self.version),
            "kind": self.kind.value,
            "source_file": self.source_file,
            "incomplete": self.incomplete,
            "modules": self.modules.to_json()["modules"],
            "install": [str(r) for r in self.install],
            "extras": {e: [str(r) for r in reqs] for e, reqs in sorted(self.extras.items())},
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PackageRecord":
        return cls(
            name=normalize_name(doc["name"]),
            version=parse_version(doc["version"]),
            kind=DistributionKind(doc["kind"]),
            modules=ModuleSet.from_json({"modules": doc["modules"]}),
            install=[parse_requirement(r) for r in doc["install"]],
            extras={e: [parse_requirement(r) for r in reqs] for e, reqs in doc["extras"].items()},
            source_file=doc.get("source_file", ""),
            incomplete=doc.get("incomplete", False),
            warnings=list(doc.get("warnings", [])),
        )


# ---------------------------------------------------------------------------
# dependency extraction
# ---------------------------------------------------------------------------


def _metadata_dependencies(archive: PackageArchive) -> RawDependencyData | None:
    meta = locate_metadata_dir(archive)
    if meta is None:
        return None
    path, flavor = meta
    if flavor == "dist-info":
        target = f"{path}/METADATA"
        return parse_metadata_core(archive.read_text(target)) if target in archive else None
    requires = f"{path}/requires.txt"
    if requires in archive:
        return parse_requires_txt(archive.read_text(requires))
    pkg_info = f"{path}/PKG-INFO"
    if pkg_info in archive:
        return parse_metadata_core(archive.read_text(pkg_info))
    # setuptools omits requires.txt when there is nothing to require
    return RawDependencyData()


def _config_dependencies(archive: PackageArchive) -> RawDependencyData | None:
    root = find_config_root(archive)
    if root is None:
        return None
    layers = []
    for name in CONFIG_FILES:
        path = f"{root}/{name}" if root else name
        if path in archive:
            try:
                layers.append(parse_config_file(name, archive.read_text(path)))
            except ModguardError as exc:
                log.warning("%s: %s", path, exc)
    if not layers:
        return None
    _, deps = merge_layers(layers)
    if deps.unresolved:
        return None
    return deps


def extract_dependencies(archive: PackageArchive) -> RawDependencyData:
    """Install and extra requirements: metadata files first, then configuration, then ``PKG-INFO``."""
    found = _metadata_dependencies(archive)
    if found is not None:
        return found
    found = _config_dependencies(archive)
    if found is not None:
        return found
    wrapper = archive.wrapper()
    pkg_info = f"{wrapper}/PKG-INFO" if wrapper else "PKG-INFO"
    if pkg_info in archive:
        return parse_metadata_core(archive.read_text(pkg_info))
    return RawDependencyData()


def _identity(filename: str) -> tuple[ProjectName, Version]:
    raw_name, raw_version = parse_dist_filename(filename)
    try:
        return normalize_name(raw_name), parse_version(raw_version)
    except (InvalidVersion, ModguardError) as exc:
        raise NameVersionUnparseable(f"{filename}: {exc}") from None


def record_from_bytes(data: bytes, filename: str) -> PackageRecord:
    """Build a record for one distribution file without touching any store."""
    name, version = _identity(filename)
    kind = classify_distribution(filename)
    warnings: list[str] = []
    incomplete = False
    try:
        archive = open_archive(data, kind, filename)
        modules = extract_modules(archive, name, version)
        warnings.extend(modules.warnings)
        deps = extract_dependencies(archive)
        warnings.extend(deps.warnings)
    except ModguardError as exc:
        warnings.append(f"{type(exc).__name__}: {exc}")
        modules, deps, incomplete = ModuleSet(), RawDependencyData(), True
    return PackageRecord(
        name=name,
        version=version,
        kind=kind,
        modules=modules,
        install=list(deps.install),
        extras={e: list(reqs) for e, reqs in deps.extras.items()},
        source_file=Path(filename).name,
        incomplete=incomplete,
        warnings=warnings,
    )


def _record_from_path(path: str) -> PackageRecord:
    p = Path(path)
    return record_from_bytes(p.read_bytes(), p.name)


# ---------------------------------------------------------------------------
# store
# ---------------------------------------------------------------------------


class IndexStore:
    """Name -> version-sorted records, persisted as JSON when ``root`` is set."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._records: dict[str, dict[Version, PackageRecord]] = {}
        self._seen: dict[str, set[str]] = {}
        self._loaded: set[str] = set()
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock(self, name: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(name, threading.Lock())

    def _dir(self, name: str) -> Path:
        assert self.root is not None
        return self.root / "index" / name

    def _load(self, name: str) -> None:
        if name in self._loaded:
            return
        self._loaded.add(name)
        records = self._records.setdefault(name, {})
        seen = self._seen.setdefault(name, set())
        if self.root is None:
            return
        d = self._dir(name)
        if not d.is_dir():
            return
        for f in sorted(d.glob("*.json")):
            if f.name == "_files.json":
                seen.update(json.loads(f.read_text()))
                continue
            rec = PackageRecord.from_json(json.loads(f.read_text()))
            records[rec.version] = rec

    def _persist(self, name: str, record: PackageRecord | None, version: Version) -> None:
        if self.root is None:
            return
        d = self._dir(name)
        d.mkdir(parents=True, exist_ok=True)
        path = d / f"{version}.json"
        if record is None:
            path.unlink(missing_ok=True)
        else:
            path.write_text(json.dumps(record.to_json(), indent=2, sort_keys=True) + "\n")
        (d / "_files.json").write_text(json.dumps(sorted(self._seen.get(name, ())), indent=2) + "\n")

    # -- writes ------------------------------------------------------------

    def put(self, record: PackageRecord) -> PackageRecord:
        """Store ``record`` unless a more preferred distribution of the release is already held."""
        name = record.name.normalized
        with self._lock(name):
            self._load(name)
            self._seen[name].add(record.source_file)
            current = self._records[name].get(record.version)
            keep = record
            if current is not None and KIND_PREFERENCE[current.kind] < KIND_PREFERENCE[record.kind]:
                keep = current
            self._records[name][record.version] = keep
            self._persist(name, keep, record.version)
            return keep

    def ingest_bytes(self, data: bytes, filename: str) -> PackageRecord:
        return self.put(record_from_bytes(data, filename))

    def ingest(self, archive_path: str | Path) -> PackageRecord:
        return self.put(_record_from_path(str(archive_path)))

    def ingest_many(self, paths: Iterable[str | Path], jobs: int = 1) -> list[PackageRecord]:
        """Extract in ``jobs`` worker processes; records are written here, one at a time."""
        paths = [str(p) for p in paths]
        if jobs <= 1 or len(paths) < 2:
            built = [_record_from_path(p) for p in paths]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                built = list(pool.map(_record_from_path, paths, chunksize=8))
        return [self.put(r) for r in built]

    def delete(self, name: ProjectName | str, version: Version | str) -> bool:
        key = _norm(name)
        v = version if isinstance(version, Version) else parse_version(version)
        with self._lock(key):
            self._load(key)
            removed = self._records[key].pop(v, None)
            if removed is None:
                return False
            self._persist(key, None, v)
            return True

    # -- reads -------------------------------------------------------------

    def query_versions(self, name: ProjectName | str) -> list[Version]:
        key = _norm(name)
        self._load(key)
        return sorted(self._records.get(key, {}), reverse=True)

    def get(self, name: ProjectName | str, version: Version | str) -> PackageRecord | None:
        key = _norm(name)
        self._load(key)
        v = version if isinstance(version, Version) else parse_version(version)
        return self._records.get(key, {}).get(v)

    def latest(self, name: ProjectName | str) -> PackageRecord | None:
        versions = self.query_versions(name)
        return self.get(name, versions[0]) if versions else None

    def seen_files(self, name: ProjectName | str) -> set[str]:
        key = _norm(name)
        self._load(key)
        return set(self._seen.get(key, ()))

    def names(self) -> list[str]:
        found = set(k for k, v in self._records.items() if v)
        if self.root is not None and (self.root / "index").is_dir():
            found.update(p.name for p in (self.root / "index").iterdir() if p.is_dir())
        return sorted(n for n in found if self.query_versions(n))

    def records(self) -> list[PackageRecord]:
        out = []
        for name in self.names():
            for v in self.query_versions(name):
                out.append(self.get(name, v))
        return out

    def latest_records(self) -> list[PackageRecord]:
        return [self.latest(n) for n in self.names()]


def _norm(name: ProjectName | str) -> str:
    return name.normalized if isinstance(name, ProjectName) else normalize_name(name).normalized


# ---------------------------------------------------------------------------
# remote simple-repository index
# ---------------------------------------------------------------------------

Fetcher = Callable[[str, dict], tuple[int, str, bytes]]


def _urllib_fetch(url: str, headers: dict) -> tuple[int, str, bytes]:
    req = urllib.request.Request(url, headers=headers)
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            return resp.status, resp.headers.get("Content-Type", ""), resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.headers.get("Content-Type", "") if exc.headers else "", b""
    except (urllib.error.URLError, OSError) as exc:
        raise NetworkError(f"{url}: {exc}") from None


class _AnchorParser(HTMLParser):
    def __init__(self):
        super().__init__()
        self.links: list[tuple[str, str]] = []
        self._href: str | None = None
        self._text: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            self._href = dict(attrs).get("href")
            self._text = []

    def handle_data(self, data):
        if self._href is not None:
            self._text.append(data)

    def handle_endtag(self, tag):
        if tag == "a" and self._href is not None:
            self.links.append(("".join(self._text).strip(), self._href))
            self._href = None


def parse_simple_listing(body: bytes, content_type: str, base_url: str) -> list[tuple[str, str, str | None]]:
    """``(filename, absolute url, sha256 or None)`` for each file in a project page."""
    out = []
    if "json" in content_type:
        try:
            doc = json.loads(body)
            files = doc["files"]
            for f in files:
                sha = (f.get("hashes") or {}).get("sha256")
                out.append((f["filename"], urllib.parse.urljoin(base_url, f["url"]), sha))
        except (ValueError, KeyError, TypeError) as exc:
            raise IndexFormatError(f"{base_url}: bad JSON listing ({exc})") from None
        return out
    text = body.decode("utf-8", errors="replace")
    if "<" not in text and text.strip():
        raise IndexFormatError(f"{base_url}: listing is neither HTML nor JSON")
    parser = _AnchorParser()
    parser.feed(text)
    for label, href in parser.links:
        if not href:
            continue
        url, _, frag = href.partition("#")
        sha = frag[len("sha256="):] if frag.startswith("sha256=") else None
        filename = label or urllib.parse.unquote(url.rsplit("/", 1)[-1])
        out.append((filename, urllib.parse.urljoin(base_url, url), sha))
    return out


def fetch_remote(index_url: str, name: ProjectName | str, store: IndexStore, fetcher: Fetcher | None = None) -> int:
    """Download and ingest files of ``name`` not yet in ``store``; returns how many were new."""
    fetch = fetcher or _urllib_fetch
    project = _norm(name)
    page = index_url.rstrip("/") + f"/{project}/"
    status, ctype, body = fetch(page, {"Accept": "application/vnd.pypi.simple.v1+json, text/html;q=0.5"})
    if status == 404:
        log.warning("%s: project not found on index", project)
        return 0
    if status != 200:
        raise NetworkError(f"{page}: HTTP {status}")
    seen = store.seen_files(project)
    added = 0
    for filename, url, sha in parse_simple_listing(body, ctype, page):
        try:
            classify_distribution(filename)
        except ModguardError:
            continue
        if filename in seen:
            continue
        status, _, data = fetch(url, {})
        if status != 200:
            raise NetworkError(f"{url}: HTTP {status}")
        if sha and hashlib.sha256(data).hexdigest() != sha:
            log.warning("%s: sha256 mismatch, skipped", filename)
            continue
        try:
            store.ingest_bytes(data, filename)
        except NameVersionUnparseable as exc:
            log.warning("%s", exc)
            continue
        added += 1
    return added


def json_api_dependencies(
    name: ProjectName | str,
    version: Version | str,
    base_url: str = "https://pypi.org/pypi",
    fetcher: Fetcher | None = None,
) -> RawDependencyData:
    """Maintainer-declared ``requires_dist`` from a warehouse-style JSON API."""
    fetch = fetcher or _urllib_fetch
    url = f"{base_url.rstrip('/')}/{_norm(name)}/{version}/json"
    status, _, body = fetch(url, {"Accept": "application/json"})
    if status != 200:
        raise NetworkError(f"{url}: HTTP {status}")
    try:
        requires = json.loads(body)["info"].get("requires_dist") or []
    except (ValueError, KeyError, TypeError) as exc:
        raise IndexFormatError(f"{url}: {exc}") from None
    content = "".join(f"Requires-Dist: {r}\n" for r in requires)
    return parse_metadata_core(content)
