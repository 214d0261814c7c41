"""Installation-free module simulation.

Module-shaping configuration is replayed on a :class:`VirtualFileTree` of
the archive: ``package_dir`` renames directories, ``packages`` and
``py_modules`` prune everything not installed, and ``namespace_packages``
strips ``__init__.py`` files and adds the ``-nspkg.pth`` shim.  A depth-first
walk of the resulting tree yields the post-install module paths.
"""

from __future__ import annotations

import fnmatch
import hashlib
import logging
import re
from typing import Iterable, Iterator, Mapping

from .archive import DistributionKind, PackageArchive, build_file_tree, locate_metadata_dir, parse_dist_filename
from .config import CONFIG_FILES, merge_layers, parse_config_file
from .errors import ModguardError, NoModuleEvidence
from .metadata import (
    FindPackages,
    Provenance,
    RawModuleData,
    parse_namespace_packages,
    parse_record,
    parse_sources,
    parse_top_level,
)
from .pep import ProjectName, Version, normalize_name, parse_version
from .tree import FileNode, VirtualFileTree

log = logging.getLogger(__name__)

MODULE_SUFFIXES = (".py", ".pth")


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


class ModuleSet:
    """Post-install module paths with content digests (path -> digest)."""

    def __init__(
        self,
        entries: Mapping[str, str | None] | Iterable[str] = (),
        provenance: str | None = None,
        warnings: Iterable[str] = (),
    ):
        if isinstance(entries, Mapping):
            self.entries: dict[str, str | None] = dict(sorted(entries.items()))
        else:
            self.entries = {p: None for p in sorted(entries)}
        for path in self.entries:
            if path.startswith("/") or ".." in path.split("/") or "\\" in path:
                raise ValueError(f"bad module path {path!r}")
        self.provenance = provenance
        self.warnings = list(warnings)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, path: object) -> bool:
        return path in self.entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModuleSet):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(tuple(self.entries.items()))

    def __repr__(self) -> str:
        return f"ModuleSet({sorted(self.entries)!r})"

    @property
    def paths(self) -> set[str]:
        return set(self.entries)

    def digest(self, path: str) -> str | None:
        return self.entries.get(path)

    def py_paths(self) -> set[str]:
        return {p for p in self.entries if p.endswith(".py")}

    def to_json(self, digests: bool = True) -> dict:
        if digests:
            return {"modules": [{"path": p, "digest": d} for p, d in self.entries.items()]}
        return {"modules": [{"path": p} for p in self.entries]}

    @classmethod
    def from_json(cls, doc: dict) -> "ModuleSet":
        items = doc["modules"]
        return cls({i["path"]: i.get("digest") for i in items})


# ---------------------------------------------------------------------------
# tree operations
# ---------------------------------------------------------------------------


def _dotted_path(name: str) -> str:
    return "/".join(p for p in name.split(".") if p)


def _find_dir_bfs(tree: VirtualFileTree, target: str) -> str | None:
    target = target.strip("/")
    if not target or target == ".":
        return ""
    node = tree.get(target)
    if node is not None and node.is_dir():
        return target
    for path, _ in tree.iter_dirs_bfs():
        if path == target or path.endswith("/" + target):
            return path
    return None


def apply_package_dir(
    tree: VirtualFileTree,
    package_dir: Mapping[str, str],
    config_root: str = "",
    warnings: list[str] | None = None,
) -> VirtualFileTree:
    """Rename each pre-install directory in ``package_dir`` to its post-install name.

    ``config_root`` is the directory holding the configuration file; the
    returned tree is rooted there.
    """
    work = tree.subtree(config_root) if config_root else tree.copy()
    work.wrapper = None
    # parents before children so nested mappings land inside already-renamed dirs
    for post, pre in sorted(package_dir.items(), key=lambda kv: (kv[0].count(".") if kv[0] else -1, kv[0])):
        found = _find_dir_bfs(work, pre)
        if found is None:
            msg = f"package_dir target {pre!r} for {post!r} not found"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        dest = _dotted_path(post)
        if found == dest:
            continue
        if found == "":
            continue
        node = work.remove(found)
        if dest == "":
            for name, child in list(node.children.items()):
                work.attach(name, child)
        else:
            work.attach(dest, node)
    return work


_FIND_DEFAULT_EXCLUDE = ("ez_setup", "*__pycache__")


def find_packages(tree: VirtualFileTree, spec: FindPackages) -> list[str]:
    """Dotted package names ``spec`` selects, mirroring setuptools' package finder."""
    base = spec.where.strip("/")
    if base in (".", ""):
        base = ""
    start = tree.get(base) if base else tree.root
    if start is None or start.is_file:
        return []
    exclude = tuple(spec.exclude) + _FIND_DEFAULT_EXCLUDE
    found: list[str] = []

    def matches(name: str, patterns: Iterable[str]) -> bool:
        return any(fnmatch.fnmatchcase(name, p) for p in patterns)

    def walk(node: FileNode, prefix: str) -> None:
        for name in sorted(node.children):
            child = node.children[name]
            if child.is_file or "." in name:
                continue
            package = f"{prefix}.{name}" if prefix else name
            if not spec.namespace and not _has_init(child):
                continue
            if matches(package, spec.include) and not matches(package, exclude):
                found.append(package)
            if f"{package}*" in exclude or f"{package}.*" in exclude:
                continue
            walk(child, package)

    walk(start, "")
    return found


def _has_init(node: FileNode) -> bool:
    init = node.children.get("__init__.py")
    return init is not None and init.is_file


def prune_to_packages(
    tree: VirtualFileTree,
    packages: Iterable[str],
    py_modules: Iterable[str],
    warnings: list[str] | None = None,
) -> VirtualFileTree:
    """Keep only the direct files of listed packages plus listed top-level modules."""
    out = VirtualFileTree()
    for package in packages:
        path = _dotted_path(package)
        node = tree.get(path) if path else tree.root
        if node is None or node.is_file:
            msg = f"package {package!r} not found"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        for name, child in node.children.items():
            if child.is_file:
                out.attach(f"{path}/{name}" if path else name, FileNode(name, True, digest=child.digest, source=child.source))
        if path:
            out.add_dir(path)
    for module in py_modules:
        path = _dotted_path(module) + ".py"
        node = tree.get(path)
        if node is None or not node.is_file:
            msg = f"py_module {module!r} not found"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        out.attach(path, FileNode(path.rsplit("/", 1)[-1], True, digest=node.digest, source=node.source))
    return out


def nspkg_filename(project: ProjectName | str, version: Version | str) -> str:
    raw = project.raw if isinstance(project, ProjectName) else project
    safe = re.sub(r"[^A-Za-z0-9.]+", "_", raw)
    return f"{safe}-{version}-py3-nspkg.pth"


def _nspkg_digest(namespaces: Iterable[str]) -> str:
    return digest_bytes(("nspkg:" + ",".join(sorted(namespaces))).encode())


def apply_namespace_packages(
    tree: VirtualFileTree,
    namespace_packages: Iterable[str],
    project: ProjectName | str,
    version: Version | str,
) -> VirtualFileTree:
    namespaces = list(namespace_packages)
    if not namespaces:
        return tree
    out = tree.copy()
    for ns in namespaces:
        out.remove(_dotted_path(ns) + "/__init__.py")
    out.add_file(nspkg_filename(project, version), source=None, digest=_nspkg_digest(namespaces))
    return out


def enumerate_modules(tree: VirtualFileTree) -> ModuleSet:
    return ModuleSet({path: leaf.digest for path, leaf in tree.iter_files() if path.endswith(MODULE_SUFFIXES)})


def top_level_names(ms: ModuleSet | Iterable[str]) -> set[str]:
    names = set()
    for path in ms:
        if not path.endswith(".py"):
            continue
        first = path.split("/", 1)[0]
        names.add(first[:-3] if first.endswith(".py") else first)
    return names


# ---------------------------------------------------------------------------
# archive dispatch
# ---------------------------------------------------------------------------


def find_config_root(archive: PackageArchive) -> str | None:
    """Shallowest directory containing a configuration file."""
    best: tuple[int, str] | None = None
    for entry in archive.files:
        parent, _, name = entry.path.rpartition("/")
        if name in CONFIG_FILES:
            key = (parent.count("/") + (1 if parent else 0), parent)
            if best is None or key < best:
                best = key
    return None if best is None else best[1]


def _join(root: str, path: str) -> str:
    return f"{root}/{path}" if root else path


def _project_identity(archive: PackageArchive, project, version) -> tuple[ProjectName | str, Version | str]:
    if project is not None and version is not None:
        return project, version
    try:
        name, ver = parse_dist_filename(archive.filename)
        return project or normalize_name(name), version or parse_version(ver)
    except (ModguardError, ValueError):
        pass
    wrapper = archive.wrapper()
    if wrapper and "-" in wrapper:
        name, _, ver = wrapper.rpartition("-")
        return project or name, version or ver
    return project or "UNKNOWN", version or "0"


def _fill_digests(ms_paths: dict[str, str | None], archive: PackageArchive, warnings: list[str]) -> dict[str, str | None]:
    """Replace archive source paths with content digests, dropping unreadable entries."""
    out: dict[str, str | None] = {}
    for path, source in ms_paths.items():
        if source is None:
            continue
        if source.startswith("sha256:"):
            out[path] = source
            continue
        try:
            out[path] = digest_bytes(archive.read(source))
        except KeyError:
            warnings.append(f"{source} listed but not present in archive")
    return out


def _from_record(archive: PackageArchive, meta_dir: str, warnings: list[str]) -> ModuleSet | None:
    record_path = f"{meta_dir}/RECORD"
    if record_path not in archive:
        return None
    content = archive.read_text(record_path)
    installed = parse_record(content)
    sources = _record_sources(content)
    mapping = {p: sources.get(p, p) for p in installed}
    return ModuleSet(_fill_digests(mapping, archive, warnings), Provenance.Record.value, warnings)


def _record_sources(content: str) -> dict[str, str]:
    """Installed path -> archive path for ``.data/purelib`` style entries."""
    out = {}
    for line in content.splitlines():
        path = line.split(",", 1)[0].strip().strip('"')
        m = re.match(r"^[^/]+\.data/(?:purelib|platlib)/(.+)$", path)
        if m:
            out[m.group(1)] = path
    return out


def modules_from_sources(
    sources: Iterable[str],
    top_level: Iterable[str],
    namespace_packages: Iterable[str] = (),
) -> dict[str, str]:
    """Installed path -> source path, reconstructed from ``SOURCES.txt`` and ``top_level.txt``.

    Paths are taken relative to the directory that holds the ``.egg-info``
    directory (the package root for src layouts).
    """
    sources = list(sources)
    tops = set(top_level)
    prefix = ""
    for s in sources:
        parts = s.split("/")
        for i, part in enumerate(parts[:-1]):
            if part.endswith(".egg-info"):
                prefix = "/".join(parts[:i])
                break
        if prefix:
            break
    out: dict[str, str] = {}
    for s in sources:
        if not s.endswith(".py"):
            continue
        if prefix:
            if not s.startswith(prefix + "/"):
                continue
            rel = s[len(prefix) + 1 :]
        else:
            rel = s
        first = rel.split("/", 1)[0]
        if "/" in rel and first in tops:
            out[rel] = s
        elif "/" not in rel and rel[:-3] in tops:
            out[rel] = s
    for ns in namespace_packages:
        out.pop(_dotted_path(ns) + "/__init__.py", None)
    return out


def _from_sources(
    archive: PackageArchive, meta_dir: str, project, version, warnings: list[str]
) -> ModuleSet | None:
    sources_path = f"{meta_dir}/SOURCES.txt"
    top_path = f"{meta_dir}/top_level.txt"
    if sources_path not in archive or top_path not in archive:
        return None
    sources = parse_sources(archive.read_text(sources_path))
    tops = parse_top_level(archive.read_text(top_path))
    ns_path = f"{meta_dir}/namespace_packages.txt"
    namespaces = parse_namespace_packages(archive.read_text(ns_path)) if ns_path in archive else []
    rebuilt = modules_from_sources(sources, tops, namespaces)
    covered = top_level_names(rebuilt)
    missing = [t for t in tops if t not in covered and t not in namespaces]
    if missing:
        warnings.append(f"top-level names {missing} have no sources; layout was remapped at build time")
        return None

    # eggs already hold the installed layout; sdists hold sources under the wrapper
    if archive.kind is DistributionKind.Egg:
        mapping: dict[str, str | None] = {installed: installed for installed in rebuilt}
    else:
        root = archive.wrapper() or ""
        mapping = {installed: _join(root, src) for installed, src in rebuilt.items()}
    entries = _fill_digests(mapping, archive, warnings)
    if namespaces:
        entries[nspkg_filename(project, version)] = _nspkg_digest(namespaces)
    return ModuleSet(entries, Provenance.TopLevelPlusSources.value, warnings)


def raw_module_data(archive: PackageArchive, root: str, warnings: list[str]) -> RawModuleData | None:
    layers = []
    for name in CONFIG_FILES:
        path = _join(root, name)
        if path not in archive:
            continue
        try:
            layers.append(parse_config_file(name, archive.read_text(path)))
        except ModguardError as exc:
            warnings.append(f"{name}: {exc}")
    if not layers:
        return None
    modules, _ = merge_layers(layers)
    return modules


_METADATA_FILES = {"PKG-INFO", "setup.py", "setup.cfg", "pyproject.toml"}


def simulate_tree(
    tree: VirtualFileTree,
    raw: RawModuleData,
    project: ProjectName | str,
    version: Version | str,
    config_root: str = "",
    warnings: list[str] | None = None,
) -> VirtualFileTree:
    """Apply ``raw`` to ``tree`` and return the post-install tree rooted at ``config_root``."""
    warnings = warnings if warnings is not None else []
    base = tree.subtree(config_root) if config_root else tree.copy()
    if "packages" in raw.unresolved or "py_modules" in raw.unresolved:
        warnings.append("packages/py_modules not statically resolvable; keeping the raw tree")
    explicit = {"packages", "py_modules"} & (raw.present - raw.unresolved)

    # find_packages runs against the pre-install layout, relative to its where=
    packages: list[str] = []
    for item in raw.packages:
        if isinstance(item, FindPackages):
            packages.extend(p for p in find_packages(base, item) if p not in packages)
        elif item not in packages:
            packages.append(item)

    work = apply_package_dir(base, raw.package_dir, "", warnings)
    if explicit:
        work = prune_to_packages(work, packages, raw.py_modules, warnings)
    else:
        for name in list(work.root.children):
            child = work.root.children[name]
            if (child.is_file and name in _METADATA_FILES) or name.endswith((".egg-info", ".dist-info")):
                del work.root.children[name]
    return apply_namespace_packages(work, raw.namespace_packages, project, version)


def simulate(
    tree: VirtualFileTree,
    raw: RawModuleData,
    project: ProjectName | str,
    version: Version | str,
    config_root: str = "",
    warnings: list[str] | None = None,
) -> ModuleSet:
    return enumerate_modules(simulate_tree(tree, raw, project, version, config_root, warnings))


def extract_modules(archive: PackageArchive, project=None, version=None) -> ModuleSet:
    """Post-install module set of ``archive``.

    Evidence is used in order: wheel ``RECORD``, then ``top_level.txt`` +
    ``SOURCES.txt`` metadata, then configuration files with full simulation.
    """
    warnings: list[str] = list(archive.warnings)
    project, version = _project_identity(archive, project, version)
    meta = locate_metadata_dir(archive)
    warnings.extend(w for w in archive.warnings if w not in warnings)

    if meta is not None and meta[1] == "dist-info":
        found = _from_record(archive, meta[0], warnings)
        if found is not None:
            return found
        if archive.kind is DistributionKind.Wheel:
            tree = build_file_tree(archive)
            tree.remove(meta[0])
            ms = enumerate_modules(tree)
            entries = _fill_digests({p: p for p in ms}, archive, warnings)
            return ModuleSet(entries, "wheel-tree", warnings)

    if meta is not None and meta[1] in ("egg-info", "EGG-INFO"):
        found = _from_sources(archive, meta[0], project, version, warnings)
        if found is not None:
            return found

    root = find_config_root(archive)
    if root is not None:
        raw = raw_module_data(archive, root, warnings)
        if raw is not None:
            final = simulate_tree(build_file_tree(archive), raw, project, version, root, warnings)
            mapping = {
                path: leaf.digest or leaf.source
                for path, leaf in final.iter_files()
                if path.endswith(MODULE_SUFFIXES)
            }
            entries = _fill_digests(mapping, archive, warnings)
            return ModuleSet(entries, (raw.provenance or Provenance.ConfigScript).value, warnings)

    if archive.kind is DistributionKind.Egg and meta is not None:
        tree = build_file_tree(archive)
        tree.remove(meta[0])
        ms = enumerate_modules(tree)
        return ModuleSet(_fill_digests({p: p for p in ms}, archive, warnings), "egg-tree", warnings)

    raise NoModuleEvidence(f"{archive.filename or 'archive'}: no RECORD, metadata or configuration files")
