"""Lazy readers for wheel, sdist and egg archives.

Archives are opened from bytes held in memory.  Listing entries only touches
headers; file bodies are read on demand, one entry at a time, and nothing is
ever written to disk.
"""

from __future__ import annotations

import enum
import io
import logging
import posixpath
import re
import tarfile
import zipfile
import zlib
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    CorruptArchive,
    NameVersionUnparseable,
    PathConflict,
    TruncatedArchive,
    UnknownDistribution,
)
from .tree import VirtualFileTree

log = logging.getLogger(__name__)


class DistributionKind(str, enum.Enum):
    Wheel = "wheel"
    SdistTarGz = "sdist-tar.gz"
    SdistZip = "sdist-zip"
    Egg = "egg"

    @property
    def is_sdist(self) -> bool:
        return self in (DistributionKind.SdistTarGz, DistributionKind.SdistZip)


_SUFFIXES = (
    (".whl", DistributionKind.Wheel),
    (".tar.gz", DistributionKind.SdistTarGz),
    (".zip", DistributionKind.SdistZip),
    (".egg", DistributionKind.Egg),
)

# lower index wins when several distributions exist for one release
KIND_PREFERENCE = {
    DistributionKind.Wheel: 0,
    DistributionKind.SdistTarGz: 1,
    DistributionKind.SdistZip: 2,
    DistributionKind.Egg: 3,
}

METADATA_FLAVORS = ("dist-info", "egg-info", "EGG-INFO")


def classify_distribution(filename: str) -> DistributionKind:
    name = Path(filename).name.lower()
    for suffix, kind in _SUFFIXES:
        if name.endswith(suffix):
            return kind
    raise UnknownDistribution(f"unrecognised distribution file {filename!r}")


@dataclass(frozen=True)
class ArchiveEntry:
    path: str
    size: int
    is_directory: bool


def _clean_path(raw: str) -> str | None:
    path = raw.replace("\\", "/")
    while path.startswith("./"):
        path = path[2:]
    path = path.strip("/")
    if not path or path == ".":
        return None
    if raw.startswith("/") or any(part == ".." for part in path.split("/")):
        return None
    return posixpath.normpath(path)


class PackageArchive:
    """Entry listing plus a selective reader over an in-memory archive."""

    def __init__(self, kind: DistributionKind, entries: list[ArchiveEntry], reader, filename: str = ""):
        self.kind = kind
        self.entries = entries
        self.filename = filename
        self._reader = reader
        self._by_path = {e.path: e for e in entries}
        self.warnings: list[str] = []

    def __contains__(self, path: str) -> bool:
        return path in self._by_path

    @property
    def files(self) -> list[ArchiveEntry]:
        return [e for e in self.entries if not e.is_directory]

    def read(self, path: str) -> bytes:
        entry = self._by_path.get(path)
        if entry is None or entry.is_directory:
            raise KeyError(path)
        data = self._reader(path, entry.size)
        if len(data) != entry.size:
            raise TruncatedArchive(f"{path}: expected {entry.size} bytes, got {len(data)}")
        return data

    def read_text(self, path: str) -> str:
        return self.read(path).decode("utf-8", errors="replace")

    def wrapper(self) -> str | None:
        """The single top-level directory of an sdist, if the archive has one."""
        if not self.kind.is_sdist:
            return None
        tops = {e.path.split("/", 1)[0] for e in self.entries}
        if len(tops) != 1:
            return None
        (top,) = tops
        if any(e.path == top and not e.is_directory for e in self.entries):
            return None
        return top


def _open_zip(data: bytes, kind: DistributionKind, filename: str) -> PackageArchive:
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        if data.startswith(b"PK\x03\x04"):
            raise TruncatedArchive(f"{filename or 'archive'}: {exc}") from None
        raise CorruptArchive(f"{filename or 'archive'}: {exc}") from None
    entries: list[ArchiveEntry] = []
    names: dict[str, str] = {}
    for info in zf.infolist():
        path = _clean_path(info.filename)
        if path is None:
            continue
        is_dir = info.is_dir()
        entries.append(ArchiveEntry(path, 0 if is_dir else info.file_size, is_dir))
        names[path] = info.filename

    def reader(path: str, size: int) -> bytes:
        try:
            with zf.open(names[path]) as fh:
                return fh.read(size + 1)
        except (zipfile.BadZipFile, zlib.error, EOFError) as exc:
            raise CorruptArchive(f"{path}: {exc}") from None

    return PackageArchive(kind, entries, reader, filename)


def _open_tar(data: bytes, kind: DistributionKind, filename: str) -> PackageArchive:
    try:
        tf = tarfile.open(fileobj=io.BytesIO(data), mode="r:gz")
        members = tf.getmembers()
    except (EOFError, zlib.error) as exc:
        raise TruncatedArchive(f"{filename or 'archive'}: {exc}") from None
    except tarfile.ReadError as exc:
        if data[:2] == b"\x1f\x8b" and "empty" not in str(exc):
            raise TruncatedArchive(f"{filename or 'archive'}: {exc}") from None
        raise CorruptArchive(f"{filename or 'archive'}: {exc}") from None
    except tarfile.TarError as exc:
        raise CorruptArchive(f"{filename or 'archive'}: {exc}") from None
    entries: list[ArchiveEntry] = []
    by_path: dict[str, tarfile.TarInfo] = {}
    for m in members:
        if not (m.isfile() or m.isdir()):
            continue
        path = _clean_path(m.name)
        if path is None:
            continue
        entries.append(ArchiveEntry(path, 0 if m.isdir() else m.size, m.isdir()))
        by_path[path] = m

    def reader(path: str, size: int) -> bytes:
        try:
            fh = tf.extractfile(by_path[path])
            return fh.read(size + 1) if fh else b""
        except (EOFError, zlib.error, tarfile.TarError, OSError) as exc:
            raise TruncatedArchive(f"{path}: {exc}") from None

    return PackageArchive(kind, entries, reader, filename)


def open_archive(data: bytes, kind: DistributionKind, filename: str = "") -> PackageArchive:
    if kind is DistributionKind.SdistTarGz:
        return _open_tar(data, kind, filename)
    return _open_zip(data, kind, filename)


def open_path(path: str | Path) -> PackageArchive:
    path = Path(path)
    kind = classify_distribution(path.name)
    return open_archive(path.read_bytes(), kind, path.name)


def locate_metadata_dir(archive: PackageArchive) -> tuple[str, str] | None:
    """Shallowest ``*.dist-info`` / ``*.egg-info`` / ``EGG-INFO`` directory."""
    dirs: set[str] = set()
    for entry in archive.entries:
        parts = entry.path.split("/")
        upto = len(parts) if entry.is_directory else len(parts) - 1
        for i in range(upto):
            dirs.add("/".join(parts[: i + 1]))
    found = []
    for d in dirs:
        base = d.rsplit("/", 1)[-1]
        if base.endswith(".dist-info"):
            found.append((d.count("/"), d, "dist-info"))
        elif base.endswith(".egg-info"):
            found.append((d.count("/"), d, "egg-info"))
        elif base == "EGG-INFO":
            found.append((d.count("/"), d, "EGG-INFO"))
    if not found:
        return None
    found.sort()
    if len(found) > 1:
        msg = f"multiple metadata directories, using {found[0][1]}: {[f[1] for f in found]}"
        archive.warnings.append(msg)
        log.warning(msg)
    return found[0][1], found[0][2]


def build_file_tree(archive: PackageArchive) -> VirtualFileTree:
    tree = VirtualFileTree(wrapper=archive.wrapper())
    dirs = set()
    for entry in archive.entries:
        if entry.is_directory:
            dirs.add(entry.path)
            continue
        tree.add_file(entry.path, source=entry.path)
    for d in dirs:
        node = tree.get(d)
        if node is not None and node.is_file:
            raise PathConflict(f"{d} is both a file and a directory")
        if node is None:
            tree.add_dir(d)
    return tree


_SDIST_NAME_RE = re.compile(r"^(?P<name>.+?)-(?P<version>\d[^-]*)$")


def parse_dist_filename(filename: str) -> tuple[str, str]:
    """``(name, version)`` encoded in a distribution filename."""
    base = Path(filename).name
    kind = classify_distribution(base)
    stem = base[: -len(next(s for s, k in _SUFFIXES if k is kind))]
    if kind in (DistributionKind.Wheel, DistributionKind.Egg):
        parts = stem.split("-")
        if len(parts) < 2 or not parts[0] or not parts[1][:1].isdigit():
            raise NameVersionUnparseable(f"cannot find name and version in {filename!r}")
        return parts[0], parts[1]
    m = _SDIST_NAME_RE.match(stem)
    if not m:
        raise NameVersionUnparseable(f"cannot find name and version in {filename!r}")
    return m.group("name"), m.group("version")
