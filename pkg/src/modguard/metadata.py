"""Parsers for the metadata files shipped inside distributions.

Covers ``RECORD``, ``top_level.txt``, ``SOURCES.txt``,
``namespace_packages.txt``, ``requires.txt`` and ``METADATA``/``PKG-INFO``.
Module-shaping data and dependency data are returned as plain value objects
shared with :mod:`modguard.config`.
"""

from __future__ import annotations

import csv
import enum
import logging
import re
from dataclasses import dataclass, field

from .errors import InvalidRequirement, MalformedRecordLine
from .pep import Requirement, canonical_name, parse_marker, parse_requirement, strip_extra

log = logging.getLogger(__name__)


class Provenance(str, enum.Enum):
    Record = "record"
    TopLevelPlusSources = "top_level+sources"
    ConfigScript = "setup.py"
    ConfigCfg = "setup.cfg"
    ConfigToml = "pyproject.toml"


@dataclass(frozen=True)
class FindPackages:
    """Stand-in for a ``find_packages()``/``find_namespace_packages()`` call."""

    where: str = "."
    include: tuple[str, ...] = ("*",)
    exclude: tuple[str, ...] = ()
    namespace: bool = False


class _Unresolvable:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unresolvable"


#: marker for a keyword whose value static analysis could not determine
Unresolvable = _Unresolvable()


@dataclass
class RawModuleData:
    py_modules: list[str] = field(default_factory=list)
    packages: list[str | FindPackages] = field(default_factory=list)
    package_dir: dict[str, str] = field(default_factory=dict)
    namespace_packages: list[str] = field(default_factory=list)
    provenance: Provenance | None = None
    # keywords that were present but not statically resolvable
    unresolved: set[str] = field(default_factory=set)
    # keywords that were explicitly given (even if empty)
    present: set[str] = field(default_factory=set)

    def is_empty(self) -> bool:
        return not (self.py_modules or self.packages or self.package_dir or self.namespace_packages)


@dataclass
class RawDependencyData:
    install: list[Requirement] = field(default_factory=list)
    extras: dict[str, list[Requirement]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    unresolved: set[str] = field(default_factory=set)
    present: set[str] = field(default_factory=set)

    def add(self, req: Requirement, extra: str | None = None) -> None:
        bucket = self.install if extra is None else self.extras.setdefault(canonical_name(extra), [])
        text = str(req)
        if all(str(r) != text for r in bucket):
            bucket.append(req)

    def is_empty(self) -> bool:
        return not self.install and not self.extras


# ---------------------------------------------------------------------------
# Module data
# ---------------------------------------------------------------------------

_DATA_PURELIB = re.compile(r"^[^/]+\.data/(?:purelib|platlib)/(.+)$")


def _is_module_path(path: str) -> bool:
    return path.endswith(".py") or path.endswith(".pth")


def parse_record(content: str) -> list[str]:
    """Installed module paths listed in a wheel ``RECORD``.

    Files under ``*.data/purelib`` or ``platlib`` are mapped to the install
    root; other ``.data`` categories and ``*.dist-info`` are skipped.
    """
    paths: list[str] = []
    lines = content.splitlines()
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < 3:
            raise MalformedRecordLine(lineno, lines[lineno - 1] if lineno <= len(lines) else ",".join(row))
        path = row[0].strip().replace("\\", "/")
        if path.startswith("/") or ".." in path.split("/"):
            continue
        first = path.split("/", 1)[0]
        if first.endswith(".dist-info"):
            continue
        m = _DATA_PURELIB.match(path)
        if m:
            path = m.group(1)
        elif first.endswith(".data"):
            continue
        if _is_module_path(path) and path not in paths:
            paths.append(path)
    return paths


def _lines(content: str) -> list[str]:
    return [line.strip() for line in content.splitlines() if line.strip()]


def parse_top_level(content: str) -> list[str]:
    return _lines(content)


def parse_sources(content: str) -> list[str]:
    return [line.replace("\\", "/") for line in _lines(content)]


def parse_namespace_packages(content: str) -> list[str]:
    return _lines(content)


# ---------------------------------------------------------------------------
# Dependency data
# ---------------------------------------------------------------------------

_SECTION_RE = re.compile(r"^\[(?P<extra>[^:\]]*)(?::(?P<marker>.*))?\]$")


def parse_requires_txt(content: str, strict: bool = False) -> RawDependencyData:
    data = RawDependencyData()
    extra: str | None = None
    section_marker = None
    section = ""
    for lineno, raw in enumerate(content.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = line
            extra = m.group("extra").strip() or None
            marker_text = (m.group("marker") or "").strip()
            try:
                section_marker = parse_marker(marker_text) if marker_text else None
            except ValueError as exc:
                if strict:
                    raise InvalidRequirement(str(exc), context=f"requires.txt section {section}") from None
                data.warnings.append(f"requires.txt:{lineno}: bad section marker {marker_text!r}")
                section_marker = None
            if extra is not None:
                data.extras.setdefault(canonical_name(extra), [])
            continue
        try:
            req = parse_requirement(line)
        except InvalidRequirement as exc:
            if strict:
                raise InvalidRequirement(
                    str(exc), exc.text, exc.offset, context=f"requires.txt line {lineno} {section or '[install]'}"
                ) from None
            data.warnings.append(f"requires.txt:{lineno}: {exc}")
            continue
        data.add(req.and_marker(section_marker), extra)
    return data


def _header_fields(content: str) -> list[tuple[int, str, str]]:
    fields: list[tuple[int, str, str]] = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            break
        if line[0] in " \t" and fields:
            start, key, value = fields[-1]
            fields[-1] = (start, key, value + " " + line.strip())
            continue
        key, sep, value = line.partition(":")
        if not sep:
            continue
        fields.append((lineno, key.strip().lower(), value.strip()))
    return fields


def parse_metadata_core(content: str, strict: bool = False) -> RawDependencyData:
    """Dependencies from a core-metadata header block (``METADATA`` / ``PKG-INFO``)."""
    data = RawDependencyData()
    for lineno, key, value in _header_fields(content):
        if key == "provides-extra" and value:
            data.extras.setdefault(canonical_name(value), [])
        elif key == "requires-dist":
            try:
                req = parse_requirement(value)
            except InvalidRequirement as exc:
                if strict:
                    raise InvalidRequirement(str(exc), exc.text, exc.offset, context=f"header line {lineno}") from None
                data.warnings.append(f"METADATA:{lineno}: {exc}")
                continue
            extra, rest = strip_extra(req.marker)
            data.add(req.with_marker(rest) if extra else req, extra)
    return data
