"""Project names, versions, specifiers, environment markers and requirements.

Every other module in the package speaks these types.  They are immutable and
hashable so they can be shared freely between threads and used as dict keys.
"""

from __future__ import annotations

import functools
import os
import platform
import re
import sys
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Union

from .errors import (
    InvalidMarker,
    InvalidName,
    InvalidRequirement,
    InvalidSpecifier,
    InvalidVersion,
    UnknownVariable,
)

# ---------------------------------------------------------------------------
# Project names
# ---------------------------------------------------------------------------

_NAME_CHARS = re.compile(r"^[A-Za-z0-9._-]+$")
_NAME_SEPARATORS = re.compile(r"[-_.]+")


@dataclass(frozen=True)
class ProjectName:
    raw: str
    normalized: str

    def __str__(self) -> str:
        return self.normalized

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ProjectName):
            return self.normalized == other.normalized
        if isinstance(other, str):
            return self.normalized == canonical_name(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.normalized)

    def __lt__(self, other: "ProjectName") -> bool:
        return self.normalized < other.normalized


def canonical_name(raw: str) -> str:
    return _NAME_SEPARATORS.sub("-", raw).lower()


def normalize_name(raw: str) -> ProjectName:
    if not raw or not _NAME_CHARS.match(raw):
        raise InvalidName(f"invalid project name {raw!r}")
    return ProjectName(raw, canonical_name(raw))


# ---------------------------------------------------------------------------
# Versions
# ---------------------------------------------------------------------------

_VERSION_PATTERN = r"""
    v?
    (?:(?P<epoch>[0-9]+)!)?
    (?P<release>[0-9]+(?:\.[0-9]+)*)
    (?P<pre>
        [-_.]?
        (?P<pre_l>alpha|a|beta|b|preview|pre|c|rc)
        [-_.]?
        (?P<pre_n>[0-9]+)?
    )?
    (?P<post>
        (?:-(?P<post_n1>[0-9]+))
        |
        (?:[-_.]?(?P<post_l>post|rev|r)[-_.]?(?P<post_n2>[0-9]+)?)
    )?
    (?P<dev>
        [-_.]?(?P<dev_l>dev)[-_.]?(?P<dev_n>[0-9]+)?
    )?
    (?:\+(?P<local>[a-z0-9]+(?:[-_.][a-z0-9]+)*))?
"""
_VERSION_RE = re.compile(r"^\s*" + _VERSION_PATTERN + r"\s*$", re.VERBOSE | re.IGNORECASE)

_PRE_PHASES = {"a": "a", "alpha": "a", "b": "b", "beta": "b", "c": "rc", "rc": "rc", "pre": "rc", "preview": "rc"}
_PHASE_RANK = {"a": 0, "b": 1, "rc": 2}


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class Version:
    epoch: int = 0
    release: tuple[int, ...] = (0,)
    pre: tuple[str, int] | None = None
    post: int | None = None
    dev: int | None = None
    local: str | None = None
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "release", tuple(self.release))
        object.__setattr__(self, "_key", self._sort_key())

    def _sort_key(self) -> tuple:
        release = list(self.release)
        while len(release) > 1 and release[-1] == 0:
            release.pop()
        if self.pre is None and self.post is None and self.dev is not None:
            pre: tuple = (-1,)
        elif self.pre is None:
            pre = (1,)
        else:
            pre = (0, _PHASE_RANK[self.pre[0]], self.pre[1])
        post = (-1,) if self.post is None else (0, self.post)
        dev = (1,) if self.dev is None else (0, self.dev)
        if self.local is None:
            local: tuple = ()
        else:
            local = tuple(
                (1, int(part), "") if part.isdigit() else (0, 0, part)
                for part in re.split(r"[-_.]", self.local.lower())
            )
        return (self.epoch, tuple(release), pre, post, dev, local)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key == other._key

    def __lt__(self, other: "Version") -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key < other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __str__(self) -> str:
        parts = []
        if self.epoch:
            parts.append(f"{self.epoch}!")
        parts.append(".".join(str(x) for x in self.release))
        if self.pre is not None:
            parts.append(f"{self.pre[0]}{self.pre[1]}")
        if self.post is not None:
            parts.append(f".post{self.post}")
        if self.dev is not None:
            parts.append(f".dev{self.dev}")
        if self.local is not None:
            parts.append(f"+{self.local}")
        return "".join(parts)

    @property
    def is_prerelease(self) -> bool:
        return self.pre is not None or self.dev is not None

    @property
    def public(self) -> "Version":
        if self.local is None:
            return self
        return Version(self.epoch, self.release, self.pre, self.post, self.dev, None)

    @property
    def base(self) -> "Version":
        return Version(self.epoch, self.release)


@functools.lru_cache(maxsize=8192)
def parse_version(text: str) -> Version:
    m = _VERSION_RE.match(text)
    if not m:
        raise InvalidVersion(f"invalid version {text!r}")
    pre = None
    if m.group("pre_l"):
        pre = (_PRE_PHASES[m.group("pre_l").lower()], int(m.group("pre_n") or 0))
    post = None
    if m.group("post_n1"):
        post = int(m.group("post_n1"))
    elif m.group("post_l"):
        post = int(m.group("post_n2") or 0)
    dev = None
    if m.group("dev_l"):
        dev = int(m.group("dev_n") or 0)
    local = m.group("local")
    if local is not None:
        local = ".".join(re.split(r"[-_.]", local.lower()))
    return Version(
        epoch=int(m.group("epoch") or 0),
        release=tuple(int(x) for x in m.group("release").split(".")),
        pre=pre,
        post=post,
        dev=dev,
        local=local,
    )


# ---------------------------------------------------------------------------
# Specifiers
# ---------------------------------------------------------------------------

OPERATORS = ("===", "~=", "==", "!=", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class Clause:
    op: str
    version: str

    def __str__(self) -> str:
        return f"{self.op}{self.version}"

    @property
    def is_pin(self) -> bool:
        return self.op == "===" or (self.op == "==" and not self.version.endswith(".*"))

    def mentions_prerelease(self) -> bool:
        if self.op == "===":
            return False
        text = self.version[:-2] if self.version.endswith(".*") else self.version
        try:
            return parse_version(text).is_prerelease
        except InvalidVersion:
            return False

    def contains(self, v: Version) -> bool:
        op, target = self.op, self.version
        if op == "===":
            return str(v).lower() == target.lower()
        if target.endswith(".*"):
            prefix = parse_version(target[:-2])
            candidate = v.public
            n = len(prefix.release)
            padded = candidate.release + (0,) * max(0, n - len(candidate.release))
            head_match = candidate.epoch == prefix.epoch and padded[:n] == prefix.release
            if prefix.pre is not None or prefix.post is not None or prefix.dev is not None:
                head_match = head_match and _same_suffix(candidate, prefix)
            return head_match if op == "==" else not head_match
        spec = parse_version(target)
        if op in ("==", "!="):
            candidate = v.public if spec.local is None else v
            return (candidate == spec) if op == "==" else (candidate != spec)
        if op == "~=":
            upper_release = spec.release[:-1]
            if not upper_release:
                raise InvalidSpecifier(f"~= needs at least two release segments: {self}")
            if v < spec:
                return False
            candidate = v.public.release
            n = len(upper_release)
            padded = candidate + (0,) * max(0, n - len(candidate))
            return v.epoch == spec.epoch and padded[:n] == upper_release
        candidate = v.public
        if op == "<=":
            return candidate <= spec
        if op == ">=":
            return candidate >= spec
        if op == "<":
            if not candidate < spec:
                return False
            # <V excludes pre-releases of V itself unless V is a pre-release
            earliest = replace(spec, dev=0, local=None)
            if not spec.is_prerelease and candidate.is_prerelease and candidate >= earliest:
                return False
            return True
        if op == ">":
            if not candidate > spec:
                return False
            # >V excludes post-releases and local builds of V itself
            if spec.post is None and candidate.post is not None and replace(candidate, post=None, dev=None) == spec:
                return False
            if v.local is not None and candidate == spec:
                return False
            return True
        raise InvalidSpecifier(f"unknown operator {op!r}")


def _same_suffix(a: Version, b: Version) -> bool:
    return (a.pre, a.post, a.dev) == (b.pre, b.post, b.dev)


_CLAUSE_RE = re.compile(r"^\s*(===|~=|==|!=|<=|>=|<|>)\s*([^\s,;]+)\s*$")


def _parse_clause(text: str) -> Clause:
    m = _CLAUSE_RE.match(text)
    if not m:
        raise InvalidSpecifier(f"invalid specifier clause {text!r}")
    op, ver = m.group(1), m.group(2)
    if op == "===":
        return Clause(op, ver)
    if ver.endswith(".*"):
        if op not in ("==", "!="):
            raise InvalidSpecifier(f"wildcard only allowed with == and !=: {text!r}")
        parse_version(ver[:-2])
        return Clause(op, str(parse_version(ver[:-2])) + ".*")
    try:
        parsed = parse_version(ver)
    except InvalidVersion as exc:
        raise InvalidSpecifier(str(exc)) from None
    if op == "~=" and len(parsed.release) < 2:
        raise InvalidSpecifier(f"~= needs at least two release segments: {text!r}")
    if parsed.local is not None and op not in ("==", "!="):
        raise InvalidSpecifier(f"local version not allowed with {op}: {text!r}")
    return Clause(op, str(parsed))


@dataclass(frozen=True)
class VersionSpecifier:
    clauses: tuple[Clause, ...] = ()

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.clauses)

    def __bool__(self) -> bool:
        return bool(self.clauses)

    def contains(self, v: Version) -> bool:
        return all(c.contains(v) for c in self.clauses)

    @property
    def is_pinned(self) -> bool:
        return any(c.is_pin for c in self.clauses)

    def allows_prereleases(self) -> bool:
        return any(c.mentions_prerelease() for c in self.clauses)

    def __and__(self, other: "VersionSpecifier") -> "VersionSpecifier":
        return VersionSpecifier(self.clauses + other.clauses)


def parse_specifier(text: str) -> VersionSpecifier:
    text = text.strip()
    if not text:
        return VersionSpecifier()
    return VersionSpecifier(tuple(_parse_clause(part) for part in text.split(",")))


def specifier_contains(spec: VersionSpecifier, v: Version) -> bool:
    return spec.contains(v)


# ---------------------------------------------------------------------------
# Environment markers
# ---------------------------------------------------------------------------

ENV_VARIABLES = (
    "python_version",
    "python_full_version",
    "os_name",
    "sys_platform",
    "platform_machine",
    "platform_python_implementation",
    "platform_release",
    "platform_system",
    "platform_version",
    "implementation_name",
    "implementation_version",
)
VERSION_VARIABLES = frozenset({"python_version", "python_full_version", "implementation_version"})
_LEGACY_ALIASES = {
    "os.name": "os_name",
    "sys.platform": "sys_platform",
    "platform.version": "platform_version",
    "platform.machine": "platform_machine",
    "platform.python_implementation": "platform_python_implementation",
    "python_implementation": "platform_python_implementation",
}
MARKER_OPS = ("===", "~=", "==", "!=", "<=", ">=", "<", ">", "in", "not in")


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Literal:
    value: str

    def __str__(self) -> str:
        return '"' + self.value + '"' if '"' not in self.value else "'" + self.value + "'"


Operand = Union[Variable, Literal]


@dataclass(frozen=True)
class MarkerLeaf:
    lhs: Operand
    op: str
    rhs: Operand

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class MarkerAnd:
    items: tuple["MarkerExpr", ...]

    def __str__(self) -> str:
        return " and ".join(f"({i})" if isinstance(i, MarkerOr) else str(i) for i in self.items)


@dataclass(frozen=True)
class MarkerOr:
    items: tuple["MarkerExpr", ...]

    def __str__(self) -> str:
        return " or ".join(str(i) for i in self.items)


MarkerExpr = Union[MarkerLeaf, MarkerAnd, MarkerOr]


class _Scanner:
    """Hand-rolled tokenizer over marker/requirement text; positions are absolute offsets."""

    def __init__(self, text: str, pos: int = 0, end: int | None = None, error=InvalidMarker):
        self.text = text
        self.pos = pos
        self.end = len(text) if end is None else end
        self.error = error

    def fail(self, message: str):
        if self.error is InvalidRequirement:
            raise InvalidRequirement(message, self.text, self.pos)
        raise InvalidMarker(f"{message} at offset {self.pos}: {self.text!r}")

    def skip_ws(self) -> None:
        while self.pos < self.end and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, token: str) -> bool:
        self.skip_ws()
        return self.text.startswith(token, self.pos) and self.pos + len(token) <= self.end

    def peek_word(self, word: str) -> bool:
        self.skip_ws()
        end = self.pos + len(word)
        if not self.text.startswith(word, self.pos) or end > self.end:
            return False
        return end == self.end or not (self.text[end].isalnum() or self.text[end] in "._")

    def take(self, token: str) -> None:
        if not self.peek(token):
            self.fail(f"expected {token!r}")
        self.pos += len(token)

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= self.end


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")


def _parse_or(sc: _Scanner) -> MarkerExpr:
    items = [_parse_and(sc)]
    while sc.peek_word("or"):
        sc.pos += 2
        items.append(_parse_and(sc))
    return items[0] if len(items) == 1 else MarkerOr(tuple(items))


def _parse_and(sc: _Scanner) -> MarkerExpr:
    items = [_parse_atom(sc)]
    while sc.peek_word("and"):
        sc.pos += 3
        items.append(_parse_atom(sc))
    return items[0] if len(items) == 1 else MarkerAnd(tuple(items))


def _parse_atom(sc: _Scanner) -> MarkerExpr:
    if sc.peek("("):
        sc.pos += 1
        inner = _parse_or(sc)
        sc.take(")")
        return inner
    lhs = _parse_operand(sc)
    op = _parse_marker_op(sc)
    rhs = _parse_operand(sc)
    if isinstance(lhs, Literal) and isinstance(rhs, Literal):
        sc.fail("marker compares two literals")
    return MarkerLeaf(lhs, op, rhs)


def _parse_operand(sc: _Scanner) -> Operand:
    sc.skip_ws()
    if sc.pos >= sc.end:
        sc.fail("expected marker operand")
    ch = sc.text[sc.pos]
    if ch in "'\"":
        close = sc.text.find(ch, sc.pos + 1, sc.end)
        if close < 0:
            sc.fail("unterminated string")
        value = sc.text[sc.pos + 1 : close]
        sc.pos = close + 1
        return Literal(value)
    m = _IDENT_RE.match(sc.text, sc.pos, sc.end)
    if not m:
        sc.fail("expected marker variable or quoted string")
    name = _LEGACY_ALIASES.get(m.group(0), m.group(0))
    if name not in ENV_VARIABLES and name != "extra":
        exc = UnknownVariable(m.group(0))
        exc.offset = m.start()
        raise exc
    sc.pos = m.end()
    return Variable(name)


def _parse_marker_op(sc: _Scanner) -> str:
    sc.skip_ws()
    for op in ("===", "~=", "==", "!=", "<=", ">=", "<", ">"):
        if sc.peek(op):
            sc.pos += len(op)
            return op
    if sc.peek_word("in"):
        sc.pos += 2
        return "in"
    if sc.peek_word("not"):
        sc.pos += 3
        if not sc.peek_word("in"):
            sc.fail("expected 'in' after 'not'")
        sc.pos += 2
        return "not in"
    sc.fail("expected marker operator")
    raise AssertionError  # unreachable


def parse_marker(text: str) -> MarkerExpr:
    sc = _Scanner(text)
    expr = _parse_or(sc)
    if not sc.at_end():
        sc.fail("unexpected trailing text in marker")
    return expr


def _marker_variables(marker: MarkerExpr) -> Iterable[str]:
    if isinstance(marker, MarkerLeaf):
        for side in (marker.lhs, marker.rhs):
            if isinstance(side, Variable):
                yield side.name
    else:
        for item in marker.items:
            yield from _marker_variables(item)


@dataclass(frozen=True)
class EnvironmentProfile:
    variables: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        keys = {k for k, _ in self.variables}
        missing = set(ENV_VARIABLES) - keys
        if missing:
            raise ValueError(f"environment profile missing {sorted(missing)}")
        extra = keys - set(ENV_VARIABLES)
        if extra:
            raise UnknownVariable(sorted(extra)[0])
        for k, v in self.variables:
            if not v:
                raise ValueError(f"environment variable {k} is empty")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "EnvironmentProfile":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.variables)

    def __getitem__(self, key: str) -> str:
        return self.as_dict()[key]

    def with_overrides(self, overrides: Mapping[str, str]) -> "EnvironmentProfile":
        merged = self.as_dict()
        for k, v in overrides.items():
            if k not in ENV_VARIABLES:
                raise UnknownVariable(k)
            merged[k] = v
        return EnvironmentProfile.from_mapping(merged)


def host_environment() -> EnvironmentProfile:
    impl = sys.implementation
    iv = impl.version
    impl_version = f"{iv.major}.{iv.minor}.{iv.micro}"
    if iv.releaselevel != "final":
        impl_version += iv.releaselevel[0] + str(iv.serial)
    values = {
        "implementation_name": impl.name,
        "implementation_version": impl_version,
        "os_name": os.name,
        "platform_machine": platform.machine() or "unknown",
        "platform_release": platform.release() or "unknown",
        "platform_system": platform.system() or "unknown",
        "platform_version": platform.version() or "unknown",
        "python_full_version": platform.python_version(),
        "platform_python_implementation": platform.python_implementation(),
        "python_version": ".".join(platform.python_version_tuple()[:2]),
        "sys_platform": sys.platform,
    }
    return EnvironmentProfile.from_mapping(values)


def _compare(lhs: str, op: str, rhs: str, versioned: bool) -> bool:
    if op == "in":
        return lhs in rhs
    if op == "not in":
        return lhs not in rhs
    if versioned:
        try:
            return _parse_clause(f"{op}{rhs}").contains(parse_version(lhs))
        except (InvalidSpecifier, InvalidVersion):
            pass
    if op == "==" or op == "===":
        return lhs == rhs
    if op == "!=":
        return lhs != rhs
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == ">":
        return lhs > rhs
    if op == ">=":
        return lhs >= rhs
    if op == "~=":
        return lhs == rhs
    raise InvalidMarker(f"unsupported marker operator {op!r}")


def eval_marker(
    marker: MarkerExpr | None,
    env: EnvironmentProfile,
    active_extras: Iterable[str] = (),
) -> bool:
    if marker is None:
        return True
    values = env.as_dict()
    extras = frozenset(canonical_name(e) for e in active_extras)
    return _eval(marker, values, extras)


def _eval(marker: MarkerExpr, values: dict[str, str], extras: frozenset[str]) -> bool:
    if isinstance(marker, MarkerAnd):
        return all(_eval(i, values, extras) for i in marker.items)
    if isinstance(marker, MarkerOr):
        return any(_eval(i, values, extras) for i in marker.items)
    lhs, rhs, op = marker.lhs, marker.rhs, marker.op
    for side in (lhs, rhs):
        if isinstance(side, Variable) and side.name not in values and side.name != "extra":
            raise UnknownVariable(side.name)
    if isinstance(lhs, Variable) and lhs.name == "extra" or isinstance(rhs, Variable) and rhs.name == "extra":
        literal = rhs if isinstance(rhs, Literal) else lhs
        wanted = canonical_name(literal.value) if isinstance(literal, Literal) else ""
        if op in ("==", "==="):
            return wanted in extras
        if op == "!=":
            return wanted not in extras
        if op == "in" and isinstance(rhs, Literal):
            return any(e in rhs.value for e in extras)
        if op == "not in" and isinstance(rhs, Literal):
            return not any(e in rhs.value for e in extras)
        return False
    left = values[lhs.name] if isinstance(lhs, Variable) else lhs.value
    right = values[rhs.name] if isinstance(rhs, Variable) else rhs.value
    versioned = any(isinstance(s, Variable) and s.name in VERSION_VARIABLES for s in (lhs, rhs))
    return _compare(left, op, right, versioned)


def marker_extras(marker: MarkerExpr | None) -> set[str]:
    """Extra names tested for equality anywhere in ``marker``."""
    found: set[str] = set()
    if marker is None:
        return found
    if isinstance(marker, MarkerLeaf):
        if marker.op in ("==", "===") and Variable("extra") in (marker.lhs, marker.rhs):
            lit = marker.rhs if isinstance(marker.rhs, Literal) else marker.lhs
            if isinstance(lit, Literal):
                found.add(canonical_name(lit.value))
        return found
    for item in marker.items:
        found |= marker_extras(item)
    return found


def strip_extra(marker: MarkerExpr | None) -> tuple[str | None, MarkerExpr | None]:
    """Split ``marker`` into the extra it is gated on and the remaining condition.

    Only the common shapes are recognised: a bare ``extra == "x"`` leaf, or an
    ``and`` whose items include exactly one such leaf.  Anything else is
    returned unchanged with ``None`` as the extra.
    """
    if marker is None:
        return None, None
    if isinstance(marker, MarkerLeaf):
        names = marker_extras(marker)
        if names:
            return names.pop(), None
        return None, marker
    if isinstance(marker, MarkerAnd):
        leaves = [i for i in marker.items if isinstance(i, MarkerLeaf) and marker_extras(i)]
        if len(leaves) == 1:
            rest = tuple(i for i in marker.items if i is not leaves[0])
            remaining: MarkerExpr | None = rest[0] if len(rest) == 1 else MarkerAnd(rest)
            return marker_extras(leaves[0]).pop(), remaining
    if isinstance(marker, MarkerOr):
        names = [marker_extras(i) for i in marker.items]
        if all(isinstance(i, MarkerLeaf) for i in marker.items) and all(len(n) == 1 for n in names):
            # extra == "a" or extra == "b" is not representable as one group
            return None, marker
    return None, marker


# ---------------------------------------------------------------------------
# Requirements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Requirement:
    name: ProjectName
    extras: frozenset[str] = frozenset()
    specifier: VersionSpecifier = VersionSpecifier()
    marker: MarkerExpr | None = None

    def __str__(self) -> str:
        out = self.name.normalized
        if self.extras:
            out += "[" + ",".join(sorted(self.extras)) + "]"
        out += str(self.specifier)
        if self.marker is not None:
            out += "; " + str(self.marker)
        return out

    def with_marker(self, marker: MarkerExpr | None) -> "Requirement":
        return Requirement(self.name, self.extras, self.specifier, marker)

    def and_marker(self, marker: MarkerExpr | None) -> "Requirement":
        if marker is None:
            return self
        if self.marker is None:
            return self.with_marker(marker)
        return self.with_marker(MarkerAnd((self.marker, marker)))


_REQ_NAME_RE = re.compile(r"[A-Za-z0-9](?:[A-Za-z0-9._-]*[A-Za-z0-9])?")


@functools.lru_cache(maxsize=16384)
def parse_requirement(text: str) -> Requirement:
    sc = _Scanner(text, error=InvalidRequirement)
    sc.skip_ws()
    m = _REQ_NAME_RE.match(text, sc.pos)
    if not m:
        sc.fail("expected project name")
    name = normalize_name(m.group(0))
    sc.pos = m.end()

    extras: set[str] = set()
    if sc.peek("["):
        sc.pos += 1
        while True:
            sc.skip_ws()
            if sc.peek("]"):
                sc.pos += 1
                break
            em = _REQ_NAME_RE.match(text, sc.pos)
            if not em:
                sc.fail("expected extra name")
            extras.add(canonical_name(em.group(0)))
            sc.pos = em.end()
            sc.skip_ws()
            if sc.peek(","):
                sc.pos += 1
            elif not sc.peek("]"):
                sc.fail("expected ',' or ']' in extras")

    sc.skip_ws()
    if sc.peek("@"):
        sc.fail("direct URL requirements are not supported")

    semi = text.find(";", sc.pos)
    spec_end = semi if semi >= 0 else len(text)
    spec_text = text[sc.pos : spec_end].strip()
    if spec_text.startswith("("):
        if not spec_text.endswith(")"):
            sc.pos = spec_end
            sc.fail("unbalanced parentheses around specifier")
        spec_text = spec_text[1:-1]
    if spec_text and spec_text[0] not in "<>=!~":
        sc.fail("expected version specifier or ';'")
    try:
        specifier = parse_specifier(spec_text)
    except (InvalidSpecifier, InvalidVersion) as exc:
        raise InvalidRequirement(str(exc), text, sc.pos) from None

    marker = None
    if semi >= 0:
        msc = _Scanner(text, semi + 1, error=InvalidRequirement)
        if msc.at_end():
            msc.fail("empty marker after ';'")
        try:
            marker = _parse_or(msc)
        except UnknownVariable as exc:
            raise InvalidRequirement(str(exc), text, getattr(exc, "offset", semi + 1)) from None
        except InvalidMarker as exc:
            raise InvalidRequirement(str(exc), text, msc.pos) from None
        if not msc.at_end():
            msc.fail("unexpected trailing text")
    return Requirement(name, frozenset(extras), specifier, marker)
