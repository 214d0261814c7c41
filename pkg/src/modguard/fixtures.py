"""Deterministic builders for synthetic distributions and indexes.

A :class:`FixtureSpec` describes a release declaratively: its source files,
which configuration flavor to emit, the module-shaping keywords and the
dependencies.  :func:`build_fixture` turns it into wheel, sdist or egg bytes
with fixed timestamps and sorted entry order, so the same spec always yields
the same bytes.
"""

from __future__ import annotations

import base64
import gzip
import hashlib
import io
import json
import random
import tarfile
import zipfile
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from .archive import DistributionKind
from .errors import SpecInvalid
from .metadata import FindPackages
from .pep import canonical_name, parse_requirement, parse_version

CONFIG_FLAVORS = ("setup_py", "setup_cfg", "pyproject", "metadata_only")

_ZIP_DATE = (1980, 1, 1, 0, 0, 0)
_BUILD_SYSTEM = '[build-system]\nrequires = ["setuptools>=61"]\nbuild-backend = "setuptools.build_meta"\n'


@dataclass
class FixtureSpec:
    name: str
    version: str
    kind: DistributionKind = DistributionKind.SdistTarGz
    # pre-install source tree for sdists; installed layout for wheels and eggs
    files: dict[str, str] = field(default_factory=dict)
    config: str = "setup_py"
    py_modules: list[str] | None = None
    packages: list[str] | FindPackages | None = None
    package_dir: dict[str, str] | None = None
    namespace_packages: list[str] | None = None
    install_requires: list[str] = field(default_factory=list)
    extras: dict[str, list[str]] = field(default_factory=dict)
    # sdists only: ship a generated ``.egg-info`` next to the config file
    egg_info: bool = False
    # route setup.py keyword values through module-level variables
    indirect: bool = False
    # declared post-install module set; derived when omitted where possible
    expected: list[str] | None = None

    @property
    def safe_name(self) -> str:
        return canonical_name(self.name).replace("-", "_")

    @property
    def filename(self) -> str:
        if self.kind is DistributionKind.Wheel:
            return f"{self.safe_name}-{self.version}-py3-none-any.whl"
        if self.kind is DistributionKind.Egg:
            return f"{self.safe_name}-{self.version}-py3.10.egg"
        ext = ".tar.gz" if self.kind is DistributionKind.SdistTarGz else ".zip"
        return f"{self.name}-{self.version}{ext}"

    def nspkg_name(self) -> str:
        return f"{self.safe_name}-{self.version}-py3-nspkg.pth"

    def expected_modules(self) -> list[str]:
        """The post-install module paths this spec declares."""
        if self.expected is not None:
            return sorted(self.expected)
        if self.kind in (DistributionKind.Wheel, DistributionKind.Egg):
            out = {p for p in self.files if p.endswith(".py")}
            if self.namespace_packages:
                out -= {ns.replace(".", "/") + "/__init__.py" for ns in self.namespace_packages}
                out.add(self.nspkg_name())
            return sorted(out)
        if self.packages is None and self.py_modules is None and not self.namespace_packages:
            return sorted(p for p in self.files if p.endswith(".py") and p != "setup.py")
        raise SpecInvalid(f"{self.name}: sdist with module keywords needs an explicit expected set")

    def to_json(self) -> dict[str, Any]:
        doc = asdict(self)
        doc["kind"] = self.kind.value
        if isinstance(self.packages, FindPackages):
            doc["packages"] = {"find": asdict(self.packages)}
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "FixtureSpec":
        doc = dict(doc)
        doc["kind"] = DistributionKind(doc.get("kind", DistributionKind.SdistTarGz.value))
        packages = doc.get("packages")
        if isinstance(packages, dict):
            find = dict(packages["find"])
            find["include"] = tuple(find.get("include", ("*",)))
            find["exclude"] = tuple(find.get("exclude", ()))
            doc["packages"] = FindPackages(**find)
        return cls(**doc)


def validate_spec(spec: FixtureSpec) -> None:
    if not spec.name or not spec.version:
        raise SpecInvalid("name and version are required")
    try:
        canonical_name(spec.name)
        parse_version(spec.version)
        for line in spec.install_requires + [r for reqs in spec.extras.values() for r in reqs]:
            parse_requirement(line)
    except ValueError as exc:
        raise SpecInvalid(f"{spec.name}: {exc}") from None
    if spec.config not in CONFIG_FLAVORS:
        raise SpecInvalid(f"unknown config flavor {spec.config!r}")
    if spec.config == "pyproject" and spec.namespace_packages:
        raise SpecInvalid("pyproject.toml has no namespace_packages key")
    if spec.kind.is_sdist and spec.config == "metadata_only" and not spec.egg_info:
        raise SpecInvalid("a metadata-only sdist needs egg_info=True")
    for path in spec.files:
        if path.startswith("/") or ".." in path.split("/") or not path:
            raise SpecInvalid(f"bad file path {path!r}")


# ---------------------------------------------------------------------------
# configuration rendering
# ---------------------------------------------------------------------------


def _py_literal(value: Any) -> str:
    if isinstance(value, FindPackages):
        fn = "find_namespace_packages" if value.namespace else "find_packages"
        args = []
        if value.where not in (".", ""):
            args.append(f"where={value.where!r}")
        if tuple(value.include) != ("*",):
            args.append(f"include={list(value.include)!r}")
        if value.exclude:
            args.append(f"exclude={list(value.exclude)!r}")
        return f"{fn}({', '.join(args)})"
    return repr(value)


def render_setup_py(spec: FixtureSpec) -> str:
    keywords: list[tuple[str, Any]] = [("name", spec.name), ("version", spec.version)]
    for key in ("packages", "package_dir", "py_modules", "namespace_packages"):
        value = getattr(spec, key)
        if value is not None:
            keywords.append((key, value))
    if spec.install_requires:
        keywords.append(("install_requires", list(spec.install_requires)))
    if spec.extras:
        keywords.append(("extras_require", {k: list(v) for k, v in sorted(spec.extras.items())}))
    finder = isinstance(spec.packages, FindPackages)
    imports = "setup"
    if finder:
        imports += ", find_namespace_packages" if spec.packages.namespace else ", find_packages"
    lines = [f"from setuptools import {imports}", ""]
    args = []
    for key, value in keywords:
        if spec.indirect and key not in ("name", "version"):
            var = key.upper()
            lines.append(f"{var} = {_py_literal(value)}")
            args.append(f"    {key}={var},")
        else:
            args.append(f"    {key}={_py_literal(value)},")
    if spec.indirect:
        lines.append("")
    lines += ["setup(", *args, ")", ""]
    return "\n".join(lines)


def _cfg_block(items: list[str]) -> str:
    return "".join(f"\n    {i}" for i in items)


def render_setup_cfg(spec: FixtureSpec) -> str:
    out = ["[metadata]", f"name = {spec.name}", f"version = {spec.version}", "", "[options]"]
    if isinstance(spec.packages, FindPackages):
        out.append("packages = find_namespace:" if spec.packages.namespace else "packages = find:")
    elif spec.packages is not None:
        out.append(f"packages ={_cfg_block(spec.packages)}")
    if spec.py_modules is not None:
        out.append(f"py_modules ={_cfg_block(spec.py_modules)}")
    if spec.package_dir is not None:
        out.append(f"package_dir ={_cfg_block([f'{k} = {v}' for k, v in spec.package_dir.items()])}")
    if spec.namespace_packages is not None:
        out.append(f"namespace_packages ={_cfg_block(spec.namespace_packages)}")
    if spec.install_requires:
        out.append(f"install_requires ={_cfg_block(spec.install_requires)}")
    if isinstance(spec.packages, FindPackages):
        find = spec.packages
        out += ["", "[options.packages.find]"]
        if find.where not in (".", ""):
            out.append(f"where = {find.where}")
        if tuple(find.include) != ("*",):
            out.append(f"include ={_cfg_block(list(find.include))}")
        if find.exclude:
            out.append(f"exclude ={_cfg_block(list(find.exclude))}")
    if spec.extras:
        out += ["", "[options.extras_require]"]
        for extra, reqs in sorted(spec.extras.items()):
            out.append(f"{extra} ={_cfg_block(reqs)}")
    return "\n".join(out) + "\n"


def _toml_str(s: str) -> str:
    return json.dumps(s)


def _toml_list(items) -> str:
    return "[" + ", ".join(_toml_str(i) for i in items) + "]"


def render_pyproject(spec: FixtureSpec) -> str:
    out = [_BUILD_SYSTEM, "[project]", f"name = {_toml_str(spec.name)}", f"version = {_toml_str(spec.version)}"]
    out.append(f"dependencies = {_toml_list(spec.install_requires)}")
    if spec.extras:
        out += ["", "[project.optional-dependencies]"]
        for extra, reqs in sorted(spec.extras.items()):
            out.append(f"{extra} = {_toml_list(reqs)}")
    table = []
    if spec.py_modules is not None:
        table.append(f"py-modules = {_toml_list(spec.py_modules)}")
    if spec.packages is not None and not isinstance(spec.packages, FindPackages):
        table.append(f"packages = {_toml_list(spec.packages)}")
    if spec.package_dir is not None:
        pairs = ", ".join(f"{_toml_str(k)} = {_toml_str(v)}" for k, v in spec.package_dir.items())
        table.append(f"package-dir = {{{pairs}}}")
    if table or isinstance(spec.packages, FindPackages):
        out += ["", "[tool.setuptools]", *table]
    if isinstance(spec.packages, FindPackages):
        find = spec.packages
        out += ["", "[tool.setuptools.packages.find]"]
        if find.where not in (".", ""):
            out.append(f"where = {_toml_list([find.where])}")
        if tuple(find.include) != ("*",):
            out.append(f"include = {_toml_list(find.include)}")
        if find.exclude:
            out.append(f"exclude = {_toml_list(find.exclude)}")
        out.append(f"namespaces = {'true' if find.namespace else 'false'}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# metadata rendering
# ---------------------------------------------------------------------------


def _metadata_core(spec: FixtureSpec, version_header: str = "2.1") -> str:
    lines = [f"Metadata-Version: {version_header}", f"Name: {spec.name}", f"Version: {spec.version}"]
    for req in spec.install_requires:
        lines.append(f"Requires-Dist: {req}")
    for extra, reqs in sorted(spec.extras.items()):
        lines.append(f"Provides-Extra: {extra}")
        for raw in reqs:
            req = parse_requirement(raw)
            cond = f'extra == "{extra}"'
            if req.marker is not None:
                cond = f"({req.marker}) and {cond}"
            lines.append(f"Requires-Dist: {req.with_marker(None)}; {cond}")
    return "\n".join(lines) + "\n\n"


def _requires_txt(spec: FixtureSpec) -> str:
    out: list[str] = []
    plain, by_marker = [], {}
    for raw in spec.install_requires:
        req = parse_requirement(raw)
        if req.marker is None:
            plain.append(str(req))
        else:
            by_marker.setdefault(str(req.marker), []).append(str(req.with_marker(None)))
    out += plain
    for marker, reqs in sorted(by_marker.items()):
        out += ["", f"[:{marker}]", *reqs]
    for extra, reqs in sorted(spec.extras.items()):
        out += ["", f"[{extra}]"]
        out += [str(parse_requirement(r)) for r in reqs]
    return "\n".join(out).lstrip("\n") + ("\n" if out else "")


def _top_levels(modules: list[str]) -> list[str]:
    tops = set()
    for path in modules:
        if not path.endswith(".py"):
            continue
        first = path.split("/", 1)[0]
        tops.add(first[:-3] if first.endswith(".py") else first)
    return sorted(tops)


def _egg_info_files(spec: FixtureSpec, sources: list[str]) -> dict[str, str]:
    modules = spec.expected_modules()
    tops = _top_levels(modules)
    for ns in spec.namespace_packages or ():
        top = ns.split(".", 1)[0]
        if top not in tops:
            tops.append(top)
    files = {
        "PKG-INFO": _metadata_core(spec),
        "SOURCES.txt": "\n".join(sorted(sources)) + "\n",
        "top_level.txt": "\n".join(sorted(tops)) + "\n",
        "dependency_links.txt": "\n",
    }
    if spec.install_requires or spec.extras:
        files["requires.txt"] = _requires_txt(spec)
    if spec.namespace_packages:
        files["namespace_packages.txt"] = "\n".join(spec.namespace_packages) + "\n"
    return files


def _egg_info_dir(spec: FixtureSpec) -> str:
    """Where setuptools would put ``.egg-info``: inside ``package_dir['']`` if set."""
    base = (spec.package_dir or {}).get("", "")
    if isinstance(spec.packages, FindPackages) and spec.packages.where not in (".", "") and not base:
        base = spec.packages.where
    name = f"{spec.safe_name}.egg-info"
    return f"{base}/{name}" if base else name


# ---------------------------------------------------------------------------
# archive writers
# ---------------------------------------------------------------------------


def _zip_bytes(files: dict[str, bytes]) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for path in sorted(files):
            info = zipfile.ZipInfo(path, date_time=_ZIP_DATE)
            info.external_attr = 0o644 << 16
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, files[path])
    return buf.getvalue()


def _targz_bytes(files: dict[str, bytes]) -> bytes:
    raw = io.BytesIO()
    with tarfile.open(fileobj=raw, mode="w", format=tarfile.PAX_FORMAT) as tf:
        dirs = sorted({"/".join(p.split("/")[:i]) for p in files for i in range(1, p.count("/") + 1)})
        for d in dirs:
            info = tarfile.TarInfo(d)
            info.type = tarfile.DIRTYPE
            info.mode = 0o755
            info.mtime = 0
            tf.addfile(info)
        for path in sorted(files):
            data = files[path]
            info = tarfile.TarInfo(path)
            info.size = len(data)
            info.mode = 0o644
            info.mtime = 0
            tf.addfile(info, io.BytesIO(data))
    out = io.BytesIO()
    with gzip.GzipFile(fileobj=out, mode="wb", mtime=0, filename="") as gz:
        gz.write(raw.getvalue())
    return out.getvalue()


def _record_hash(data: bytes) -> str:
    digest = hashlib.sha256(data).digest()
    return "sha256=" + base64.urlsafe_b64encode(digest).rstrip(b"=").decode()


def _encode(files: dict[str, str]) -> dict[str, bytes]:
    return {p: c.encode() for p, c in files.items()}


def _build_wheel(spec: FixtureSpec) -> bytes:
    files = _encode(spec.files)
    if spec.namespace_packages:
        for ns in spec.namespace_packages:
            files.pop(ns.replace(".", "/") + "/__init__.py", None)
        files[spec.nspkg_name()] = _nspkg_body(spec.namespace_packages).encode()
    info = f"{spec.safe_name}-{spec.version}.dist-info"
    meta = {
        "METADATA": _metadata_core(spec),
        "WHEEL": "Wheel-Version: 1.0\nGenerator: modguard-fixtures\nRoot-Is-Purelib: true\nTag: py3-none-any\n\n",
        "top_level.txt": "\n".join(_top_levels(list(files))) + "\n",
    }
    if spec.namespace_packages:
        meta["namespace_packages.txt"] = "\n".join(spec.namespace_packages) + "\n"
    for name, content in meta.items():
        files[f"{info}/{name}"] = content.encode()
    record = [f"{p},{_record_hash(d)},{len(d)}" for p, d in sorted(files.items())]
    record.append(f"{info}/RECORD,,")
    files[f"{info}/RECORD"] = ("\n".join(record) + "\n").encode()
    return _zip_bytes(files)


def _nspkg_body(namespaces: list[str]) -> str:
    return "".join(
        f"import sys, types, os;p = os.path.join(sys._getframe(1).f_locals['sitedir'], *{ns.split('.')!r})\n"
        for ns in namespaces
    )


def _config_files(spec: FixtureSpec) -> dict[str, str]:
    if spec.config == "setup_py":
        return {"setup.py": render_setup_py(spec)}
    if spec.config == "setup_cfg":
        return {"setup.cfg": render_setup_cfg(spec), "pyproject.toml": _BUILD_SYSTEM}
    if spec.config == "pyproject":
        return {"pyproject.toml": render_pyproject(spec)}
    return {}


def _build_sdist(spec: FixtureSpec) -> bytes:
    tree = dict(spec.files)
    tree.update(_config_files(spec))
    tree["PKG-INFO"] = _metadata_core(spec)
    if spec.egg_info:
        egg_dir = _egg_info_dir(spec)
        names = ["PKG-INFO", "SOURCES.txt", "top_level.txt", "dependency_links.txt"]
        if spec.install_requires or spec.extras:
            names.append("requires.txt")
        if spec.namespace_packages:
            names.append("namespace_packages.txt")
        sources = sorted(set(tree) | {f"{egg_dir}/{n}" for n in names})
        sources.remove("PKG-INFO")
        for name, content in _egg_info_files(spec, sources).items():
            tree[f"{egg_dir}/{name}"] = content
    wrapper = f"{spec.name}-{spec.version}"
    files = {f"{wrapper}/{p}": c.encode() for p, c in tree.items()}
    if spec.kind is DistributionKind.SdistTarGz:
        return _targz_bytes(files)
    return _zip_bytes(files)


def _build_egg(spec: FixtureSpec) -> bytes:
    files = dict(spec.files)
    sources = sorted(files)
    for name, content in _egg_info_files(spec, sources).items():
        files[f"EGG-INFO/{name}"] = content
    return _zip_bytes(_encode(files))


def build_fixture(spec: FixtureSpec) -> bytes:
    validate_spec(spec)
    if spec.kind is DistributionKind.Wheel:
        return _build_wheel(spec)
    if spec.kind is DistributionKind.Egg:
        return _build_egg(spec)
    return _build_sdist(spec)


# ---------------------------------------------------------------------------
# named examples
# ---------------------------------------------------------------------------


def pugs() -> FixtureSpec:
    """Renamed package plus a namespace package, driven by ``setup.py``."""
    return FixtureSpec(
        name="pugs",
        version="0.0.1",
        files={
            "pugs/__init__.py": "from .core import bark\n",
            "pugs/core.py": "def bark():\n    return 'woof'\n",
            "namespace_pugs/__init__.py": "__import__('pkg_resources').declare_namespace(__name__)\n",
            "namespace_pugs/util.py": "def helper():\n    return 1\n",
            "tests/test_core.py": "def test_bark():\n    pass\n",
            "README.md": "# pugs\n",
        },
        packages=["pugs_lib", "namespace_pugs"],
        package_dir={"pugs_lib": "pugs"},
        namespace_packages=["namespace_pugs"],
        expected=[
            "namespace_pugs/util.py",
            "pugs-0.0.1-py3-nspkg.pth",
            "pugs_lib/__init__.py",
            "pugs_lib/core.py",
        ],
    )


def pkg_wheel() -> FixtureSpec:
    return FixtureSpec(
        name="pkg",
        version="0.0.1",
        kind=DistributionKind.Wheel,
        files={"mod1/__init__.py": "", "mod2.py": "VALUE = 2\n"},
    )


def pkg_namespace_sdist() -> FixtureSpec:
    return FixtureSpec(
        name="pkg",
        version="0.0.1",
        files={
            "mod1/__init__.py": "__import__('pkg_resources').declare_namespace(__name__)\n",
            "mod2.py": "VALUE = 2\n",
        },
        packages=["mod1"],
        namespace_packages=["mod1"],
        py_modules=["mod2"],
        expected=["mod2.py", "pkg-0.0.1-py3-nspkg.pth"],
    )


def jwt_pair() -> tuple[FixtureSpec, FixtureSpec]:
    """Two unrelated projects that both install ``jwt/exceptions.py``."""
    jwt = FixtureSpec(
        name="jwt",
        version="1.3.1",
        kind=DistributionKind.Wheel,
        files={
            "jwt/__init__.py": "from .jwk import JWK\n",
            "jwt/jwk.py": "class JWK:\n    pass\n",
            "jwt/exceptions.py": "class JWKError(Exception):\n    pass\n",
        },
    )
    pyjwt = FixtureSpec(
        name="PyJWT",
        version="2.6.0",
        kind=DistributionKind.Wheel,
        files={
            "jwt/__init__.py": "from .api_jwt import encode, decode\n",
            "jwt/api_jwt.py": "def encode(payload, key):\n    return ''\n\n\ndef decode(token, key):\n    return {}\n",
            "jwt/exceptions.py": "class PyJWTError(Exception):\n    pass\n\n\nclass InvalidTokenError(PyJWTError):\n    pass\n",
        },
    )
    return jwt, pyjwt


def versioneer() -> FixtureSpec:
    return FixtureSpec(
        name="versioneer",
        version="0.28",
        kind=DistributionKind.Wheel,
        files={"versioneer.py": "def get_version():\n    return '0.28'\n"},
        extras={"toml": ["tomli; python_version < '3.11'"]},
    )


def hgijson() -> FixtureSpec:
    """Ships a top-level ``json`` package that shadows the standard library."""
    return FixtureSpec(
        name="hgijson",
        version="3.1.0",
        files={
            "hgijson/__init__.py": "",
            "hgijson/serialization.py": "import json\n",
            "json/__init__.py": "",
            "json/encoders.py": "class Encoder:\n    pass\n",
        },
        packages=["hgijson", "json"],
        expected=["hgijson/__init__.py", "hgijson/serialization.py", "json/__init__.py", "json/encoders.py"],
    )


def fibex_converter() -> FixtureSpec:
    return FixtureSpec(
        name="FibexConverter",
        version="1.0.0",
        kind=DistributionKind.Wheel,
        files={"parser.py": "def parse(path):\n    return None\n", "fibex.py": "import parser\n"},
    )


def slugify_pair() -> tuple[FixtureSpec, FixtureSpec]:
    python_slugify = FixtureSpec(
        name="python-slugify",
        version="8.0.0",
        kind=DistributionKind.Wheel,
        files={"slugify/__init__.py": "from .slugify import slugify\n", "slugify/slugify.py": "def slugify(text):\n    return text\n"},
    )
    awesome = FixtureSpec(
        name="awesome-slugify",
        version="1.6.5",
        kind=DistributionKind.Wheel,
        files={"slugify/__init__.py": "from .main import Slugify\n", "slugify/main.py": "class Slugify:\n    pass\n"},
    )
    return python_slugify, awesome


def crypto_pair() -> tuple[FixtureSpec, FixtureSpec]:
    """Paths that collide only on a case-insensitive filesystem."""
    crypto = FixtureSpec(
        name="crypto",
        version="1.4.1",
        kind=DistributionKind.Wheel,
        files={"crypto/__init__.py": "", "crypto/app.py": "def main():\n    pass\n"},
    )
    pycrypto = FixtureSpec(
        name="pycrypto",
        version="2.6.1",
        kind=DistributionKind.Wheel,
        files={"Crypto/__init__.py": "", "Crypto/Cipher.py": "class AES:\n    pass\n", "Crypto/app.py": "X = 1\n"},
    )
    return crypto, pycrypto


def emoca_index() -> list[FixtureSpec]:
    """A project whose dependency graph contains two providers of ``cv2``."""
    cv2_files = lambda body: {"cv2/__init__.py": body, "cv2/data/__init__.py": ""}  # noqa: E731
    return [
        FixtureSpec(
            name="emoca",
            version="1.0",
            kind=DistributionKind.Wheel,
            files={"gdl/__init__.py": "import cv2\n"},
            install_requires=["opencv-python==4.5.5", "mediapipe>=0.8"],
        ),
        FixtureSpec(
            name="mediapipe",
            version="0.8.11",
            kind=DistributionKind.Wheel,
            files={"mediapipe/__init__.py": "import cv2\n"},
            install_requires=["opencv-python-headless>=4.5"],
        ),
        FixtureSpec(name="opencv-python", version="4.5.5", kind=DistributionKind.Wheel, files=cv2_files("GUI = True\n")),
        FixtureSpec(
            name="opencv-python-headless", version="4.5.5", kind=DistributionKind.Wheel, files=cv2_files("GUI = False\n")
        ),
    ]


def marker_extras_index() -> list[FixtureSpec]:
    """Releases exercising markers and extras during resolution."""
    wheel = DistributionKind.Wheel
    return [
        FixtureSpec(
            name="analysis",
            version="1.0",
            kind=wheel,
            files={"analysis/__init__.py": ""},
            install_requires=["numpy>=1.21.0; python_version >= '3.11'", "pytz>=2020.1"],
        ),
        FixtureSpec(name="numpy", version="1.21.0", kind=wheel, files={"numpy/__init__.py": ""}),
        FixtureSpec(name="numpy", version="1.26.4", kind=wheel, files={"numpy/__init__.py": ""}),
        FixtureSpec(name="pytz", version="2020.1", kind=wheel, files={"pytz/__init__.py": ""}),
        FixtureSpec(name="pytz", version="2023.3", kind=wheel, files={"pytz/__init__.py": ""}),
        FixtureSpec(
            name="pandas",
            version="2.0.3",
            kind=wheel,
            files={"pandas/__init__.py": ""},
            install_requires=["python-dateutil>=2.8.2", "pytz>=2020.1"],
            extras={"compression": ["zstandard>=0.15.2"]},
        ),
        FixtureSpec(name="python-dateutil", version="2.8.2", kind=wheel, files={"dateutil/__init__.py": ""}),
        FixtureSpec(name="zstandard", version="0.15.2", kind=wheel, files={"zstandard/__init__.py": ""}),
        FixtureSpec(name="zstandard", version="0.21.0", kind=wheel, files={"zstandard/__init__.py": ""}),
        FixtureSpec(
            name="versioneer",
            version="0.28",
            kind=wheel,
            files={"versioneer.py": ""},
            extras={"toml": ["hypothesis>=5.5.3"]},
        ),
        FixtureSpec(name="hypothesis", version="5.5.3", kind=wheel, files={"hypothesis/__init__.py": ""}),
        FixtureSpec(name="hypothesis", version="6.82.0", kind=wheel, files={"hypothesis/__init__.py": ""}),
    ]


def backtrack_heavy() -> list[FixtureSpec]:
    """Index where resolving a pinned requirement early avoids repeated retraction.

    The root needs ``xpkg``, ``ypkg`` and ``ppkg==1``.  Every ``xpkg`` release
    except the oldest pins ``qpkg==2`` while ``ppkg`` pins ``qpkg==1``.  With
    first-in-first-out ordering the solver commits to ``xpkg`` and ``ypkg``
    first and retries each ``ypkg`` release for each bad ``xpkg`` release.
    """
    wheel = DistributionKind.Wheel
    specs = [FixtureSpec(name="app", version="1.0", kind=wheel, files={"app/__init__.py": ""},
                         install_requires=["xpkg", "ypkg", "ppkg==1"])]
    for i in range(1, 6):
        deps = [] if i == 1 else ["qpkg==2"]
        specs.append(FixtureSpec(name="xpkg", version=f"{i}", kind=wheel, files={"xpkg/__init__.py": ""}, install_requires=deps))
        specs.append(FixtureSpec(name="ypkg", version=f"{i}", kind=wheel, files={"ypkg/__init__.py": ""}))
    specs.append(FixtureSpec(name="ppkg", version="1", kind=wheel, files={"ppkg/__init__.py": ""}, install_requires=["qpkg==1"]))
    for i in (1, 2):
        specs.append(FixtureSpec(name="qpkg", version=f"{i}", kind=wheel, files={"qpkg/__init__.py": ""}))
    return specs


def unsatisfiable_index() -> list[FixtureSpec]:
    wheel = DistributionKind.Wheel
    return [
        FixtureSpec(name="left", version="1.0", kind=wheel, files={"left/__init__.py": ""}, install_requires=["shared==1.0"]),
        FixtureSpec(name="right", version="1.0", kind=wheel, files={"right/__init__.py": ""}, install_requires=["shared==2.0"]),
        FixtureSpec(name="shared", version="1.0", kind=wheel, files={"shared/__init__.py": ""}),
        FixtureSpec(name="shared", version="2.0", kind=wheel, files={"shared/__init__.py": ""}),
    ]


def extraction_corpus() -> list[FixtureSpec]:
    """Packages covering every source of module evidence and every module keyword."""
    sdist, wheel = DistributionKind.SdistTarGz, DistributionKind.Wheel
    lib = {
        "lib/__init__.py": "",
        "lib/core.py": "def run():\n    return 1\n",
        "lib/sub/__init__.py": "",
        "lib/sub/deep.py": "X = 1\n",
        "tests/test_lib.py": "def test_run():\n    pass\n",
        "docs/conf.py": "project = 'lib'\n",
    }
    lib_expected = ["lib/__init__.py", "lib/core.py", "lib/sub/__init__.py", "lib/sub/deep.py"]
    src_layout = {"src/srcpkg/__init__.py": "", "src/srcpkg/api.py": "def call():\n    pass\n", "tests/test_api.py": ""}
    return [
        pkg_wheel(),
        with_kind(pkg_namespace_sdist(), DistributionKind.Egg),
        pugs(),
        pkg_namespace_sdist(),
        hgijson(),
        FixtureSpec(
            name="eggmeta",
            version="1.2",
            kind=sdist,
            config="setup_cfg",
            files={**{k.replace("lib", "eggmeta", 1): v for k, v in lib.items()}, "helper.py": ""},
            packages=["eggmeta", "eggmeta.sub"],
            py_modules=["helper"],
            egg_info=True,
            expected=["eggmeta/__init__.py", "eggmeta/core.py", "eggmeta/sub/__init__.py", "eggmeta/sub/deep.py", "helper.py"],
        ),
        FixtureSpec(name="cfgonly-py", version="1.0", files=dict(lib), packages=["lib", "lib.sub"], expected=lib_expected),
        FixtureSpec(name="cfgonly-cfg", version="1.0", config="setup_cfg", files=dict(lib), packages=["lib", "lib.sub"], expected=lib_expected),
        FixtureSpec(name="cfgonly-toml", version="1.0", config="pyproject", files=dict(lib), packages=["lib", "lib.sub"], expected=lib_expected),
        FixtureSpec(
            name="cfgonly-zip",
            version="1.0",
            kind=DistributionKind.SdistZip,
            config="pyproject",
            files=dict(lib),
            packages=["lib"],
            expected=["lib/__init__.py", "lib/core.py"],
        ),
        FixtureSpec(
            name="finder",
            version="0.3",
            files=dict(lib),
            packages=FindPackages(exclude=("tests", "tests.*")),
            expected=lib_expected,
        ),
        FixtureSpec(
            name="indirect",
            version="0.1",
            files=dict(lib),
            packages=["lib", "lib.sub"],
            indirect=True,
            expected=lib_expected,
        ),
        FixtureSpec(
            name="srclayout",
            version="2.0",
            config="setup_cfg",
            files=dict(src_layout),
            packages=FindPackages(where="src"),
            package_dir={"": "src"},
            expected=["srcpkg/__init__.py", "srcpkg/api.py"],
        ),
        FixtureSpec(
            name="renamed",
            version="1.0",
            config="pyproject",
            files={"impl/__init__.py": "", "impl/tools.py": "", "impl/extra/__init__.py": ""},
            packages=["public", "public.extra"],
            package_dir={"public": "impl"},
            expected=["public/__init__.py", "public/extra/__init__.py", "public/tools.py"],
        ),
        FixtureSpec(
            name="flatlayout",
            version="0.0.1",
            files={"src/__init__.py": "", "src/main.py": "def main():\n    pass\n", "setup_helpers/notes.txt": "x\n"},
            packages=FindPackages(),
            expected=["src/__init__.py", "src/main.py"],
        ),
        FixtureSpec(
            name="nspkg-wheel",
            version="3.0",
            kind=wheel,
            files={"company/__init__.py": "", "company/tool/__init__.py": "", "company/tool/cli.py": ""},
        ),
    ]


PRESETS = {
    "backtrack-heavy": backtrack_heavy,
    "markers-extras": marker_extras_index,
    "emoca": emoca_index,
    "unsatisfiable": unsatisfiable_index,
}


# ---------------------------------------------------------------------------
# randomized instances
# ---------------------------------------------------------------------------


def _random_specifier(rng: random.Random, versions: list[int]) -> str:
    op = rng.choice(["==", ">=", "<=", "range"])
    v = rng.choice(versions)
    if op == "range":
        hi = rng.choice([x for x in versions if x >= v])
        return f">={v}.0,<={hi}.0"
    return f"{op}{v}.0"


def gen_random_index(
    seed: int,
    n_projects: int = 8,
    n_versions: int = 5,
    max_deps: int = 3,
    kind: DistributionKind = DistributionKind.Wheel,
) -> list[FixtureSpec]:
    """Reproducible synthetic index: projects ``p0``.. with versions ``1.0``.. and random dependencies."""
    if not (1 <= n_projects <= 8 and 1 <= n_versions <= 5 and 0 <= max_deps <= 3):
        raise SpecInvalid("bounds are n_projects<=8, n_versions<=5, max_deps<=3")
    rng = random.Random(seed)
    names = [f"p{i}" for i in range(n_projects)]
    counts = {n: rng.randint(1, n_versions) for n in names}
    specs: list[FixtureSpec] = []
    for name in names:
        for v in range(1, counts[name] + 1):
            others = [o for o in names if o != name]
            deps = []
            for dep in rng.sample(others, rng.randint(0, min(max_deps, len(others)))):
                deps.append(dep + _random_specifier(rng, list(range(1, counts[dep] + 1))))
            specs.append(
                FixtureSpec(
                    name=name,
                    version=f"{v}.0",
                    kind=kind,
                    files={f"{name}/__init__.py": f"VERSION = '{v}.0'\n"},
                    install_requires=sorted(deps),
                )
            )
    return specs


def gen_random_corpus(seed: int, n_records: int = 20, pool_size: int = 12) -> list[FixtureSpec]:
    """Wheels whose module paths are drawn from a small shared pool so that collisions are frequent."""
    rng = random.Random(seed)
    pool = []
    for i in range(pool_size):
        top = rng.choice(["core", "utils", "src", "Utils", "api", "tests"])
        leaf = rng.choice(["__init__.py", "helpers.py", "main.py", f"m{i}.py"])
        pool.append(f"{top}/{leaf}")
    pool += ["board.py", "config.py", "json/__init__.py"]
    specs = []
    for i in range(n_records):
        chosen = rng.sample(pool, rng.randint(1, 4))
        files = {path: rng.choice(["A = 1\n", "A = 2\n"]) for path in sorted(set(chosen))}
        files[f"own{i}/__init__.py"] = ""
        specs.append(FixtureSpec(name=f"r{i}", version="1.0", kind=DistributionKind.Wheel, files=files))
    return specs


def synthetic_package(i: int, kind: DistributionKind = DistributionKind.Wheel) -> FixtureSpec:
    """Small throughput fixture; alternates config flavors for sdists."""
    name = f"synth{i}"
    files = {
        f"{name}/__init__.py": f"ID = {i}\n",
        f"{name}/core.py": "def run():\n    return 0\n",
        f"{name}/sub/__init__.py": "",
        f"{name}/sub/helpers.py": "X = 1\n",
    }
    deps = [f"synth{(i * 7) % 1000}>=1.0"] if i % 3 else []
    if kind is DistributionKind.Wheel:
        return FixtureSpec(name=name, version="1.0", kind=kind, files=files, install_requires=deps)
    flavor = ("setup_py", "setup_cfg", "pyproject")[i % 3]
    return FixtureSpec(
        name=name,
        version="1.0",
        kind=kind,
        files=files,
        config=flavor,
        packages=FindPackages(),
        install_requires=deps,
        expected=sorted(files),
    )


def with_kind(spec: FixtureSpec, kind: DistributionKind) -> FixtureSpec:
    return replace(spec, kind=kind)
