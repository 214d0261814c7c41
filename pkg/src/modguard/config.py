"""Static extraction of module and dependency data from build configuration.

``setup.cfg`` and ``pyproject.toml`` are parsed with their format parsers.
``setup.py`` is never executed: the ``setup(...)`` call is located in the
AST and each tracked keyword is resolved from literals, from names bound
exactly once to a literal, or from ``find_packages``-style calls.  Anything
else is reported as :data:`Unresolvable` for that keyword.
"""

from __future__ import annotations

import ast
import configparser
import logging
from typing import Any

import tomli

from .errors import InvalidRequirement, MalformedIni, MalformedToml, NoSetupCall, ScriptUnparseable
from .metadata import FindPackages, Provenance, RawDependencyData, RawModuleData, Unresolvable
from .pep import canonical_name, parse_requirement

log = logging.getLogger(__name__)

MODULE_KEYS = ("py_modules", "packages", "package_dir", "namespace_packages")
DEPENDENCY_KEYS = ("install_requires", "extras_require")
TRACKED_KEYS = MODULE_KEYS + DEPENDENCY_KEYS
CONFIG_FILES = ("setup.py", "setup.cfg", "pyproject.toml")


def _add_requirements(deps: RawDependencyData, lines, extra: str | None, where: str) -> None:
    for line in lines:
        line = line.split(" #", 1)[0].strip()
        if not line or line.startswith("#"):
            continue
        try:
            deps.add(parse_requirement(line), extra)
        except InvalidRequirement as exc:
            deps.warnings.append(f"{where}: {exc}")


# ---------------------------------------------------------------------------
# setup.cfg
# ---------------------------------------------------------------------------


def _cfg_list(value: str) -> list[str]:
    if "\n" in value.strip():
        items = value.splitlines()
    else:
        items = value.split(",")
    return [i.strip() for i in items if i.strip() and not i.strip().startswith("#")]


def _cfg_mapping(value: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in value.splitlines() if "\n" in value.strip() else value.split(","):
        line = line.strip()
        if not line:
            continue
        key, sep, target = line.partition("=")
        if not sep:
            continue
        out[key.strip()] = target.strip()
    return out


def parse_setup_cfg(content: str) -> tuple[RawModuleData, RawDependencyData]:
    parser = configparser.ConfigParser(interpolation=None, strict=False)
    try:
        parser.read_string(content)
    except configparser.MissingSectionHeaderError as exc:
        raise MalformedIni("missing section header", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise MalformedIni("cannot parse", lineno) from None
    except configparser.Error as exc:
        raise MalformedIni(str(exc), getattr(exc, "lineno", None)) from None

    modules = RawModuleData(provenance=Provenance.ConfigCfg)
    deps = RawDependencyData()
    if parser.has_section("options"):
        opts = parser["options"]
        if "py_modules" in opts:
            modules.py_modules = _cfg_list(opts["py_modules"])
            modules.present.add("py_modules")
        if "packages" in opts:
            value = opts["packages"].strip()
            modules.present.add("packages")
            if value in ("find:", "find_namespace:"):
                modules.packages = _cfg_find(parser, namespace=value == "find_namespace:")
            else:
                modules.packages = list(_cfg_list(value))
        if "package_dir" in opts:
            modules.package_dir = _cfg_mapping(opts["package_dir"])
            modules.present.add("package_dir")
        if "namespace_packages" in opts:
            modules.namespace_packages = _cfg_list(opts["namespace_packages"])
            modules.present.add("namespace_packages")
        if "install_requires" in opts:
            deps.present.add("install_requires")
            value = opts["install_requires"]
            if value.strip().startswith("file:"):
                deps.unresolved.add("install_requires")
            else:
                _add_requirements(deps, value.splitlines(), None, "setup.cfg install_requires")
    if parser.has_section("options.extras_require"):
        deps.present.add("extras_require")
        for extra, value in parser["options.extras_require"].items():
            deps.extras.setdefault(canonical_name(extra), [])
            _add_requirements(deps, value.splitlines(), extra, f"setup.cfg extras_require[{extra}]")
    return modules, deps


def _cfg_find(parser: configparser.ConfigParser, namespace: bool) -> list[str | FindPackages]:
    section = "options.packages.find"
    if not parser.has_section(section):
        return [FindPackages(namespace=namespace)]
    find = parser[section]
    where = find.get("where", ".").strip() or "."
    include = tuple(_cfg_list(find.get("include", ""))) or ("*",)
    exclude = tuple(_cfg_list(find.get("exclude", "")))
    return [FindPackages(where=where, include=include, exclude=exclude, namespace=namespace)]


# ---------------------------------------------------------------------------
# pyproject.toml
# ---------------------------------------------------------------------------


def parse_pyproject(content: str) -> tuple[RawModuleData, RawDependencyData]:
    try:
        doc = tomli.loads(content)
    except tomli.TOMLDecodeError as exc:
        raise MalformedToml(str(exc)) from None

    modules = RawModuleData(provenance=Provenance.ConfigToml)
    deps = RawDependencyData()
    project = doc.get("project", {}) or {}
    dynamic = set(project.get("dynamic", []) or [])
    if "dependencies" in project:
        deps.present.add("install_requires")
        _add_requirements(deps, project["dependencies"], None, "pyproject dependencies")
    elif "dependencies" in dynamic:
        deps.present.add("install_requires")
        deps.unresolved.add("install_requires")
    if "optional-dependencies" in project:
        deps.present.add("extras_require")
        for extra, reqs in project["optional-dependencies"].items():
            deps.extras.setdefault(canonical_name(extra), [])
            _add_requirements(deps, reqs, extra, f"pyproject optional-dependencies[{extra}]")
    elif "optional-dependencies" in dynamic:
        deps.present.add("extras_require")
        deps.unresolved.add("extras_require")

    st = (doc.get("tool", {}) or {}).get("setuptools", {}) or {}
    if "py-modules" in st:
        modules.py_modules = [str(m) for m in st["py-modules"]]
        modules.present.add("py_modules")
    if "package-dir" in st:
        modules.package_dir = {str(k): str(v) for k, v in st["package-dir"].items()}
        modules.present.add("package_dir")
    if "packages" in st:
        modules.present.add("packages")
        packages = st["packages"]
        if isinstance(packages, list):
            modules.packages = [str(p) for p in packages]
        elif isinstance(packages, dict) and "find" in packages:
            find = packages["find"] or {}
            wheres = find.get("where", ["."]) or ["."]
            if isinstance(wheres, str):
                wheres = [wheres]
            include = tuple(find.get("include", ["*"])) or ("*",)
            exclude = tuple(find.get("exclude", []))
            namespace = bool(find.get("namespaces", True))
            modules.packages = [FindPackages(str(w), include, exclude, namespace) for w in wheres]
        else:
            modules.unresolved.add("packages")
    return modules, deps


# ---------------------------------------------------------------------------
# setup.py
# ---------------------------------------------------------------------------


class _Bindings:
    """Module-level names assigned exactly once, with their literal values."""

    def __init__(self, tree: ast.Module):
        counts: dict[str, int] = {}
        nodes: dict[str, ast.expr] = {}
        for node in ast.walk(tree):
            targets: list[ast.expr] = []
            value = None
            if isinstance(node, ast.Assign):
                targets, value = node.targets, node.value
            elif isinstance(node, ast.AnnAssign) and node.value is not None:
                targets, value = [node.target], node.value
            elif isinstance(node, (ast.AugAssign, ast.For, ast.NamedExpr, ast.With)):
                rebound = [i.optional_vars for i in node.items if i.optional_vars] if isinstance(node, ast.With) else [node.target]
                for target in rebound:
                    for t in ast.walk(target):
                        if isinstance(t, ast.Name):
                            counts[t.id] = counts.get(t.id, 0) + 2
                continue
            for target in targets:
                if isinstance(target, ast.Name):
                    counts[target.id] = counts.get(target.id, 0) + 1
                    nodes[target.id] = value
                else:
                    for t in ast.walk(target):
                        if isinstance(t, ast.Name):
                            counts[t.id] = counts.get(t.id, 0) + 2
        self._nodes = {k: v for k, v in nodes.items() if counts.get(k) == 1}
        self._resolving: set[str] = set()

    def lookup(self, name: str, resolver) -> Any:
        node = self._nodes.get(name)
        if node is None or name in self._resolving:
            return Unresolvable
        self._resolving.add(name)
        try:
            return resolver(node)
        finally:
            self._resolving.discard(name)


_FIND_FUNCS = {"find_packages": False, "find_namespace_packages": True}


def _call_name(func: ast.expr) -> str | None:
    if isinstance(func, ast.Name):
        return func.id
    if isinstance(func, ast.Attribute):
        return func.attr
    return None


class _Evaluator:
    def __init__(self, bindings: _Bindings):
        self.bindings = bindings

    def __call__(self, node: ast.expr) -> Any:
        if isinstance(node, ast.Constant) and isinstance(node.value, (str, int, float, bool, type(None))):
            return node.value
        if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
            items = []
            for elt in node.elts:
                if isinstance(elt, ast.Starred):
                    inner = self(elt.value)
                    if inner is Unresolvable or not isinstance(inner, list):
                        return Unresolvable
                    items.extend(inner)
                    continue
                value = self(elt)
                if value is Unresolvable:
                    return Unresolvable
                items.append(value)
            return items
        if isinstance(node, ast.Dict):
            out = {}
            for k, v in zip(node.keys, node.values):
                if k is None:
                    inner = self(v)
                    if not isinstance(inner, dict):
                        return Unresolvable
                    out.update(inner)
                    continue
                key, value = self(k), self(v)
                if key is Unresolvable or value is Unresolvable or isinstance(key, (list, dict)):
                    return Unresolvable
                out[key] = value
            return out
        if isinstance(node, ast.Name):
            return self.bindings.lookup(node.id, self)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
            left, right = self(node.left), self(node.right)
            if isinstance(left, list) and isinstance(right, list):
                return left + right
            if isinstance(left, str) and isinstance(right, str):
                return left + right
            if isinstance(left, FindPackages) and isinstance(right, list):
                return [left] + right
            if isinstance(left, list) and isinstance(right, FindPackages):
                return left + [right]
            return Unresolvable
        if isinstance(node, ast.Call):
            name = _call_name(node.func)
            if name in _FIND_FUNCS:
                return self._find(node, _FIND_FUNCS[name])
            if name == "dict" and not node.args:
                out = {}
                for kw in node.keywords:
                    value = self(kw.value)
                    if value is Unresolvable:
                        return Unresolvable
                    if kw.arg is None:
                        if not isinstance(value, dict):
                            return Unresolvable
                        out.update(value)
                    else:
                        out[kw.arg] = value
                return out
            if name in ("list", "tuple") and len(node.args) == 1 and not node.keywords:
                value = self(node.args[0])
                return list(value) if isinstance(value, list) else Unresolvable
        return Unresolvable

    def _find(self, node: ast.Call, namespace: bool) -> Any:
        params = {"where": ".", "exclude": (), "include": ("*",)}
        order = ("where", "exclude", "include")
        for i, arg in enumerate(node.args[:3]):
            params[order[i]] = self(arg)
        for kw in node.keywords:
            if kw.arg in params:
                params[kw.arg] = self(kw.value)
        if any(v is Unresolvable for v in params.values()):
            return Unresolvable
        where = params["where"]
        if not isinstance(where, str):
            return Unresolvable
        include, exclude = params["include"], params["exclude"]
        if isinstance(include, str):
            include = (include,)
        if isinstance(exclude, str):
            exclude = (exclude,)
        return FindPackages(where or ".", tuple(include) or ("*",), tuple(exclude), namespace)


def _find_setup_call(tree: ast.Module) -> ast.Call | None:
    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and _call_name(node.func) == "setup":
            return node
    return None


def setup_py_keywords(content: str) -> dict[str, Any]:
    """Resolved value (or :data:`Unresolvable`) of each tracked ``setup()`` keyword present."""
    try:
        tree = ast.parse(content)
    except (SyntaxError, ValueError) as exc:
        raise ScriptUnparseable(f"setup.py does not parse: {exc}") from None
    call = _find_setup_call(tree)
    if call is None:
        raise NoSetupCall("no setup(...) call found in setup.py")
    evaluate = _Evaluator(_Bindings(tree))
    found: dict[str, Any] = {}
    for kw in call.keywords:
        if kw.arg is None:
            spread = evaluate(kw.value)
            if isinstance(spread, dict):
                for key, value in spread.items():
                    if key in TRACKED_KEYS:
                        found[key] = value
            continue
        if kw.arg in TRACKED_KEYS:
            found[kw.arg] = evaluate(kw.value)
    return found


def _string_list(value: Any) -> list[str] | Any:
    if isinstance(value, str):
        return [value]
    if isinstance(value, list) and all(isinstance(v, str) for v in value):
        return value
    return Unresolvable


def _requirement_lines(value: Any) -> list[str] | Any:
    if isinstance(value, str):
        return value.splitlines()
    return _string_list(value)


def extract_setup_py(content: str) -> tuple[RawModuleData, RawDependencyData]:
    found = setup_py_keywords(content)
    modules = RawModuleData(provenance=Provenance.ConfigScript)
    deps = RawDependencyData()

    for key in ("py_modules", "namespace_packages"):
        if key in found:
            modules.present.add(key)
            value = _string_list(found[key])
            if value is Unresolvable:
                modules.unresolved.add(key)
            else:
                setattr(modules, key, list(value))
    if "packages" in found:
        modules.present.add("packages")
        value = found["packages"]
        if isinstance(value, FindPackages):
            modules.packages = [value]
        elif isinstance(value, list) and all(isinstance(v, (str, FindPackages)) for v in value):
            modules.packages = list(value)
        else:
            modules.unresolved.add("packages")
    if "package_dir" in found:
        modules.present.add("package_dir")
        value = found["package_dir"]
        if isinstance(value, dict) and all(isinstance(k, str) and isinstance(v, str) for k, v in value.items()):
            modules.package_dir = dict(value)
        else:
            modules.unresolved.add("package_dir")

    if "install_requires" in found:
        deps.present.add("install_requires")
        lines = _requirement_lines(found["install_requires"])
        if lines is Unresolvable:
            deps.unresolved.add("install_requires")
        else:
            _add_requirements(deps, lines, None, "setup.py install_requires")
    if "extras_require" in found:
        deps.present.add("extras_require")
        value = found["extras_require"]
        if not isinstance(value, dict):
            deps.unresolved.add("extras_require")
        else:
            for extra, reqs in value.items():
                lines = _requirement_lines(reqs)
                if not isinstance(extra, str) or lines is Unresolvable:
                    deps.unresolved.add("extras_require")
                    continue
                name, _, marker = extra.partition(":")
                deps.extras.setdefault(canonical_name(name), [])
                for line in lines:
                    if marker and line.strip():
                        line = f"{line.strip()}; {marker}" if ";" not in line else f"{line.strip()} and ({marker})"
                    _add_requirements(deps, [line], name, f"setup.py extras_require[{extra}]")
    return modules, deps


# ---------------------------------------------------------------------------
# layering
# ---------------------------------------------------------------------------

_PARSERS = {"setup.py": extract_setup_py, "setup.cfg": parse_setup_cfg, "pyproject.toml": parse_pyproject}


def parse_config_file(filename: str, content: str) -> tuple[RawModuleData, RawDependencyData]:
    return _PARSERS[filename](content)


def merge_layers(
    layers: list[tuple[RawModuleData, RawDependencyData]],
) -> tuple[RawModuleData, RawDependencyData]:
    """Combine per-file results, highest precedence first.

    Each keyword comes from the first layer that gives it a resolved value;
    keywords unresolved everywhere stay unresolved.
    """
    modules = RawModuleData()
    deps = RawDependencyData()
    for key in MODULE_KEYS:
        for mod, _ in layers:
            if key in mod.present and key not in mod.unresolved:
                setattr(modules, key, getattr(mod, key))
                modules.present.add(key)
                if modules.provenance is None:
                    modules.provenance = mod.provenance
                break
        else:
            if any(key in mod.unresolved for mod, _ in layers):
                modules.unresolved.add(key)
                modules.present.add(key)
    if modules.provenance is None and layers:
        modules.provenance = layers[0][0].provenance
    for key, attr in (("install_requires", "install"), ("extras_require", "extras")):
        for _, dep in layers:
            if key in dep.present and key not in dep.unresolved:
                setattr(deps, attr, getattr(dep, attr))
                deps.present.add(key)
                break
        else:
            if any(key in dep.unresolved for _, dep in layers):
                deps.unresolved.add(key)
                deps.present.add(key)
    for _, dep in layers:
        deps.warnings.extend(dep.warnings)
    return modules, deps
