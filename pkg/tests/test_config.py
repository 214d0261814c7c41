from __future__ import annotations

import json
import subprocess
import sys
import textwrap

import pytest

from modguard.config import extract_setup_py, merge_layers, parse_config_file, parse_pyproject, parse_setup_cfg
from modguard.errors import MalformedIni, MalformedToml, NoSetupCall, ScriptUnparseable
from modguard.metadata import FindPackages, Provenance


def reqs(items) -> list[str]:
    return [str(r) for r in items]


# -- setup.cfg ---------------------------------------------------------------


def test_cfg_packages_list():
    modules, _ = parse_setup_cfg("[options]\npackages =\n    mod1\n")
    assert modules.packages == ["mod1"]
    assert modules.provenance is Provenance.ConfigCfg


def test_cfg_empty():
    modules, deps = parse_setup_cfg("")
    assert modules.is_empty() and deps.is_empty()


def test_cfg_extras():
    _, deps = parse_setup_cfg("[options.extras_require]\ntoml =\n    hypothesis>=5.5.3\n")
    assert reqs(deps.extras["toml"]) == ["hypothesis>=5.5.3"]


def test_cfg_find_with_options():
    content = "[options]\npackages = find:\npackage_dir =\n    = src\n[options.packages.find]\nwhere = src\nexclude =\n    tests*\n"
    modules, _ = parse_setup_cfg(content)
    assert modules.packages == [FindPackages(where="src", exclude=("tests*",))]
    assert modules.package_dir == {"": "src"}


def test_cfg_install_requires_and_inline_list():
    modules, deps = parse_setup_cfg("[options]\npy_modules = a, b\ninstall_requires =\n    pytz>=2020.1\n    numpy\n")
    assert modules.py_modules == ["a", "b"]
    assert reqs(deps.install) == ["pytz>=2020.1", "numpy"]


def test_cfg_file_directive_unresolved():
    _, deps = parse_setup_cfg("[options]\ninstall_requires = file: requirements.txt\n")
    assert "install_requires" in deps.unresolved


def test_cfg_malformed_line():
    with pytest.raises(MalformedIni) as info:
        parse_setup_cfg("no header here\n")
    assert info.value.lineno == 1


# -- pyproject.toml ------------------------------------------------------------


def test_pyproject_dependencies():
    _, deps = parse_pyproject('[project]\nname = "x"\ndependencies = ["pytest>=6.0"]\n')
    assert reqs(deps.install) == ["pytest>=6.0"]


def test_pyproject_without_setuptools_table():
    modules, _ = parse_pyproject('[project]\nname = "x"\n')
    assert modules.is_empty()


def test_pyproject_package_dir():
    modules, _ = parse_pyproject('[tool.setuptools]\npackages = ["pugs_lib"]\npackage-dir = {"pugs_lib" = "pugs"}\npy-modules = ["m"]\n')
    assert modules.package_dir == {"pugs_lib": "pugs"}
    assert modules.packages == ["pugs_lib"] and modules.py_modules == ["m"]
    assert modules.provenance is Provenance.ConfigToml


def test_pyproject_optional_dependencies_and_find():
    content = '[project]\noptional-dependencies = {toml = ["hypothesis>=5.5.3"]}\n[tool.setuptools.packages.find]\nwhere = ["src"]\n'
    modules, deps = parse_pyproject(content)
    assert reqs(deps.extras["toml"]) == ["hypothesis>=5.5.3"]
    (find,) = modules.packages
    assert isinstance(find, FindPackages) and find.where == "src"


def test_pyproject_malformed():
    with pytest.raises(MalformedToml):
        parse_pyproject("[project\nname=")


# -- setup.py ---------------------------------------------------------------


def test_setup_py_literals():
    modules, _ = extract_setup_py(
        'from setuptools import setup\nsetup(packages=["mod1"], namespace_packages=["mod1"], py_modules=["mod2"])\n'
    )
    assert modules.packages == ["mod1"]
    assert modules.namespace_packages == ["mod1"]
    assert modules.py_modules == ["mod2"]


def test_setup_py_open_read_unresolvable():
    _, deps = extract_setup_py('from setuptools import setup\nsetup(install_requires=open("reqs").read().split())\n')
    assert "install_requires" in deps.unresolved and deps.install == []


def test_setup_py_find_packages_arguments():
    modules, _ = extract_setup_py(
        'import setuptools\nsetuptools.setup(packages=setuptools.find_packages(where="src", exclude=["tests"]), package_dir={"": "src"})\n'
    )
    assert modules.packages == [FindPackages(where="src", exclude=("tests",))]
    assert modules.package_dir == {"": "src"}


def test_setup_py_reassigned_variable_is_unresolvable():
    modules, _ = extract_setup_py('from setuptools import setup\nP = ["a"]\nP = ["b"]\nsetup(packages=P)\n')
    assert "packages" in modules.unresolved


def test_setup_py_errors():
    with pytest.raises(ScriptUnparseable):
        extract_setup_py("def broken(:\n")
    with pytest.raises(NoSetupCall):
        extract_setup_py("print('hello')\n")


def test_setup_py_is_never_executed(tmp_path):
    marker = tmp_path / "executed"
    script = f"open({str(marker)!r}, 'w').write('x')\nfrom setuptools import setup\nsetup(py_modules=['m'])\n"
    modules, _ = extract_setup_py(script)
    assert modules.py_modules == ["m"]
    assert not marker.exists()


# Each script is also executed once against a recording stub of setuptools;
# the recorded keywords are the ground truth for the static extraction.
DATAFLOW_SCRIPTS = [
    'from setuptools import setup\ndeps = ["pytz>=2020.1"]\nsetup(install_requires=deps)\n',
    'from setuptools import setup\nBASE = ["a>=1"]\nEXTRA = ["b<2"]\nsetup(install_requires=BASE + EXTRA, py_modules=["m"])\n',
    'import setuptools\nNS = ["ns"]\nsetuptools.setup(packages=["ns", "ns.sub"], namespace_packages=NS, package_dir={"ns": "lib/ns"})\n',
    'from setuptools import setup\nX = {"toml": ["hypothesis>=5.5.3"], "test": ["pytest>=6.0"]}\nsetup(extras_require=X)\n',
    'from setuptools import setup\nkw = dict(py_modules=["ignored"])\nsetup(name="n", py_modules=["solo"], install_requires="six\\nattrs>=20")\n',
]

_STUB = """
import json, sys, types
script, out = sys.argv[1], sys.argv[2]
stub = types.ModuleType("setuptools")
def setup(**kw):
    json.dump({k: kw.get(k) for k in ("packages", "py_modules", "namespace_packages", "package_dir", "install_requires", "extras_require")}, open(out, "w"))
stub.setup = setup
sys.modules["setuptools"] = stub
sys.argv = [script]
exec(compile(open(script).read(), "setup.py", "exec"), {"__name__": "__main__"})
"""


@pytest.mark.parametrize("script", DATAFLOW_SCRIPTS)
def test_setup_py_matches_recorded_execution(tmp_path, script):
    (tmp_path / "setup.py").write_text(script)
    (tmp_path / "stub.py").write_text(_STUB)
    out = tmp_path / "kw.json"
    subprocess.run([sys.executable, "stub.py", "setup.py", str(out)], cwd=tmp_path, check=True)
    truth = json.loads(out.read_text())
    modules, deps = extract_setup_py(script)
    assert modules.packages == (truth["packages"] or [])
    assert modules.py_modules == (truth["py_modules"] or [])
    assert modules.namespace_packages == (truth["namespace_packages"] or [])
    assert modules.package_dir == (truth["package_dir"] or {})
    install = truth["install_requires"] or []
    if isinstance(install, str):
        install = install.splitlines()
    assert reqs(deps.install) == install
    assert {k: reqs(v) for k, v in deps.extras.items()} == (truth["extras_require"] or {})


# -- layering ------------------------------------------------------------------


def test_layer_precedence_per_keyword():
    script = parse_config_file("setup.py", 'from setuptools import setup\nsetup(py_modules=["from_py"], packages=compute())\n')
    cfg = parse_config_file("setup.cfg", "[options]\npackages =\n    from_cfg\npy_modules = from_cfg_mod\n")
    toml = parse_config_file("pyproject.toml", '[tool.setuptools]\npackages = ["from_toml"]\npy-modules = ["t"]\npackage-dir = {"from_toml" = "x"}\n')
    modules, _ = merge_layers([script, cfg, toml])
    assert modules.py_modules == ["from_py"]
    # unresolvable in setup.py falls through to setup.cfg
    assert modules.packages == ["from_cfg"]
    # only pyproject.toml gives package-dir
    assert modules.package_dir == {"from_toml": "x"}
    assert not modules.unresolved


def test_layer_unresolved_everywhere_stays_unresolved():
    script = parse_config_file("setup.py", "from setuptools import setup\nsetup(install_requires=load())\n")
    modules, deps = merge_layers([script])
    assert "install_requires" in deps.unresolved


def test_layer_dependencies_first_resolved_wins():
    script = parse_config_file("setup.py", "from setuptools import setup\nsetup(install_requires=open('r').read().split())\n")
    cfg = parse_config_file("setup.cfg", "[options]\ninstall_requires =\n    six\n")
    toml = parse_config_file("pyproject.toml", '[project]\ndependencies = ["attrs"]\n')
    _, deps = merge_layers([script, cfg, toml])
    assert reqs(deps.install) == ["six"]


def test_config_script_dedent_tolerant():
    script = textwrap.dedent(
        """
        import setuptools

        if True:
            pass

        setuptools.setup(
            name="x",
            py_modules=["a"],
        )
        """
    )
    modules, _ = extract_setup_py(script)
    assert modules.py_modules == ["a"]
