from __future__ import annotations

import io
import subprocess
import sys
import tarfile
import zipfile

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import archive_of, pip_wheel
from modguard import fixtures as F
from modguard.archive import DistributionKind, open_archive
from modguard.errors import InvalidRequirement, MalformedRecordLine
from modguard.metadata import (
    Provenance,
    parse_metadata_core,
    parse_namespace_packages,
    parse_record,
    parse_requires_txt,
    parse_sources,
    parse_top_level,
)
from modguard.pep import parse_requirement
from modguard.simulate import extract_modules, modules_from_sources


def reqs(items) -> list[str]:
    return [str(r) for r in items]


# -- RECORD -------------------------------------------------------------------

RECORD = """mod1/__init__.py,sha256=47DEQpj8HBSa-_TImW-5JCeuQeRkm5NMpJWZG3hSuFU,0
mod2.py,sha256=abc,10
pkg-0.0.1.dist-info/METADATA,sha256=def,100
pkg-0.0.1.dist-info/RECORD,,
"""


def test_record_modules():
    assert parse_record(RECORD) == ["mod1/__init__.py", "mod2.py"]


def test_record_empty():
    assert parse_record("") == []


def test_record_malformed_line_number():
    with pytest.raises(MalformedRecordLine) as info:
        parse_record("a.py,sha256=x,1\nbroken-line\n")
    assert info.value.lineno == 2


def test_record_keeps_nspkg_and_purelib():
    content = "pkg-0.0.1-py3.10-nspkg.pth,,\npkg-0.0.1.data/purelib/extra.py,,\npkg-0.0.1.data/scripts/tool.py,,\nREADME.txt,,\n"
    assert parse_record(content) == ["pkg-0.0.1-py3.10-nspkg.pth", "extra.py"]


record_paths = st.lists(
    st.one_of(
        st.from_regex(r"[a-z]{1,6}(/[a-z]{1,6}){0,2}\.py", fullmatch=True),
        st.from_regex(r"[a-z]{1,4}-0\.1\.dist-info/[A-Z]{3,8}(\.py)?", fullmatch=True),
    ),
    max_size=20,
)


@given(record_paths)
def test_record_never_reports_dist_info(paths):
    out = parse_record("".join(f"{p},,\n" for p in paths))
    assert not any(".dist-info/" in p for p in out)
    assert set(out) == {p for p in paths if ".dist-info/" not in p and p.endswith(".py")}


# -- plain-list files ---------------------------------------------------------


@pytest.mark.parametrize("content, expected", [("mod1\nmod2\n", ["mod1", "mod2"]), ("", []), ("bs4\n", ["bs4"]), ("  a  \n\n b\n", ["a", "b"])])
def test_top_level(content, expected):
    assert parse_top_level(content) == expected


def test_sources_keeps_everything():
    out = parse_sources("setup.py\nmod1/__init__.py\nmod1/add.py\n")
    assert "setup.py" in out
    assert parse_sources("") == []
    assert parse_sources("mod1/add.py\n") == ["mod1/add.py"]


def test_sources_from_real_egg_info(tmp_path):
    """SOURCES.txt produced by the real build backend lists the module file."""
    spec = F.FixtureSpec(
        name="adder",
        version="1.0",
        files={"mod1/__init__.py": "", "mod1/add.py": "def add(a, b):\n    return a + b\n"},
        packages=["mod1"],
        expected=["mod1/__init__.py", "mod1/add.py"],
    )
    src = tmp_path / spec.filename
    src.write_bytes(F.build_fixture(spec))
    with tarfile.open(src) as tf:
        tf.extractall(tmp_path)
    root = tmp_path / "adder-1.0"
    subprocess.run([sys.executable, "setup.py", "-q", "egg_info"], cwd=root, check=True, capture_output=True)
    real = (root / "adder.egg-info" / "SOURCES.txt").read_text()
    assert "mod1/add.py" in parse_sources(real)
    tops = parse_top_level((root / "adder.egg-info" / "top_level.txt").read_text())
    assert set(modules_from_sources(parse_sources(real), tops)) == {"mod1/__init__.py", "mod1/add.py"}


@pytest.mark.parametrize("content, expected", [("namespace_pugs\n", ["namespace_pugs"]), ("", []), ("a.b\n", ["a.b"])])
def test_namespace_packages(content, expected):
    assert parse_namespace_packages(content) == expected


def test_sources_reconstruction_filters():
    sources = ["setup.py", "pkg.egg-info/PKG-INFO", "mod1/__init__.py", "mod1/add.py", "mod2.py", "tests/test_x.py", "docs/conf.py"]
    assert modules_from_sources(sources, ["mod1", "mod2"]) == {
        "mod1/__init__.py": "mod1/__init__.py",
        "mod1/add.py": "mod1/add.py",
        "mod2.py": "mod2.py",
    }


def test_sources_reconstruction_src_layout():
    sources = ["setup.cfg", "src/mod1/__init__.py", "src/pkg.egg-info/SOURCES.txt", "tests/test_a.py"]
    assert modules_from_sources(sources, ["mod1"]) == {"mod1/__init__.py": "src/mod1/__init__.py"}


# -- requires.txt ---------------------------------------------------------------


def test_requires_txt_install():
    data = parse_requires_txt("python-dateutil>=2.8.1\n")
    assert reqs(data.install) == ["python-dateutil>=2.8.1"]


def test_requires_txt_extra():
    data = parse_requires_txt("[toml]\nhypothesis>=5.5.3\n")
    assert data.install == [] and reqs(data.extras["toml"]) == ["hypothesis>=5.5.3"]


def test_requires_txt_marker_section():
    data = parse_requires_txt("[:python_version < '3.10']\nnumpy>=1.20.3\n")
    (req,) = data.install
    assert req.name.normalized == "numpy" and str(req.specifier) == ">=1.20.3"
    assert req.marker == parse_requirement("x; python_version < '3.10'").marker


def test_requires_txt_extra_with_marker_and_dedup():
    data = parse_requires_txt("pytz\npytz\n[Test_Tools:os_name == 'nt']\npywin32\n")
    assert reqs(data.install) == ["pytz"]
    (req,) = data.extras["test-tools"]
    assert req.marker is not None and "os_name" in str(req.marker)


def test_requires_txt_bad_line():
    assert parse_requires_txt("good\nbad line here\n").warnings
    with pytest.raises(InvalidRequirement) as info:
        parse_requires_txt("[dev]\nbad line here\n", strict=True)
    assert "[dev]" in info.value.context


# -- core metadata ---------------------------------------------------------------


def test_metadata_core_install():
    data = parse_metadata_core("Metadata-Version: 2.1\nName: x\nRequires-Dist: pytz (>=2020.1)\n")
    assert reqs(data.install) == ["pytz>=2020.1"]


def test_metadata_core_empty():
    data = parse_metadata_core("Metadata-Version: 2.1\nName: x\n")
    assert data.install == [] and data.extras == {}


def test_metadata_core_provides_extra_registered():
    data = parse_metadata_core("Name: x\nProvides-Extra: docs\n")
    assert data.extras == {"docs": []}


def test_metadata_core_stops_at_body():
    data = parse_metadata_core("Name: x\n\nRequires-Dist: ignored\n")
    assert data.install == []


def test_metadata_core_strict_line_number():
    with pytest.raises(InvalidRequirement) as info:
        parse_metadata_core("Name: x\nRequires-Dist: a b c\n", strict=True)
    assert "line 2" in info.value.context


def test_metadata_core_extra_from_real_wheel(tmp_path):
    """Route of an extra-gated requirement, checked on METADATA written by the real backend."""
    spec = F.FixtureSpec(
        name="versioneer",
        version="0.28",
        files={"versioneer.py": "def get_version():\n    return '0.28'\n"},
        extras={"toml": ["hypothesis>=5.5.3"]},
    )
    name, data = pip_wheel(spec, tmp_path)
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        meta = zf.read("versioneer-0.28.dist-info/METADATA").decode()
    parsed = parse_metadata_core(meta)
    assert parsed.install == []
    assert reqs(parsed.extras["toml"]) == ["hypothesis>=5.5.3"]


def test_metadata_core_extra_marker_kept(tmp_path):
    name, data = pip_wheel(F.with_kind(F.versioneer(), DistributionKind.SdistTarGz), tmp_path)
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        meta = zf.read("versioneer-0.28.dist-info/METADATA").decode()
    (req,) = parse_metadata_core(meta).extras["toml"]
    assert req.name.normalized == "tomli"
    assert str(req.marker).replace('"', "'") == "python_version < '3.11'"


# -- ground-truth equivalence ----------------------------------------------------------


@pytest.mark.parametrize("flavor", ["setup_py", "setup_cfg", "pyproject"])
def test_sources_match_wheel_record(tmp_path, flavor):
    spec = F.FixtureSpec(
        name="twin",
        version="2.0",
        config=flavor,
        files={"twin/__init__.py": "", "twin/sub/__init__.py": "", "twin/sub/deep.py": "X = 1\n", "helper.py": "", "tests/test_t.py": ""},
        packages=["twin", "twin.sub"],
        py_modules=["helper"],
        egg_info=True,
        expected=["helper.py", "twin/__init__.py", "twin/sub/__init__.py", "twin/sub/deep.py"],
    )
    from_sources = extract_modules(archive_of(spec))
    assert from_sources.provenance == Provenance.TopLevelPlusSources.value
    wheel_name, wheel_bytes = pip_wheel(spec, tmp_path)
    from_record = extract_modules(open_archive(wheel_bytes, DistributionKind.Wheel, wheel_name))
    assert from_record.provenance == Provenance.Record.value
    assert set(from_sources.paths) == set(from_record.paths) == set(spec.expected)
