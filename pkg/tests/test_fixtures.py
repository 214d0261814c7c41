from __future__ import annotations

import json

import pytest

from helpers import archive_of, linux_env, store_of
from modguard import fixtures as F
from modguard.archive import DistributionKind, locate_metadata_dir
from modguard.errors import SpecInvalid
from modguard.pep import parse_requirement
from modguard.resolver import resolve
from modguard.simulate import extract_modules


def all_named_specs() -> list[F.FixtureSpec]:
    specs = [F.pugs(), F.pkg_wheel(), F.pkg_namespace_sdist(), F.versioneer(), F.hgijson(), F.fibex_converter()]
    specs += [*F.jwt_pair(), *F.slugify_pair(), *F.crypto_pair()]
    for preset in F.PRESETS.values():
        specs += preset()
    return specs


SPECS = all_named_specs()


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.name}-{s.version}-{s.kind.value}")
def test_build_is_byte_reproducible(spec):
    assert F.build_fixture(spec) == F.build_fixture(spec)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.name}-{s.version}-{s.kind.value}")
def test_round_trip_to_declared_modules(spec):
    assert sorted(extract_modules(archive_of(spec)).paths) == spec.expected_modules()


@pytest.mark.parametrize("i", range(9))
@pytest.mark.parametrize("kind", list(DistributionKind))
def test_synthetic_round_trip(i, kind):
    spec = F.synthetic_package(i, kind)
    assert sorted(extract_modules(archive_of(spec)).paths) == spec.expected_modules()


@pytest.mark.parametrize("seed", range(3))
def test_corpus_round_trip(seed):
    for spec in F.gen_random_corpus(seed):
        assert sorted(extract_modules(archive_of(spec)).paths) == spec.expected_modules()


@pytest.mark.parametrize("spec", [F.pugs(), F.synthetic_package(4, DistributionKind.SdistZip), F.crypto_pair()[0]], ids=str)
def test_spec_json_round_trip(spec):
    doc = json.loads(json.dumps(spec.to_json()))
    again = F.FixtureSpec.from_json(doc)
    assert again == spec
    assert F.build_fixture(again) == F.build_fixture(spec)


def test_empty_tree_spec():
    spec = F.FixtureSpec("empty", "1.0", files={})
    archive = archive_of(spec)
    assert {e.path for e in archive.files} == {"empty-1.0/setup.py", "empty-1.0/PKG-INFO"}


def test_empty_wheel_has_only_metadata():
    spec = F.FixtureSpec("empty", "1.0", DistributionKind.Wheel)
    archive = archive_of(spec)
    meta, _ = locate_metadata_dir(archive)
    assert all(e.path.startswith(meta + "/") for e in archive.files)


def test_jwt_pair_bodies_differ():
    jwt, pyjwt = F.jwt_pair()
    assert jwt.files["jwt/exceptions.py"] != pyjwt.files["jwt/exceptions.py"]
    assert jwt.kind is pyjwt.kind is DistributionKind.Wheel


@pytest.mark.parametrize(
    "bad",
    [
        F.FixtureSpec("", "1.0"),
        F.FixtureSpec("x", "not a version"),
        F.FixtureSpec("x", "1.0", install_requires=["bad req here"]),
        F.FixtureSpec("x", "1.0", config="poetry"),
        F.FixtureSpec("x", "1.0", files={"../escape.py": ""}),
        F.FixtureSpec("x", "1.0", config="pyproject", namespace_packages=["x"], packages=["x"], expected=[]),
    ],
)
def test_invalid_specs(bad):
    with pytest.raises(SpecInvalid):
        F.build_fixture(bad)


def test_random_index_reproducible():
    assert F.gen_random_index(0) == F.gen_random_index(0)
    assert F.gen_random_index(0) != F.gen_random_index(1)


def test_random_index_bounds():
    specs = F.gen_random_index(3, n_projects=8, n_versions=5, max_deps=3)
    assert len({s.name for s in specs}) <= 8
    assert all(len(s.install_requires) <= 3 for s in specs)
    ops = {c.op for s in specs for r in s.install_requires for c in parse_requirement(r).specifier.clauses}
    assert ops <= {"==", ">=", "<="}
    with pytest.raises(SpecInvalid):
        F.gen_random_index(0, n_projects=9)


def test_trivial_index_is_solvable():
    specs = F.gen_random_index(5, n_projects=1, max_deps=0)
    g, stats = resolve(["p0"], linux_env(), store_of(specs))
    assert set(g.nodes) == {"p0"} and stats.backtracks == 0


def test_with_kind_keeps_content():
    spec = F.with_kind(F.pugs(), DistributionKind.SdistZip)
    assert spec.files == F.pugs().files and spec.filename.endswith(".zip")
