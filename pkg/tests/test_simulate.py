from __future__ import annotations

import io
import itertools
import zipfile

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import archive_of
from modguard import fixtures as F
from modguard.archive import DistributionKind, build_file_tree, open_archive
from modguard.errors import NoModuleEvidence
from modguard.metadata import FindPackages, RawModuleData, parse_record
from modguard.simulate import (
    ModuleSet,
    apply_namespace_packages,
    apply_package_dir,
    enumerate_modules,
    extract_modules,
    find_packages,
    prune_to_packages,
    simulate,
    top_level_names,
)
from modguard.tree import VirtualFileTree

PUGS_TREE = [
    "setup.py",
    "README.md",
    "pugs/__init__.py",
    "pugs/core.py",
    "namespace_pugs/__init__.py",
    "namespace_pugs/util.py",
    "tests/test_core.py",
]


def tree_paths(tree: VirtualFileTree) -> set[str]:
    return {p for p, _ in tree.iter_files()}


# -- package_dir -----------------------------------------------------------------


def test_package_dir_renames_pugs():
    tree = apply_package_dir(VirtualFileTree.from_paths(PUGS_TREE), {"pugs_lib": "pugs"})
    paths = tree_paths(tree)
    assert {"pugs_lib/__init__.py", "pugs_lib/core.py"} <= paths
    assert not any(p.startswith("pugs/") for p in paths)


def test_package_dir_empty_is_identity():
    tree = VirtualFileTree.from_paths(PUGS_TREE)
    assert tree_paths(apply_package_dir(tree, {})) == set(PUGS_TREE)


def test_package_dir_missing_target_warns():
    warnings: list[str] = []
    tree = apply_package_dir(VirtualFileTree.from_paths(PUGS_TREE), {"x": "missing"}, warnings=warnings)
    assert tree_paths(tree) == set(PUGS_TREE)
    assert warnings and "missing" in warnings[0]


def test_package_dir_root_mapping_flattens_src():
    tree = VirtualFileTree.from_paths(["setup.py", "src/mod/__init__.py", "src/mod/a.py"])
    assert {"mod/__init__.py", "mod/a.py"} <= tree_paths(apply_package_dir(tree, {"": "src"}))


def test_package_dir_breadth_first_match():
    tree = VirtualFileTree.from_paths(["deep/er/lib/a.py", "lib/b.py", "other/lib/c.py"])
    out = apply_package_dir(tree, {"pkg": "lib"})
    assert "pkg/b.py" in tree_paths(out)
    assert "other/lib/c.py" in tree_paths(out)


def test_package_dir_config_root():
    tree = VirtualFileTree.from_paths(["x-1.0/setup.py", "x-1.0/src/x/__init__.py"])
    out = apply_package_dir(tree, {"x": "src/x"}, config_root="x-1.0")
    assert "x/__init__.py" in tree_paths(out)


segment = st.from_regex(r"[a-z]{2,5}", fullmatch=True)


@given(st.lists(segment, min_size=1, max_size=5, unique=True), st.data())
@settings(max_examples=60)
def test_package_dir_order_insensitive(pre_names, data):
    paths = [f"{n}/__init__.py" for n in pre_names] + ["setup.py"]
    tree = VirtualFileTree.from_paths(paths)
    mapping = [(f"post_{n}", n) for n in pre_names]
    orders = [mapping, list(reversed(mapping)), data.draw(st.permutations(mapping))]
    results = {frozenset(tree_paths(apply_package_dir(tree, dict(order)))) for order in orders}
    assert len(results) == 1


# -- find_packages ---------------------------------------------------------------


def test_find_packages_requires_init():
    tree = VirtualFileTree.from_paths(["a/__init__.py", "a/b/__init__.py", "a/data/x.txt", "c/mod.py", "tests/__init__.py"])
    assert find_packages(tree, FindPackages()) == ["a", "a.b", "tests"]
    assert find_packages(tree, FindPackages(exclude=("tests", "tests.*"))) == ["a", "a.b"]
    assert find_packages(tree, FindPackages(namespace=True, exclude=("tests*",))) == ["a", "a.b", "a.data", "c"]


def test_find_packages_where():
    tree = VirtualFileTree.from_paths(["src/pkg/__init__.py", "src/pkg/sub/__init__.py", "pkg2/__init__.py"])
    assert find_packages(tree, FindPackages(where="src")) == ["pkg", "pkg.sub"]
    assert find_packages(tree, FindPackages(where="nope")) == []


# -- prune -----------------------------------------------------------------------


def test_prune_keeps_listed_packages():
    tree = apply_package_dir(VirtualFileTree.from_paths(PUGS_TREE), {"pugs_lib": "pugs"})
    out = prune_to_packages(tree, ["pugs_lib", "namespace_pugs"], [])
    assert tree_paths(out) == {"pugs_lib/__init__.py", "pugs_lib/core.py", "namespace_pugs/__init__.py", "namespace_pugs/util.py"}


def test_prune_py_modules_only():
    tree = VirtualFileTree.from_paths(["mod1/__init__.py", "mod2.py", "setup.py"])
    assert tree_paths(prune_to_packages(tree, [], ["mod2"])) == {"mod2.py"}


def test_prune_nothing():
    tree = VirtualFileTree.from_paths(["mod1/__init__.py", "mod2.py"])
    assert tree_paths(prune_to_packages(tree, [], [])) == set()


def test_prune_subpackage_needs_listing():
    tree = VirtualFileTree.from_paths(["mod1/__init__.py", "mod1/sub/__init__.py", "mod1/sub/x.py"])
    assert tree_paths(prune_to_packages(tree, ["mod1"], [])) == {"mod1/__init__.py"}
    assert tree_paths(prune_to_packages(tree, ["mod1", "mod1.sub"], [])) == {"mod1/__init__.py", "mod1/sub/__init__.py", "mod1/sub/x.py"}


# -- namespaces -------------------------------------------------------------------


def test_namespace_pugs():
    tree = VirtualFileTree.from_paths(["namespace_pugs/__init__.py", "namespace_pugs/util.py"])
    out = tree_paths(apply_namespace_packages(tree, ["namespace_pugs"], "pugs", "0.0.1"))
    assert out == {"namespace_pugs/util.py", "pugs-0.0.1-py3-nspkg.pth"}


def test_namespace_empty_is_identity():
    tree = VirtualFileTree.from_paths(["a/__init__.py"])
    assert tree_paths(apply_namespace_packages(tree, [], "x", "1")) == {"a/__init__.py"}


def test_namespace_draft_pkg():
    tree = VirtualFileTree.from_paths(["mod1/__init__.py", "mod2.py"])
    out = tree_paths(apply_namespace_packages(tree, ["mod1"], "pkg", "0.0.1"))
    assert out == {"mod2.py", "pkg-0.0.1-py3-nspkg.pth"}


# -- enumerate / top-level ----------------------------------------------------------


def test_enumerate_skips_data_files():
    tree = VirtualFileTree.from_paths(["pkg/__init__.py", "pkg/logo.png", "pkg/table.csv", "x-nspkg.pth"])
    assert enumerate_modules(tree).paths == {"pkg/__init__.py", "x-nspkg.pth"}


def test_enumerate_empty():
    assert len(enumerate_modules(VirtualFileTree())) == 0


@pytest.mark.parametrize(
    "paths, expected",
    [(["jwt/exceptions.py"], {"jwt"}), ([], set()), (["board.py"], {"board"}), (["a-1-py3-nspkg.pth", "a/b/c.py"], {"a"})],
)
def test_top_level_names(paths, expected):
    assert top_level_names(ModuleSet(paths)) == expected


def test_module_set_rejects_bad_paths():
    with pytest.raises(ValueError):
        ModuleSet(["../escape.py"])
    with pytest.raises(ValueError):
        ModuleSet(["/abs.py"])


def test_module_set_json_round_trip():
    ms = ModuleSet({"a.py": "sha256:00", "b/c.py": None}, provenance="x")
    assert ModuleSet.from_json(ms.to_json()) == ms


# -- full simulation and dispatch ------------------------------------------------------


def test_simulate_pugs_raw_data():
    raw = RawModuleData(
        packages=["pugs_lib", "namespace_pugs"],
        package_dir={"pugs_lib": "pugs"},
        namespace_packages=["namespace_pugs"],
        present={"packages", "package_dir", "namespace_packages"},
    )
    out = simulate(VirtualFileTree.from_paths(PUGS_TREE), raw, "pugs", "0.0.1")
    assert out.paths == set(F.pugs().expected)


def test_extract_draft_wheel():
    ms = extract_modules(archive_of(F.pkg_wheel()))
    assert ms.paths == {"mod1/__init__.py", "mod2.py"}
    assert all(d and d.startswith("sha256:") for d in ms.entries.values())


def test_extract_pugs_sdist():
    assert extract_modules(archive_of(F.pugs())).paths == set(F.pugs().expected)


def test_extract_no_evidence():
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("x-1.0/README.md", "hi")
    archive = open_archive(buf.getvalue(), DistributionKind.SdistZip, "x-1.0.zip")
    with pytest.raises(NoModuleEvidence):
        extract_modules(archive)


def test_flat_layout_via_find_packages():
    spec = F.FixtureSpec(
        name="flat",
        version="1.0",
        files={"src/flat/__init__.py": "", "src/flat/core.py": "", "tests/__init__.py": ""},
        packages=FindPackages(where="src"),
        package_dir={"": "src"},
        expected=["flat/__init__.py", "flat/core.py"],
    )
    assert extract_modules(archive_of(spec)).paths == set(spec.expected)


def test_digests_track_content_through_rename():
    ms = extract_modules(archive_of(F.pugs()))
    wheel = extract_modules(archive_of(F.FixtureSpec("pugs", "0.0.1", DistributionKind.Wheel, files={"pugs_lib/core.py": F.pugs().files["pugs/core.py"]})))
    assert ms.digest("pugs_lib/core.py") == wheel.digest("pugs_lib/core.py")


@pytest.mark.parametrize("seed", range(5))
def test_wheel_tree_matches_record(seed):
    spec = F.synthetic_package(seed, DistributionKind.Wheel)
    archive = archive_of(spec)
    tree = build_file_tree(archive)
    meta = next(p for p in tree.root.children if p.endswith(".dist-info"))
    record = parse_record(archive.read_text(f"{meta}/RECORD"))
    tree.remove(meta)
    assert enumerate_modules(tree).py_paths() == {p for p in record if p.endswith(".py")}


def test_egg_extraction():
    spec = F.with_kind(F.pkg_namespace_sdist(), DistributionKind.Egg)
    assert extract_modules(archive_of(spec)).paths == set(spec.expected_modules())
