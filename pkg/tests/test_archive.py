from __future__ import annotations

import builtins
import io
import os
import tarfile
import zipfile

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import archive_of
from modguard import fixtures as F
from modguard.archive import (
    DistributionKind,
    build_file_tree,
    classify_distribution,
    locate_metadata_dir,
    open_archive,
    parse_dist_filename,
)
from modguard.errors import (
    CorruptArchive,
    NameVersionUnparseable,
    PathConflict,
    TruncatedArchive,
    UnknownDistribution,
)


def zip_of(files: dict[str, bytes], dirs: tuple[str, ...] = ()) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for d in dirs:
            zf.writestr(d.rstrip("/") + "/", b"")
        for path, data in files.items():
            zf.writestr(path, data)
    return buf.getvalue()


def targz_of(files: dict[str, bytes]) -> bytes:
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w:gz") as tf:
        for path, data in files.items():
            info = tarfile.TarInfo(path)
            info.size = len(data)
            tf.addfile(info, io.BytesIO(data))
    return buf.getvalue()


@pytest.mark.parametrize(
    "filename, kind",
    [
        ("pkg-0.0.1-py3-none-any.whl", DistributionKind.Wheel),
        ("pkg-0.0.1.tar.gz", DistributionKind.SdistTarGz),
        ("pkg-0.0.1.zip", DistributionKind.SdistZip),
        ("pkg-0.0.1-py3.10.egg", DistributionKind.Egg),
    ],
)
def test_classify(filename, kind):
    assert classify_distribution(filename) is kind


@pytest.mark.parametrize("filename", ["pkg-0.0.1.rpm", "pkg-0.0.1.tar.bz2", "pkg"])
def test_classify_unknown(filename):
    with pytest.raises(UnknownDistribution):
        classify_distribution(filename)


def test_one_file_wheel():
    archive = open_archive(zip_of({"mod.py": b"x = 1\n"}), DistributionKind.Wheel)
    assert len(archive.entries) == 1
    assert archive.read("mod.py") == b"x = 1\n"


def test_pugs_sdist_layout():
    archive = archive_of(F.pugs())
    wrapper = archive.wrapper()
    assert wrapper == "pugs-0.0.1"
    assert f"{wrapper}/setup.py" in archive
    assert any(e.path.startswith(f"{wrapper}/pugs/") for e in archive.files)
    tree = build_file_tree(archive)
    root = tree.get(wrapper)
    assert root.child("setup.py").is_file and root.child("pugs").is_dir()


def test_truncated_targz():
    data = F.build_fixture(F.pugs())
    with pytest.raises(TruncatedArchive):
        archive = open_archive(data[: len(data) // 2], DistributionKind.SdistTarGz)
        for entry in archive.files:
            archive.read(entry.path)


def test_truncated_zip():
    data = zip_of({"a.py": b"a" * 1000})
    with pytest.raises(CorruptArchive):
        open_archive(data[: len(data) - 30], DistributionKind.Wheel)


def test_garbage_is_corrupt():
    with pytest.raises(CorruptArchive):
        open_archive(b"not an archive at all", DistributionKind.SdistTarGz)
    with pytest.raises(CorruptArchive):
        open_archive(b"not an archive at all", DistributionKind.Wheel)


def test_reads_return_declared_size():
    archive = archive_of(F.pugs())
    for entry in archive.files:
        assert len(archive.read(entry.path)) == entry.size


def test_paths_are_sanitized():
    archive = open_archive(zip_of({"./a/b.py": b"", "/etc/passwd": b"", "../up.py": b"", "c\\d.py": b""}), DistributionKind.Wheel)
    paths = {e.path for e in archive.entries}
    assert paths == {"a/b.py", "c/d.py"}
    for p in paths:
        assert not p.startswith("/") and ".." not in p.split("/")


def test_metadata_dir_wheel():
    archive = archive_of(F.pkg_wheel())
    assert locate_metadata_dir(archive) == ("pkg-0.0.1.dist-info", "dist-info")


def test_metadata_dir_sdist_egg_info():
    archive = open_archive(
        targz_of({"pkg-0.0.1/setup.py": b"", "pkg-0.0.1/pkg.egg-info/PKG-INFO": b""}), DistributionKind.SdistTarGz
    )
    assert locate_metadata_dir(archive) == ("pkg-0.0.1/pkg.egg-info", "egg-info")


def test_metadata_dir_absent():
    archive = open_archive(targz_of({"pkg-0.0.1/setup.py": b""}), DistributionKind.SdistTarGz)
    assert locate_metadata_dir(archive) is None


def test_metadata_dir_tie_break_warns():
    archive = open_archive(
        zip_of({"b.dist-info/METADATA": b"", "a.dist-info/METADATA": b"", "x/c.dist-info/METADATA": b""}),
        DistributionKind.Wheel,
    )
    assert locate_metadata_dir(archive) == ("a.dist-info", "dist-info")
    assert archive.warnings


def test_egg_metadata_flavor():
    archive = open_archive(zip_of({"EGG-INFO/PKG-INFO": b"", "m.py": b""}), DistributionKind.Egg)
    assert locate_metadata_dir(archive) == ("EGG-INFO", "EGG-INFO")


def test_tree_two_leaves():
    archive = open_archive(zip_of({"a/b.py": b"", "a/c.py": b""}), DistributionKind.Wheel)
    tree = build_file_tree(archive)
    assert set(tree.root.children) == {"a"}
    assert set(tree.get("a").children) == {"b.py", "c.py"}


def test_tree_path_conflict():
    archive = open_archive(zip_of({"a": b"", "a/b.py": b""}), DistributionKind.Wheel)
    with pytest.raises(PathConflict):
        build_file_tree(archive)


def test_tree_conflict_with_directory_entry():
    archive = open_archive(zip_of({"a": b""}, dirs=("a",)), DistributionKind.Wheel)
    with pytest.raises(PathConflict):
        build_file_tree(archive)


@pytest.mark.parametrize(
    "filename, expected",
    [
        ("pkg-0.0.1-py3-none-any.whl", ("pkg", "0.0.1")),
        ("opencv-python-headless-4.5.5.tar.gz", ("opencv-python-headless", "4.5.5")),
        ("pugs-0.0.1-py3.10.egg", ("pugs", "0.0.1")),
    ],
)
def test_parse_dist_filename(filename, expected):
    assert parse_dist_filename(filename) == expected


def test_parse_dist_filename_rejects():
    with pytest.raises(NameVersionUnparseable):
        parse_dist_filename("noversion.whl")


segment = st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True)
file_paths = st.lists(st.lists(segment, min_size=1, max_size=4).map(lambda s: "/".join(s) + ".py"), max_size=25, unique=True)


@given(file_paths, st.sampled_from([DistributionKind.Wheel, DistributionKind.SdistTarGz]))
@settings(max_examples=60, deadline=None)
def test_leaf_count_equals_file_entries(paths, kind):
    # a path can't be both a file and a prefix directory of another
    stems = {p[:-3] for p in paths}
    paths = [p for p in paths if not any(s.startswith(p[:-3] + "/") for s in stems)]
    files = {p: p.encode() for p in paths}
    data = zip_of(files) if kind is DistributionKind.Wheel else targz_of(files)
    archive = open_archive(data, kind)
    tree = build_file_tree(archive)
    assert tree.file_count() == len(archive.files)
    assert {p for p, _ in tree.iter_files()} == set(paths)


def test_no_disk_writes(monkeypatch):
    data = F.build_fixture(F.pugs())
    wheel = F.build_fixture(F.pkg_wheel())
    real_open = builtins.open
    real_os_open = os.open

    def guarded_open(file, mode="r", *args, **kwargs):
        if any(c in mode for c in "wax+"):
            raise AssertionError(f"write attempted: {file}")
        return real_open(file, mode, *args, **kwargs)

    def guarded_os_open(path, flags, *args, **kwargs):
        if flags & (os.O_WRONLY | os.O_RDWR | os.O_CREAT):
            raise AssertionError(f"write attempted: {path}")
        return real_os_open(path, flags, *args, **kwargs)

    monkeypatch.setattr(builtins, "open", guarded_open)
    monkeypatch.setattr(io, "open", guarded_open)
    monkeypatch.setattr(os, "open", guarded_os_open)
    for blob, kind in ((data, DistributionKind.SdistTarGz), (wheel, DistributionKind.Wheel)):
        archive = open_archive(blob, kind)
        locate_metadata_dir(archive)
        build_file_tree(archive)
        for entry in archive.files:
            archive.read(entry.path)
