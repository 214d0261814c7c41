"""Shared builders for the test suite."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

from modguard import fixtures as F
from modguard.archive import classify_distribution, open_archive
from modguard.index import IndexStore
from modguard.pep import EnvironmentProfile

LINUX_310 = {
    "implementation_name": "cpython",
    "implementation_version": "3.10.12",
    "os_name": "posix",
    "platform_machine": "x86_64",
    "platform_python_implementation": "CPython",
    "platform_release": "6.1.0",
    "platform_system": "Linux",
    "platform_version": "#1 SMP",
    "python_full_version": "3.10.12",
    "python_version": "3.10",
    "sys_platform": "linux",
}


def linux_env(**overrides: str) -> EnvironmentProfile:
    return EnvironmentProfile.from_mapping({**LINUX_310, **overrides})


def archive_of(spec: F.FixtureSpec):
    return open_archive(F.build_fixture(spec), classify_distribution(spec.filename), spec.filename)


def store_of(specs, root=None) -> IndexStore:
    store = IndexStore(root)
    for spec in specs:
        store.ingest_bytes(F.build_fixture(spec), spec.filename)
    return store


def pip_wheel(spec: F.FixtureSpec, workdir: Path) -> tuple[str, bytes]:
    """Build ``spec`` as an sdist and let the real build backend turn it into a wheel."""
    src = workdir / spec.filename
    src.write_bytes(F.build_fixture(spec))
    out = workdir / "wheels"
    subprocess.run(
        [sys.executable, "-m", "pip", "wheel", "--no-deps", "--no-build-isolation", "--no-index", "-q", "-w", str(out), str(src)],
        check=True,
        capture_output=True,
    )
    (wheel,) = out.glob("*.whl")
    return wheel.name, wheel.read_bytes()


def pip_install_target(archive_path: Path, target: Path) -> None:
    subprocess.run(
        [sys.executable, "-m", "pip", "install", "--no-deps", "--no-build-isolation", "--no-index", "--no-compile", "-q", "-t", str(target), str(archive_path)],
        check=True,
        capture_output=True,
    )


# one line per acceptance criterion, echoed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []
