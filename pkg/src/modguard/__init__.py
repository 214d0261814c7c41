"""Installation-free module extraction, dependency resolution and module conflict detection."""

from .archive import DistributionKind, PackageArchive, classify_distribution, open_archive, open_path
from .conflicts import (
    ConflictFinding,
    ConflictReport,
    Pattern,
    StdlibCatalog,
    detect_module_in_dep,
    detect_module_to_lib,
    detect_module_to_tpl,
    summarize,
)
from .index import IndexStore, PackageRecord, fetch_remote
from .pep import (
    EnvironmentProfile,
    ProjectName,
    Requirement,
    Version,
    VersionSpecifier,
    eval_marker,
    normalize_name,
    parse_marker,
    parse_requirement,
    parse_specifier,
    parse_version,
)
from .resolver import DependencyGraph, Metric, ResolutionStats, compare_graphs, prioritize, resolve
from .simulate import ModuleSet, extract_modules

__version__ = "0.1.0"

__all__ = [
    "ConflictFinding",
    "ConflictReport",
    "DependencyGraph",
    "DistributionKind",
    "EnvironmentProfile",
    "IndexStore",
    "Metric",
    "ModuleSet",
    "PackageArchive",
    "PackageRecord",
    "Pattern",
    "ProjectName",
    "Requirement",
    "ResolutionStats",
    "StdlibCatalog",
    "Version",
    "VersionSpecifier",
    "classify_distribution",
    "compare_graphs",
    "detect_module_in_dep",
    "detect_module_to_lib",
    "detect_module_to_tpl",
    "eval_marker",
    "extract_modules",
    "fetch_remote",
    "normalize_name",
    "open_archive",
    "open_path",
    "parse_marker",
    "parse_requirement",
    "parse_specifier",
    "parse_version",
    "prioritize",
    "resolve",
    "summarize",
]
