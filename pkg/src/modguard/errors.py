"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class ModguardError(Exception):
    """Base class for all errors raised by modguard."""


# -- names, versions, requirements -------------------------------------------


class InvalidName(ModguardError, ValueError):
    pass


class InvalidVersion(ModguardError, ValueError):
    pass


class InvalidSpecifier(ModguardError, ValueError):
    pass


class InvalidMarker(ModguardError, ValueError):
    pass


class UnknownVariable(InvalidMarker):
    def __init__(self, variable: str):
        super().__init__(f"unknown marker variable {variable!r}")
        self.variable = variable


class InvalidRequirement(ModguardError, ValueError):
    """Requirement text violates the grammar; ``offset`` points at the first bad character."""

    def __init__(self, message: str, text: str = "", offset: int = 0, context: str = ""):
        where = f" at offset {offset}" if text else ""
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}{message}{where}: {text!r}" if text else f"{prefix}{message}")
        self.text = text
        self.offset = offset
        self.context = context


# -- archives ---------------------------------------------------------------


class UnknownDistribution(ModguardError, ValueError):
    pass


class CorruptArchive(ModguardError):
    pass


class TruncatedArchive(CorruptArchive):
    pass


class PathConflict(ModguardError):
    pass


# -- metadata / config ------------------------------------------------------


class MalformedRecordLine(ModguardError, ValueError):
    def __init__(self, lineno: int, line: str):
        super().__init__(f"RECORD line {lineno} is malformed: {line!r}")
        self.lineno = lineno


class MalformedIni(ModguardError, ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


class MalformedToml(ModguardError, ValueError):
    pass


class ScriptUnparseable(ModguardError, ValueError):
    pass


class NoSetupCall(ModguardError, ValueError):
    pass


# -- simulation / index -----------------------------------------------------


class NoModuleEvidence(ModguardError):
    pass


class NameVersionUnparseable(ModguardError, ValueError):
    pass


class NetworkError(ModguardError):
    pass


class IndexFormatError(ModguardError):
    pass


class MissingRecord(ModguardError, KeyError):
    def __init__(self, node: str):
        super().__init__(node)
        self.node = node

    def __str__(self) -> str:
        return f"no index record for {self.node}"


# -- resolution -------------------------------------------------------------


class ResolutionError(ModguardError):
    pass


class Unsat(ResolutionError):
    """No assignment satisfies the requirements.

    ``chain`` lists requirement texts from a root down to the requirement that
    could not be satisfied in the last explored branch.
    """

    def __init__(self, name: str, chain: list[str], constraints: list[str]):
        detail = " -> ".join(chain) if chain else name
        super().__init__(f"cannot satisfy {name}: {detail} (constraints: {', '.join(constraints)})")
        self.name = name
        self.chain = chain
        self.constraints = constraints


class MissingPackage(ResolutionError):
    def __init__(self, name: str, chain: list[str] | None = None):
        super().__init__(f"no versions of {name!r} in the index")
        self.name = name
        self.chain = chain or []


class SpecInvalid(ModguardError, ValueError):
    pass
