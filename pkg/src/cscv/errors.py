"""Exception hierarchy shared by every cscv module."""

from __future__ import annotations


class CSCVError(Exception):
    """Base class for all diagnostics raised by cscv."""


class FrontendError(CSCVError):
    """A diagnostic tied to a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        self.message = message
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class MCLSyntaxError(FrontendError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.expected = expected
        self.found = found
        msg = f"expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg, line, col)


class ResolutionError(FrontendError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        self.name = name
        super().__init__(f"unresolved name {name!r}", line, col)


class KindError(FrontendError):
    """A construct used where its kind forbids it (e.g. assignment in a view)."""


class TypeCheckError(FrontendError):
    """Operand types do not fit the operator or declaration."""


class UnknownVariable(FrontendError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        self.name = name
        super().__init__(f"unknown state variable {name!r}", line, col)


class NestedOld(FrontendError):
    def __init__(self, line: int = 0, col: int = 0):
        super().__init__("old(...) may not be nested", line, col)


class SnapshotError(CSCVError):
    pass


class TypeMismatch(SnapshotError):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"type mismatch for {name!r}" + (f": {detail}" if detail else ""))


class MalformedAddress(SnapshotError):
    def __init__(self, value: object):
        self.value = value
        super().__init__(f"malformed address {value!r}")


class AttackerNotInActors(SnapshotError):
    def __init__(self, attacker: str):
        self.attacker = attacker
        super().__init__(f"attacker {attacker!r} is not listed in actors")


class MissingValue(CSCVError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no value for state variable {name!r} (snapshot, initializer or --default-zero)")


class NoExternalFunctions(CSCVError):
    def __init__(self, contract: str = ""):
        super().__init__(f"contract {contract!r} declares no external functions")


class SameFunction(CSCVError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"shared_variable_count needs two distinct functions, got {name!r} twice")


class UnsupportedForm(CSCVError):
    def __init__(self, form: str):
        self.form = form
        super().__init__(f"temporal form {form!r} cannot be spatialized (only 'always' is supported)")


class ReplayDivergence(CSCVError):
    def __init__(self, step: int, detail: str = ""):
        self.step = step
        super().__init__(f"replay diverged at step {step}" + (f": {detail}" if detail else ""))


class BackendUnavailable(CSCVError):
    pass


class DomainTooLarge(CSCVError):
    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"bounded search space {size} exceeds cap {cap}")
