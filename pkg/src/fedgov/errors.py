"""Exception hierarchy shared by every fedgov module."""

from __future__ import annotations

from dataclasses import dataclass


class FedGovError(Exception):
    """Base class for all errors raised by fedgov."""


# -- model -------------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    """One structured validation finding.

    ``code`` is one of ``DanglingReference``, ``InvalidInterval``,
    ``TauDomainMismatch``, ``PiDomainViolation``, ``DuplicateSymbol`` or
    ``MalformedDocument``.
    """

    code: str
    message: str

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


class ModelValidationError(FedGovError):
    def __init__(self, issues: list[Issue]):
        self.issues = list(issues)
        super().__init__("; ".join(f"{i.code}: {i.message}" for i in self.issues))

    @property
    def codes(self) -> set[str]:
        return {i.code for i in self.issues}


class ModelIOError(FedGovError, OSError):
    pass


class ModelParseError(FedGovError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


# -- evaluation ----------------------------------------------------------------

class UnknownTokenError(FedGovError, KeyError):
    def __init__(self, kind: str, token: str):
        self.kind = kind
        self.token = token
        super().__init__(f"unknown {kind}: {token!r}")

    def __str__(self) -> str:
        return self.args[0]


class NotAssignedError(FedGovError):
    pass


class EmptyRequestError(FedGovError, ValueError):
    pass


class MalformedPredicateError(FedGovError, ValueError):
    pass


# -- workflow ------------------------------------------------------------------

class WorkflowError(FedGovError):
    pass


class WorkflowParseError(WorkflowError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class DuplicateStepId(WorkflowError):
    pass


class DanglingDataRef(WorkflowError):
    pass


class CycleDetected(WorkflowError):
    pass


class UnknownKey(WorkflowError):
    pass


class UnboundStep(WorkflowError):
    pass


# -- simulation ----------------------------------------------------------------

class SimulationError(FedGovError):
    pass


class UnhostedObject(SimulationError):
    pass


class DuplicateHosting(SimulationError):
    pass


class NodeConfigError(SimulationError):
    pass


# -- onboarding ----------------------------------------------------------------

class SchemaViolation(FedGovError, ValueError):
    def __init__(self, diagnostics: dict[str, str]):
        self.diagnostics = dict(sorted(diagnostics.items()))
        super().__init__(
            "; ".join(f"{k}: {v}" for k, v in self.diagnostics.items())
        )


class InvalidState(FedGovError):
    pass


class ProjectNotPublished(FedGovError):
    pass


class UnknownField(FedGovError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown field"
