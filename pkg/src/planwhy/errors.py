"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PlanwhyError(Exception):
    """Base class for every error raised by this package."""

    code = "error"


class ParseError(PlanwhyError):
    """Syntax error in PDDL or plan text, with position information."""

    code = "parse-error"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}" if line else message)
        self.reason = message
        self.line = line
        self.column = column


class UnsupportedConstructError(ParseError):
    """A PDDL construct outside the supported subset, reported by name."""

    code = "unsupported-construct"

    def __init__(self, construct: str, line: int = 0, column: int = 0):
        super().__init__(f"unsupported construct: {construct}", line, column)
        self.construct = construct


class SemanticError(ParseError):
    """Well-formed text that violates a model invariant (unknown type,
    undeclared parameter, duplicate name, ...)."""

    code = "semantic-error"


class GroundingLimitError(PlanwhyError):
    code = "grounding-limit"

    def __init__(self, count: int, cap: int):
        super().__init__(f"grounding produced more than {cap} actions (cap {cap} exceeded at {count})")
        self.cap = cap


class PlanningError(PlanwhyError):
    code = "planning-error"


class ExternalPlannerError(PlanningError):
    code = "external-planner-error"


class ExternalPlannerFailure(ExternalPlannerError):
    """Nonzero exit status from the external planner process."""

    code = "external-planner-failure"

    def __init__(self, returncode: int, stderr: str = ""):
        super().__init__(f"external planner exited with status {returncode}: {stderr.strip()[:500]}")
        self.returncode = returncode


class ExternalPlannerTimeout(ExternalPlannerError):
    code = "external-planner-timeout"


class ExternalPlanRejected(ExternalPlannerError):
    """The external planner produced a plan that fails validation."""

    code = "external-plan-rejected"

    def __init__(self, report):
        super().__init__(f"external plan rejected by validator: {report.violation}")
        self.report = report


class PlanFormatError(ParseError):
    """Malformed plan line."""

    code = "plan-format-error"


class SessionError(PlanwhyError):
    code = "session-error"


class UnknownIdError(SessionError):
    code = "unknown-id"


class StaleSuggestionError(SessionError):
    """Suggested action is not among the applicable alternatives."""

    code = "stale-suggestion"


class WorkspaceFormatError(SessionError):
    code = "workspace-format"
