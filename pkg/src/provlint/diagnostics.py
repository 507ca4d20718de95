"""Diagnostics shared by the validator, the PROV-JSON parser, and builders."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class Severity(Enum):
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Diagnostic:
    """One finding: a short machine code, a message, and an optional subject id."""

    code: str
    message: str
    severity: Severity = Severity.ERROR
    subject: str | None = None

    def as_dict(self) -> dict:
        d = {"severity": self.severity.value, "code": self.code, "message": self.message}
        if self.subject is not None:
            d["subject"] = self.subject
        return d

    def render(self) -> str:
        where = f" [{self.subject}]" if self.subject else ""
        return f"{self.severity.value}: {self.code}: {self.message}{where}"


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)
