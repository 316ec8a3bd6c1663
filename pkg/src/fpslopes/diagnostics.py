"""Analysis diagnostics: possible run-time errors and precision notes."""

from __future__ import annotations

from dataclasses import dataclass

# kinds that flag a possible run-time error in the analyzed program
RUNTIME_ERROR_KINDS = frozenset(
    {
        "possible-division-by-zero",
        "possible-invalid-operand",
        "possible-overflow",
        "possible-nan",
    }
)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    where: str | None = None
    instant: int | None = None

    @property
    def is_runtime_error(self) -> bool:
        return self.kind in RUNTIME_ERROR_KINDS

    def render(self) -> str:
        loc = f" at {self.where}" if self.where else ""
        t = f" (instant {self.instant})" if self.instant is not None else ""
        return f"{self.kind}{loc}{t}: {self.message}"
