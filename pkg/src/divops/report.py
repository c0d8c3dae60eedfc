"""Verification reports: every failed identity is collected, not just the first."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Failure:
    check: str
    where: tuple
    detail: str = ""

    def __str__(self):
        loc = ", ".join(str(w) for w in self.where)
        msg = f"{self.check}[{loc}]"
        return f"{msg}: {self.detail}" if self.detail else msg


@dataclass
class Report:
    name: str
    checks: int = 0
    failures: list[Failure] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def check(self, condition: bool, check: str, where: tuple, detail: str = "") -> bool:
        self.checks += 1
        if not condition:
            self.failures.append(Failure(check, tuple(where), detail))
        return condition

    def merge(self, other: "Report") -> "Report":
        self.checks += other.checks
        self.failures.extend(other.failures)
        self.notes.extend(other.notes)
        return self

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{self.name}: {status} ({self.checks} checks, {len(self.failures)} failures)"

    def lines(self, limit: int | None = None) -> list[str]:
        out = [self.summary()]
        out.extend(f"  note: {n}" for n in self.notes)
        shown = self.failures if limit is None else self.failures[:limit]
        out.extend(f"  {f}" for f in shown)
        if limit is not None and len(self.failures) > limit:
            out.append(f"  ... {len(self.failures) - limit} more")
        return out
