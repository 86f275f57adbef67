"""
Verification Reports

Every checker in the package returns a Report: one entry per square,
identity or pointwise law it examined, with a witness when the entry
failed. Reports are plain data so the command line can render them as
JSON, CSV or a table.

Key features:
- Entries carry an expected outcome; a report is ok when every entry meets it
- Deterministic ordering by entry id
- Summary logging (INFO) with one WARNING per unexpected entry
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

logger = logging.getLogger(__name__)


@dataclass
class SquareResult:
    """Outcome of one checked square or identity."""

    id: str
    passed: bool
    witness: Optional[Dict[str, Any]] = None
    expected: bool = True
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.passed == self.expected

    def to_dict(self) -> Dict[str, Any]:
        entry: Dict[str, Any] = {"id": self.id, "pass": self.passed}
        if not self.expected:
            entry["expected"] = False
        if self.witness is not None:
            entry["witness"] = self.witness
        if self.detail:
            entry["detail"] = self.detail
        return entry


@dataclass
class Report:
    """
    Results of one verification target on one instance.

    Args:
        instance (str): Instance name, e.g. "posets"
        check (str): Check name, e.g. "segal"
    """

    instance: str
    check: str
    squares: List[SquareResult] = field(default_factory=list)

    def add(self, id: str, passed: bool, witness: Optional[Dict[str, Any]] = None,
            expected: bool = True, detail: str = "") -> SquareResult:
        result = SquareResult(id, bool(passed), witness, expected, detail)
        self.squares.append(result)
        logger.debug("%s/%s %s: %s", self.instance, self.check, id, "pass" if passed else "fail")
        return result

    def extend(self, other: "Report", prefix: str = "") -> None:
        """Append the entries of another report, ids prefixed."""
        for s in other.squares:
            self.squares.append(SquareResult(prefix + s.id, s.passed, s.witness, s.expected, s.detail))

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.squares)

    def failures(self) -> List[SquareResult]:
        """Entries whose outcome differs from the expected one."""
        return [s for s in self.sorted_squares() if not s.ok]

    def find(self, id: str) -> SquareResult:
        for s in self.squares:
            if s.id == id:
                return s
        raise KeyError(id)

    def sorted_squares(self) -> List[SquareResult]:
        return sorted(self.squares, key=lambda s: s.id)

    def log_summary(self) -> None:
        logger.info("%s/%s: %d entries, %s", self.instance, self.check, len(self.squares), "ok" if self.ok else "FAILED")
        for s in self.failures():
            logger.warning("%s/%s %s did not meet expectation (witness %s)", self.instance, self.check, s.id, s.witness)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "instance": self.instance,
            "check": self.check,
            "ok": self.ok,
            "squares": [s.to_dict() for s in self.sorted_squares()],
        }


def combine(instance: str, check: str, reports: Iterable[Report]) -> Report:
    """Merge several reports into one, each prefixed with its own check name."""
    merged = Report(instance, check)
    for r in reports:
        merged.extend(r, f"{r.check}/")
    return merged
