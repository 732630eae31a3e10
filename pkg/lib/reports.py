"""
Check reports shared by the certifier and the verifiers.

A report is a list of named checks; each check records whether it held and
the exact values behind it. Failing a check never raises.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .utils import format_rational


@dataclass
class CheckItem:
    label: str
    ok: bool
    detail: Dict[str, Any] = field(default_factory=dict)


@dataclass
class CheckReport:
    """Named collection of pass/fail checks."""

    name: str
    items: List[CheckItem] = field(default_factory=list)
    notes: Dict[str, Any] = field(default_factory=dict)

    def record(self, label: str, ok: bool, **detail: Any) -> bool:
        self.items.append(CheckItem(label, bool(ok), detail))
        return bool(ok)

    def equality(self, label: str, lhs: Fraction, rhs: Fraction) -> bool:
        return self.record(label, lhs == rhs, lhs=lhs, rhs=rhs)

    @property
    def passed(self) -> bool:
        return all(item.ok for item in self.items)

    @property
    def failures(self) -> List[CheckItem]:
        return [item for item in self.items if not item.ok]

    def find(self, prefix: str) -> Optional[CheckItem]:
        for item in self.items:
            if item.label.startswith(prefix):
                return item
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "notes": {k: _jsonable(v) for k, v in self.notes.items()},
            "checks": [
                {"label": item.label, "ok": item.ok, **{k: _jsonable(v) for k, v in item.detail.items()}}
                for item in self.items
            ],
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value
