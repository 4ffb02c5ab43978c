"""Check reports shared by every module, and JSON conversion helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy containers and scalars to plain Python."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


@dataclass
class Report:
    """Outcome of one check.

    ``passed`` is ``None`` when the check was skipped (for instance a
    group-level check on an algebra without a realization).
    """

    check: str
    passed: bool | None
    residual: float
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.passed)

    @property
    def witness(self):
        return self.details.get("witness")

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "pass": self.passed,
            "residual": float(self.residual),
            "details": jsonable(self.details),
        }
