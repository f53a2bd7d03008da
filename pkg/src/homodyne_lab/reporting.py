"""Violation records and deterministic serialization helpers for reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Any


@dataclass
class Violation:
    """A single failed check with everything needed to reproduce it."""

    case_id: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    value: float = 0.0
    threshold: float = 0.0

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def format_float(value: float) -> str:
    """Floats in CSV output carry 12 significant digits."""
    return f"{value:.12g}"


def dump_json(payload: dict[str, Any]) -> str:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
