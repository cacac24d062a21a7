"""Machine-checkable claims: the unit compared by contradiction, novelty and delta classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ArgumentError

DIRECTIONS = ("positive", "negative", "zero")
DISTANCE_FIELDS = ("subject", "predicate", "direction", "dataset_class", "method_class")


@dataclass(frozen=True)
class Claim:
    subject: str
    predicate: str
    direction: str
    dataset_class: str = ""
    method_class: str = ""
    magnitude: float | None = None

    def __post_init__(self):
        if not self.subject or not self.predicate:
            raise ArgumentError("claim subject and predicate must be non-empty")
        if self.direction not in DIRECTIONS:
            raise ArgumentError(f"claim direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if self.magnitude is not None:
            mag = float(self.magnitude)
            if not math.isfinite(mag):
                raise ArgumentError("claim magnitude must be finite")
            object.__setattr__(self, "magnitude", mag)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.dataset_class)

    def to_dict(self) -> dict:
        return {
            "dataset_class": self.dataset_class,
            "direction": self.direction,
            "magnitude": self.magnitude,
            "method_class": self.method_class,
            "predicate": self.predicate,
            "subject": self.subject,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Claim":
        return cls(
            subject=d["subject"],
            predicate=d["predicate"],
            direction=d["direction"],
            dataset_class=d.get("dataset_class", ""),
            method_class=d.get("method_class", ""),
            magnitude=d.get("magnitude"),
        )

    @classmethod
    def parse(cls, text: str) -> "Claim":
        """Parse ``subject:predicate:direction[:dataset[:method[:magnitude]]]``."""
        parts = text.split(":")
        if len(parts) < 3 or len(parts) > 6:
            raise ArgumentError(f"cannot parse claim {text!r}")
        mag = float(parts[5]) if len(parts) == 6 and parts[5] else None
        return cls(parts[0], parts[1], parts[2],
                   parts[3] if len(parts) > 3 else "",
                   parts[4] if len(parts) > 4 else "", mag)


def claim_distance(a: Claim, b: Claim) -> float:
    """Fraction of the five identifying fields on which two claims differ."""
    diff = sum(getattr(a, f) != getattr(b, f) for f in DISTANCE_FIELDS)
    return diff / len(DISTANCE_FIELDS)


def min_claim_distance(ours: Sequence[Claim], theirs: Sequence[Claim]) -> float:
    """Smallest pairwise distance, or 1.0 when either side has no claims."""
    if not ours or not theirs:
        return 1.0
    return min(claim_distance(a, b) for a in ours for b in theirs)
