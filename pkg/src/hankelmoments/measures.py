"""Finitely supported positive measures on the real line."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .backends import HankelError, parse_rational_string, scalar_to_json


class EmptyMeasureError(HankelError):
    """All point masses were removed."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Point masses ``weights[i]`` at strictly increasing ``points[i]``.

    Points and weights are stored as given (typically Fractions, so every
    moment is exact); validation enforces distinct increasing points and
    positive weights.
    """

    points: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights must have equal length")
        if not self.points:
            raise EmptyMeasureError("a discrete measure needs at least one point")
        for a, b in zip(self.points, self.points[1:]):
            if not a < b:
                raise ValueError("points must be strictly increasing")
        for w in self.weights:
            if not w > 0:
                raise ValueError("weights must be positive")

    @staticmethod
    def from_lists(points, weights) -> "DiscreteMeasure":
        conv = lambda x: parse_rational_string(x) if isinstance(x, str) else x
        pts = [conv(x) for x in points]
        wts = [conv(w) for w in weights]
        order = sorted(range(len(pts)), key=lambda i: pts[i])
        return DiscreteMeasure(
            tuple(pts[i] for i in order), tuple(wts[i] for i in order)
        )

    @property
    def size(self) -> int:
        return len(self.points)

    def raw_moment(self, n: int):
        """``sum_i c_i x_i^n`` in the arithmetic of the stored data."""
        return sum(c * x**n for x, c in zip(self.points, self.weights))

    def total_mass(self):
        return sum(self.weights, start=Fraction(0) if self._rational() else 0.0)

    def _rational(self) -> bool:
        return all(
            isinstance(v, (int, Fraction)) for v in (*self.points, *self.weights)
        )

    def to_json(self) -> dict:
        return {
            "points": [scalar_to_json(x) for x in self.points],
            "weights": [scalar_to_json(w) for w in self.weights],
        }

    @staticmethod
    def from_json(obj: dict) -> "DiscreteMeasure":
        return DiscreteMeasure.from_lists(obj["points"], obj["weights"])
