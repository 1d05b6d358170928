"""
==========================
Methods - Stratification
==========================

Geometry of hyperrectangular strata over the unit hypercube [0,1]^d.

Strata are half-open boxes `[lower, upper)` per dimension, closed at the global boundary 1,
so a valid stratification is an exact partition of the unit hypercube.
Stratum ids are increasing integers; children of a bisection get fresh ids and remember their parent.

Features:
- `HyperRectangle`: validated axis-aligned box inside [0,1]^d.
- `Stratification`: immutable collection of `(id, box, parent)` strata.
- `volume`, `contains`: measure p_S of a stratum and the membership convention.
- `bisect`: split one stratum at the midpoint of one dimension.
- `validate`: disjointness / unit-volume diagnostics.
- JSON round trip `{"d": int, "strata": [{"id", "parent", "lower", "upper"}]}`.

Usage:
>>> from app.methods.stratification import Stratification, bisect, volume
>>> strat = bisect(Stratification.trivial(2), stratum_id=0, dim=0)
>>> [volume(s.rect) for s in strat.strata]
[0.5, 0.5]

*Author: Sudharshan TK*\n
*Created: 2025-09-04*
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from app.helpers.errors import StratificationError

VOLUME_TOLERANCE = 1e-12


@dataclass(frozen=True)
class HyperRectangle:
    """Axis-aligned box `[lower, upper)` inside the unit hypercube."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise StratificationError(
                f"lower/upper must be non-empty and of equal length, got {len(lower)} and {len(upper)}")
        for k, (lo, hi) in enumerate(zip(lower, upper)):
            if not (0.0 <= lo < hi <= 1.0):
                raise StratificationError(
                    f"invalid extent [{lo}, {hi}] in dimension {k}: need 0 <= lower < upper <= 1")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unit(cls, dimension: int) -> HyperRectangle:
        """The whole domain [0,1]^d."""
        return cls((0.0,) * dimension, (1.0,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def extent(self) -> np.ndarray:
        return self.upper_array - self.lower_array

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower_array + self.upper_array)

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}


def volume(rect: HyperRectangle) -> float:
    """
    Probability p_S of a stratum under the uniform input density, i.e. its Lebesgue volume.

    Args:
        rect (HyperRectangle): The stratum.

    Returns:
        float: Π_k (upper[k] - lower[k]), in (0, 1].
    """
    return math.prod(hi - lo for lo, hi in zip(rect.lower, rect.upper))


def contains(rect: HyperRectangle, point: Sequence[float]) -> bool:
    """
    Membership test with the half-open convention: `lower[k] <= x[k] < upper[k]`,
    except that an upper bound equal to 1 is inclusive.

    Args:
        rect (HyperRectangle): The stratum.
        point (Sequence[float]): Point of length d.

    Raises:
        StratificationError: If the point has the wrong dimension.

    Returns:
        bool: True if the point lies in the stratum.
    """
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape[0] != rect.dimension:
        raise StratificationError(
            f"point has dimension {x.shape[0]}, stratum has dimension {rect.dimension}")
    return bool(contains_many(rect, x[None, :])[0])


def contains_many(rect: HyperRectangle, points: np.ndarray) -> np.ndarray:
    """
    Vectorised `contains` over the rows of an (n, d) array.

    Returns:
        np.ndarray: Boolean mask of length n.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != rect.dimension:
        raise StratificationError(
            f"points have dimension {pts.shape[1]}, stratum has dimension {rect.dimension}")
    lo = rect.lower_array
    hi = rect.upper_array
    below_upper = (pts < hi) | ((hi == 1.0) & (pts <= 1.0))
    return np.all((pts >= lo) & below_upper, axis=1)


@dataclass(frozen=True)
class Stratum:
    """One stratum of a stratification: id, box and the id of the stratum it was split from."""

    id: int
    rect: HyperRectangle
    parent: Optional[int] = None

    @property
    def probability(self) -> float:
        return volume(self.rect)

    def to_dict(self) -> dict:
        return {"id": self.id, "parent": self.parent, **self.rect.to_dict()}


@dataclass(frozen=True)
class Stratification:
    """
    Immutable collection of strata over [0,1]^d.

    Construction only checks dimensions and id uniqueness; disjointness and the unit total
    volume are checked by `validate`, which reports diagnostics instead of failing.
    """

    dimension: int
    strata: tuple[Stratum, ...]
    next_id: int = -1

    def __post_init__(self):
        if self.dimension < 1:
            raise StratificationError(f"dimension must be >= 1, got {self.dimension}")
        strata = tuple(self.strata)
        ids = [s.id for s in strata]
        if len(set(ids)) != len(ids):
            raise StratificationError(f"duplicate stratum ids in {ids}")
        for s in strata:
            if s.rect.dimension != self.dimension:
                raise StratificationError(
                    f"stratum {s.id} has dimension {s.rect.dimension}, expected {self.dimension}")
        object.__setattr__(self, "strata", strata)
        if self.next_id < 0:
            object.__setattr__(self, "next_id", max(ids, default=-1) + 1)

    @classmethod
    def trivial(cls, dimension: int) -> Stratification:
        """The uninformed stratification: a single stratum covering [0,1]^d, id 0."""
        return cls(dimension, (Stratum(0, HyperRectangle.unit(dimension)),))

    def __len__(self) -> int:
        return len(self.strata)

    def __iter__(self) -> Iterator[Stratum]:
        return iter(self.strata)

    @property
    def ids(self) -> list[int]:
        return [s.id for s in self.strata]

    def get(self, stratum_id: int) -> Stratum:
        for s in self.strata:
            if s.id == stratum_id:
                return s
        raise StratificationError(f"unknown stratum id {stratum_id}")

    def probabilities(self) -> np.ndarray:
        return np.array([s.probability for s in self.strata])

    def locate(self, points: np.ndarray) -> np.ndarray:
        """
        Number of strata containing each point (1 everywhere for a valid stratification).

        Args:
            points (np.ndarray): (n, d) array.

        Returns:
            np.ndarray: Integer counts of length n.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        counts = np.zeros(pts.shape[0], dtype=int)
        for s in self.strata:
            counts += contains_many(s.rect, pts)
        return counts

    def to_dict(self) -> dict:
        return {"d": self.dimension, "strata": [s.to_dict() for s in self.strata]}

    @classmethod
    def from_dict(cls, data: dict) -> Stratification:
        try:
            strata = tuple(
                Stratum(int(s["id"]), HyperRectangle(s["lower"], s["upper"]),
                        None if s.get("parent") is None else int(s["parent"]))
                for s in data["strata"]
            )
            return cls(int(data["d"]), strata)
        except (KeyError, TypeError) as e:
            raise StratificationError(f"malformed stratification document: {e}") from e


def bisect(strat: Stratification, stratum_id: int, dim: int) -> Stratification:
    """
    Split one stratum into two halves at the midpoint of its extent along `dim`.

    The lower half takes the parent's position in the strata sequence and the upper half
    follows it; children get the next two fresh ids. All other strata are unchanged.

    Args:
        strat (Stratification): Current stratification.
        stratum_id (int): Id of the stratum to split.
        dim (int): 0-based dimension to split along.

    Raises:
        StratificationError: Unknown stratum id or dimension out of range.

    Returns:
        Stratification: New stratification with one more stratum.
    """
    if not 0 <= dim < strat.dimension:
        raise StratificationError(f"dimension {dim} out of range for d={strat.dimension}")
    parent = strat.get(stratum_id)

    lo, hi = parent.rect.lower, parent.rect.upper
    mid = 0.5 * (lo[dim] + hi[dim])
    lower_child = Stratum(
        strat.next_id,
        HyperRectangle(lo, hi[:dim] + (mid,) + hi[dim + 1:]),
        parent.id,
    )
    upper_child = Stratum(
        strat.next_id + 1,
        HyperRectangle(lo[:dim] + (mid,) + lo[dim + 1:], hi),
        parent.id,
    )

    strata = []
    for s in strat.strata:
        if s.id == stratum_id:
            strata.extend((lower_child, upper_child))
        else:
            strata.append(s)
    return Stratification(strat.dimension, tuple(strata), strat.next_id + 2)


def _overlap(a: HyperRectangle, b: HyperRectangle) -> bool:
    # Interiors intersect iff the open intervals overlap in every dimension
    return all(max(la, lb) < min(ua, ub) for la, ua, lb, ub in zip(a.lower, a.upper, b.lower, b.upper))


def validate(strat: Stratification) -> list[str]:
    """
    Check that the strata are pairwise interior-disjoint and that their volumes sum to 1.

    Args:
        strat (Stratification): Stratification to check.

    Returns:
        list[str]: Diagnostics; empty when the stratification is a valid partition.
    """
    diagnostics = []
    for a, b in itertools.combinations(strat.strata, 2):
        if _overlap(a.rect, b.rect):
            diagnostics.append(f"strata {a.id} and {b.id} overlap")
    total = math.fsum(s.probability for s in strat.strata)
    if abs(total - 1.0) > VOLUME_TOLERANCE:
        diagnostics.append(f"total volume is {total!r}, deficit {1.0 - total!r}")
    return diagnostics


def is_valid(strat: Stratification) -> bool:
    """True when `validate` reports no diagnostics."""
    return not validate(strat)
