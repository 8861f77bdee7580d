"""Integer rectangles and disjoint unions: the summation regions.

A region is a finite union of pairwise-disjoint axis-aligned lattice
rectangles.  Degenerate single-point rectangles are allowed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError, RegionOverlapError

__all__ = [
    "Rect",
    "RegionUnion",
    "cube",
    "symmetric_box",
    "anisotropic_box",
    "explicit",
    "scattered",
]


@dataclass(frozen=True)
class Rect:
    """Closed lattice rectangle prod_l [lower[l], upper[l]]."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lower)
        hi = tuple(int(v) for v in self.upper)
        if len(lo) != len(hi):
            raise DimensionMismatchError("lower/upper lengths differ")
        if any(a > b for a, b in zip(lo, hi)):
            raise DomainError(f"empty rectangle: lower={lo} upper={hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def d(self) -> int:
        return len(self.lower)

    def size(self) -> int:
        n = 1
        for a, b in zip(self.lower, self.upper):
            n *= b - a + 1
        return n

    def contains(self, point) -> bool:
        return all(a <= p <= b for a, p, b in zip(self.lower, point, self.upper))

    def intersects(self, other: "Rect") -> bool:
        return all(
            a1 <= b2 and a2 <= b1
            for a1, b1, a2, b2 in zip(self.lower, self.upper, other.lower, other.upper)
        )

    def points(self):
        """Iterate lattice points in lexicographic order."""
        grids = [range(a, b + 1) for a, b in zip(self.lower, self.upper)]
        idx = np.indices([len(g) for g in grids]).reshape(self.d, -1).T
        for row in idx:
            yield tuple(g[k] for g, k in zip(grids, row))


@dataclass(frozen=True)
class RegionUnion:
    """Disjoint union of rectangles, all of the same dimension."""

    rects: tuple

    def __post_init__(self):
        rects = tuple(
            r if isinstance(r, Rect) else Rect(r[0], r[1]) for r in self.rects
        )
        if not rects:
            raise DomainError("region must contain at least one rectangle")
        object.__setattr__(self, "rects", rects)
        validate(self)

    @property
    def d(self) -> int:
        return self.rects[0].d

    @property
    def count(self) -> int:
        """Number of rectangles J in the union."""
        return len(self.rects)

    def bounding_box(self) -> Rect:
        lo = [min(r.lower[l] for r in self.rects) for l in range(self.d)]
        hi = [max(r.upper[l] for r in self.rects) for l in range(self.d)]
        return Rect(tuple(lo), tuple(hi))

    def contains(self, point) -> bool:
        return any(r.contains(point) for r in self.rects)

    def points(self):
        for r in self.rects:
            yield from r.points()


def validate(region: RegionUnion) -> None:
    """Check pairwise disjointness and dimension agreement.

    O(J^2 d) pairwise interval test; J stays small at desk scale.
    """
    d = region.rects[0].d
    for k, r in enumerate(region.rects):
        if r.d != d:
            raise DimensionMismatchError(
                f"rectangle {k} has dimension {r.d}, expected {d}"
            )
    rs = region.rects
    for i in range(len(rs)):
        for j in range(i + 1, len(rs)):
            if rs[i].intersects(rs[j]):
                raise RegionOverlapError(i, j)


def cardinality(region: RegionUnion) -> int:
    """Exact number of lattice points (disjointness makes this a plain sum)."""
    return sum(r.size() for r in region.rects)


def cube(n: int, d: int = 2) -> RegionUnion:
    """[0, n]^d."""
    if n < 0:
        raise DomainError("cube needs n >= 0")
    return RegionUnion((Rect((0,) * d, (n,) * d),))


def symmetric_box(n: int, scales) -> RegionUnion:
    """{k : |k_l| <= c_l * n} for positive scales c_l."""
    ext = [int(np.floor(c * n)) for c in scales]
    if any(c <= 0 for c in scales):
        raise DomainError("symmetric box scales must be positive")
    return RegionUnion((Rect(tuple(-e for e in ext), tuple(ext)),))


def anisotropic_box(n: int, betas) -> RegionUnion:
    """{k : |k_l| <= n**(1/beta_l)}; side lengths grow at different rates."""
    if any(b <= 0 for b in betas):
        raise DomainError("anisotropic box exponents must be positive")
    ext = [int(np.floor(n ** (1.0 / b))) for b in betas]
    return RegionUnion((Rect(tuple(-e for e in ext), tuple(ext)),))


def explicit(rects) -> RegionUnion:
    """Region from explicit (lower, upper) pairs."""
    return RegionUnion(tuple(Rect(tuple(lo), tuple(hi)) for lo, hi in rects))


def scattered(count: int, d: int, extent: int, max_side: int, rng) -> RegionUnion:
    """`count` random pairwise-disjoint rectangles inside [-extent, extent]^d.

    Rejection sampling; raises after too many failed proposals, which at
    reasonable densities does not happen.
    """
    if count < 1:
        raise DomainError("scattered region needs count >= 1")
    rects: list[Rect] = []
    attempts = 0
    while len(rects) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise DomainError(
                "could not place disjoint rectangles; lower count or max_side"
            )
        lo = rng.integers(-extent, extent + 1, size=d)
        side = rng.integers(0, max_side + 1, size=d)
        cand = Rect(tuple(lo), tuple(lo + side))
        if all(not cand.intersects(r) for r in rects):
            rects.append(cand)
    return RegionUnion(tuple(rects))
