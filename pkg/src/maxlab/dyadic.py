"""Standard and shifted dyadic cubes on the unit cube.

Geometry is exact: corners and sides are :class:`fractions.Fraction`, so
containment tests against the non-dyadic one-third grids never round.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

ZERO = Fraction(0)
THIRD = Fraction(1, 3)
MAX_DIM = 3
MAX_LEVEL = {1: 12, 2: 7, 3: 5}
MIN_LEVEL = -1


def as_shift(beta, n: int | None = None) -> tuple[Fraction, ...]:
    """Normalize a shift: a scalar or sequence with entries in {0, 1/3}."""
    if isinstance(beta, (int, float, Fraction)):
        if n is None:
            raise ValueError("dimension required for a scalar shift")
        beta = [beta] * n
    out = []
    for b in beta:
        fb = Fraction(b).limit_denominator(3) if isinstance(b, float) else Fraction(b)
        if fb not in (ZERO, THIRD):
            raise ValueError(f"shift entries must be 0 or 1/3, got {b!r}")
        out.append(fb)
    if n is not None and len(out) != n:
        raise ValueError(f"shift has {len(out)} entries, expected {n}")
    return tuple(out)


def all_shifts(n: int) -> list[tuple[Fraction, ...]]:
    """The 2^n shifts in lexicographic order (0 before 1/3)."""
    return [tuple(s) for s in itertools.product((ZERO, THIRD), repeat=n)]


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


@dataclass(frozen=True, order=True)
class DyadicCube:
    """The cube 2^-k([0,1)^n + m + (-1)^k beta) of the grid D^beta."""

    level: int
    index: tuple[int, ...]
    shift: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.index) != len(self.shift):
            raise ValueError("index and shift must have the same dimension")
        if not 1 <= len(self.index) <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}")

    @classmethod
    def standard(cls, level: int, index: int | Sequence[int]) -> "DyadicCube":
        index = (index,) if isinstance(index, int) else tuple(index)
        return cls(level, index, (ZERO,) * len(index))

    @property
    def dimension(self) -> int:
        return len(self.index)

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** (-self.level)

    @property
    def volume(self) -> Fraction:
        return self.side ** self.dimension

    @property
    def lower(self) -> tuple[Fraction, ...]:
        s = self.side
        sg = _sign(self.level)
        return tuple(s * (m + sg * b) for m, b in zip(self.index, self.shift))

    @property
    def upper(self) -> tuple[Fraction, ...]:
        s = self.side
        return tuple(lo + s for lo in self.lower)

    @property
    def is_standard(self) -> bool:
        return all(b == 0 for b in self.shift)

    def in_unit_subtree(self, max_level: int) -> bool:
        return (
            self.is_standard
            and 0 <= self.level <= max_level
            and all(0 <= m < 2**self.level for m in self.index)
        )

    def contains_point(self, x: Sequence[Fraction]) -> bool:
        return all(lo <= xi < hi for lo, xi, hi in zip(self.lower, x, self.upper))

    def contains_box(self, lower: Sequence[Fraction], upper: Sequence[Fraction]) -> bool:
        return all(
            lo <= a and b <= hi
            for lo, hi, a, b in zip(self.lower, self.upper, lower, upper)
        )

    def contains(self, other: "DyadicCube | ArbitraryCube") -> bool:
        return self.contains_box(other.lower, other.upper)

    def meets_unit_cube(self) -> bool:
        return all(lo < 1 and hi > 0 for lo, hi in zip(self.lower, self.upper))

    def children(self, max_level: int | None = None) -> list["DyadicCube"]:
        if max_level is not None and self.level >= max_level:
            raise ValueError(f"cannot refine level {self.level} beyond L={max_level}")
        return [self.child(offset) for offset in itertools.product((0, 1), repeat=self.dimension)]

    def child(self, offset: Sequence[int]) -> "DyadicCube":
        k = self.level + 1
        half = Fraction(2) ** (-k)
        sg = _sign(k)
        index = []
        for lo, o, b in zip(self.lower, offset, self.shift):
            m = (lo + o * half) / half - sg * b
            if m.denominator != 1:
                raise AssertionError("dyadic grids must be nested")
            index.append(int(m))
        return DyadicCube(k, tuple(index), self.shift)

    def parent(self) -> "DyadicCube":
        return cube_containing(self.lower, self.level - 1, self.shift)

    def cell_range(self, L: int) -> tuple[tuple[int, int], ...]:
        """Half-open index ranges of the finest cells lying entirely inside."""
        scale = 2**L
        ranges = []
        for lo, hi in zip(self.lower, self.upper):
            start = max(0, math.ceil(lo * scale))
            stop = min(scale, math.floor(hi * scale))
            ranges.append((start, max(start, stop)))
        return tuple(ranges)

    def __str__(self) -> str:
        lo = ",".join(str(x) for x in self.lower)
        return f"Q(k={self.level}, m={list(self.index)}, lower=({lo}), side={self.side})"


@dataclass(frozen=True)
class ArbitraryCube:
    lower: tuple[Fraction, ...]
    side: Fraction

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("cube side must be positive")

    @classmethod
    def make(cls, lower, side) -> "ArbitraryCube":
        if isinstance(lower, (int, Fraction, str)):
            lower = (lower,)
        return cls(tuple(Fraction(x) for x in lower), Fraction(side))

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def upper(self) -> tuple[Fraction, ...]:
        return tuple(lo + self.side for lo in self.lower)

    def meets_unit_cube(self) -> bool:
        return all(lo < 1 and hi > 0 for lo, hi in zip(self.lower, self.upper))


def cube_containing(x: Sequence[Fraction], level: int, shift) -> DyadicCube:
    """The unique cube of D^shift at ``level`` containing the point x."""
    shift = as_shift(shift, len(x))
    scale = Fraction(2) ** level
    sg = _sign(level)
    index = tuple(math.floor(Fraction(xi) * scale - sg * b) for xi, b in zip(x, shift))
    return DyadicCube(level, index, shift)


def children(Q: DyadicCube, max_level: int | None = None) -> list[DyadicCube]:
    return Q.children(max_level)


def parent(Q: DyadicCube) -> DyadicCube:
    return Q.parent()


def shifted_cover(Q: ArbitraryCube, max_ratio: int = 64) -> DyadicCube:
    """Smallest cube of some D^beta containing Q.

    Sides are scanned upward from the first dyadic side >= l(Q); at each side
    the shifts are tried in lexicographic order. Any cube is covered with side
    at most 6 l(Q); ``max_ratio`` only bounds the search.
    """
    if not Q.meets_unit_cube():
        raise ValueError("cube must intersect the unit cube")
    n = Q.dimension
    k = math.ceil(-math.log2(Q.side)) + 1
    while Fraction(2) ** (-k) < Q.side:
        k -= 1
    shifts = all_shifts(n)
    while Fraction(2) ** (-k) <= max_ratio * Q.side:
        for beta in shifts:
            cand = cube_containing(Q.lower, k, beta)
            if cand.contains(Q):
                return cand
        k -= 1
    raise RuntimeError(f"no shifted dyadic cover of {Q} within ratio {max_ratio}")


def level_index_ranges(level: int, shift: Sequence[Fraction]) -> list[range]:
    """Per-coordinate indices m whose level-``level`` interval meets [0, 1)."""
    sg = _sign(level)
    out = []
    for b in shift:
        c = sg * b
        lo = math.floor(-c - 1) + 1
        hi = math.ceil(Fraction(2) ** level - c) - 1
        out.append(range(lo, hi + 1))
    return out


def enumerate_cubes(shift, k0: int, k1: int, n: int | None = None) -> Iterator[DyadicCube]:
    """Every cube of D^shift with level in [k0, k1] that meets [0,1)^n."""
    shift = as_shift(shift, n)
    if k0 > k1:
        raise ValueError("empty level range")
    if k0 < MIN_LEVEL:
        raise ValueError(f"levels below {MIN_LEVEL} are not enumerated")
    for k in range(k0, k1 + 1):
        for index in itertools.product(*level_index_ranges(k, shift)):
            yield DyadicCube(k, tuple(index), shift)


def check_resolution(n: int, L: int) -> None:
    if n not in MAX_LEVEL:
        raise ValueError(f"dimension n={n} not supported (1..{MAX_DIM})")
    if not 0 <= L <= MAX_LEVEL[n]:
        raise ValueError(f"resolution L={L} out of range 0..{MAX_LEVEL[n]} for n={n}")
