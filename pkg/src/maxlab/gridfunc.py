"""Cell-constant functions and weights on the finest dyadic cells of [0,1)^n."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .dyadic import DyadicCube, check_resolution


def coarsen(arr: np.ndarray) -> np.ndarray:
    """Sum each 2^n block of children, always in the same (lexicographic) order."""
    out = None
    for off in itertools.product((0, 1), repeat=arr.ndim):
        part = arr[tuple(slice(o, None, 2) for o in off)]
        out = part.copy() if out is None else out + part
    return out


def upsample(arr: np.ndarray, times: int = 1) -> np.ndarray:
    """Repeat every entry 2^times along each axis (parent value to children)."""
    f = 2**times
    for ax in range(arr.ndim):
        arr = np.repeat(arr, f, axis=ax)
    return arr


def block_sum(arr: np.ndarray, level: int) -> np.ndarray:
    """Sum a finest-level array over the cubes of ``level``."""
    n = arr.ndim
    side = arr.shape[0]
    b = side // 2**level
    shape = []
    for _ in range(n):
        shape += [2**level, b]
    return arr.reshape(shape).sum(axis=tuple(range(1, 2 * n, 2)))


def level_means(arr: np.ndarray) -> list[np.ndarray]:
    """Arithmetic means of a finest-level array over every level 0..L."""
    L = int(round(math.log2(arr.shape[0])))
    return [block_sum(arr, k) / (2 ** (arr.ndim * (L - k))) for k in range(L + 1)]


class GridFunction:
    """Nonnegative cell-constant function, zero outside [0,1)^n.

    ``values`` has shape (2^L,)*n in row-major cell order. ``signed=True``
    lifts the sign restriction (Haar expansions, paraproduct outputs).
    """

    def __init__(self, values, n: int | None = None, L: int | None = None, signed: bool = False):
        arr = np.array(values, dtype=float)
        if n is not None and arr.ndim == 1 and n > 1:
            side = round(len(arr) ** (1.0 / n))
            arr = arr.reshape((side,) * n)
        n = arr.ndim
        side = arr.shape[0]
        if any(s != side for s in arr.shape):
            raise ValueError("grid must have equal sides")
        L_found = int(round(math.log2(side))) if side > 0 else -1
        if side <= 0 or 2**L_found != side:
            raise ValueError(f"grid side {side} is not a power of two")
        if L is not None and L != L_found:
            raise ValueError(f"values imply L={L_found}, got L={L}")
        check_resolution(n, L_found)
        if not np.all(np.isfinite(arr)):
            raise ValueError("values must be finite")
        if not signed and np.any(arr < 0):
            raise ValueError("grid function values must be nonnegative")
        arr.setflags(write=False)
        self.values = arr
        self.n = n
        self.L = L_found
        self.signed = signed
        self._validate()

    def _validate(self):
        pass

    # constructors
    @classmethod
    def constant(cls, c: float, n: int, L: int):
        return cls(np.full((2**L,) * n, float(c)))

    @classmethod
    def indicator(cls, Q: DyadicCube, n: int, L: int) -> "GridFunction":
        arr = np.zeros((2**L,) * n)
        arr[tuple(slice(a, b) for a, b in Q.cell_range(L))] = 1.0
        return GridFunction(arr)

    # derived data
    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.n * self.L)

    @cached_property
    def tree(self) -> list[np.ndarray]:
        """Masses of every unit-subtree cube, level by level (index 0..L)."""
        levels = [self.values * self.cell_volume]
        for _ in range(self.L):
            levels.append(coarsen(levels[-1]))
        levels.reverse()
        for a in levels:
            a.setflags(write=False)
        return levels

    @property
    def total(self) -> float:
        return float(self.tree[0].flat[0])

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    # arithmetic
    def _wrap(self, arr):
        return GridFunction(arr, signed=self.signed)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            if other.signed:
                return GridFunction(self.values * other.values, signed=True)
            other = other.values
        return self._wrap(self.values * other)

    __rmul__ = __mul__

    def __pow__(self, r: float):
        return self._wrap(self.values**r)

    def restrict(self, Q: DyadicCube) -> "GridFunction":
        """f * chi_Q (cells entirely inside Q)."""
        arr = np.zeros_like(self.values)
        sl = tuple(slice(a, b) for a, b in Q.cell_range(self.L))
        arr[sl] = self.values[sl]
        return GridFunction(arr)

    def refine(self) -> "GridFunction":
        """Same function sampled one level finer."""
        return type(self)(upsample(self.values))

    def __eq__(self, other):
        return isinstance(other, GridFunction) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, L={self.L})"

    # I/O
    def to_dict(self) -> dict:
        return {"n": self.n, "L": self.L, "values": [float(v) for v in self.flat]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict):
        try:
            n, L, vals = int(d["n"]), int(d["L"]), d["values"]
        except KeyError as exc:
            raise ValueError(f"grid function JSON missing field {exc.args[0]!r}") from None
        if len(vals) != 2 ** (n * L):
            raise ValueError(f"values: expected {2 ** (n * L)} entries, got {len(vals)}")
        return cls(np.array(vals, dtype=float).reshape((2**L,) * n))

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "L"])
        w.writerow([self.n, self.L])
        for v in self.flat:
            w.writerow([repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str):
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and rows[0][:2] == ["n", "L"]:
            rows = rows[1:]
        if not rows:
            raise ValueError("empty CSV")
        n, L = int(rows[0][0]), int(rows[0][1])
        vals = [float(x) for r in rows[1:] for x in r if x.strip()]
        return cls.from_dict({"n": n, "L": L, "values": vals})

    def save(self, path):
        path = Path(path)
        path.write_text(self.to_csv() if path.suffix == ".csv" else self.to_json() + "\n")

    @classmethod
    def load(cls, path):
        path = Path(path)
        text = path.read_text()
        return cls.from_csv(text) if path.suffix == ".csv" else cls.from_json(text)


class Weight(GridFunction):
    """A GridFunction with strictly positive values on the domain."""

    def _validate(self):
        if np.any(self.values <= 0):
            raise ValueError("weights must be strictly positive on the unit cube")

    def _wrap(self, arr):
        arr = np.asarray(arr, dtype=float)
        return Weight(arr) if np.all(arr > 0) else GridFunction(arr)

    @classmethod
    def of(cls, g: GridFunction) -> "Weight":
        return g if isinstance(g, Weight) else Weight(g.values)

    @cached_property
    def log_means(self) -> list[np.ndarray]:
        """avg_Q log(sigma) for every unit-subtree cube, by level."""
        return level_means(np.log(self.values))


def _check_same_grid(a: GridFunction, b: GridFunction):
    if (a.n, a.L) != (b.n, b.L):
        raise ValueError(f"grid mismatch: (n={a.n}, L={a.L}) vs (n={b.n}, L={b.L})")


def product(funcs: Sequence[GridFunction]) -> GridFunction:
    arr = funcs[0].values
    for g in funcs[1:]:
        _check_same_grid(funcs[0], g)
        arr = arr * g.values
    return GridFunction(arr)


def mass(g: GridFunction, Q: DyadicCube) -> float:
    """Integral of g over Q (cells entirely inside Q; zero outside the domain)."""
    if Q.dimension != g.n:
        raise ValueError("cube and function dimensions differ")
    if Q.is_standard:
        if Q.level > g.L:
            raise ValueError(f"cube level {Q.level} is finer than the grid (L={g.L})")
        if Q.level < 0:
            return g.total if all(m == 0 for m in Q.index) else 0.0
        if all(0 <= m < 2**Q.level for m in Q.index):
            return float(g.tree[Q.level][Q.index])
        return 0.0
    sl = tuple(slice(a, b) for a, b in Q.cell_range(g.L))
    block = g.values[sl]
    if block.size == 0:
        return 0.0
    return math.fsum((block * g.cell_volume).ravel())


def average(f: GridFunction, Q: DyadicCube) -> float:
    return mass(f, Q) / float(Q.volume)


def weighted_average(f: GridFunction, sigma: GridFunction, Q: DyadicCube) -> float:
    """m_sigma(f, Q) = (1/sigma(Q)) * integral of f sigma over Q."""
    _check_same_grid(f, sigma)
    denom = mass(sigma, Q)
    if denom <= 0:
        raise ValueError(f"{Q} does not meet the support of the weight")
    return mass(f * sigma, Q) / denom


def exp_mean_inverse(sigma: Weight, Q: DyadicCube) -> float:
    """exp(avg_Q log(1/sigma)); Q must be a cube of the unit subtree."""
    if not Q.in_unit_subtree(sigma.L):
        raise ValueError(f"{Q} is not contained in the domain grid")
    return math.exp(-float(Weight.of(sigma).log_means[Q.level][Q.index]))


def lp_norm(f: GridFunction, sigma: GridFunction, p: float) -> float:
    """(integral |f|^p sigma)^(1/p)."""
    _check_same_grid(f, sigma)
    if p < 1:
        raise ValueError("lp_norm requires p >= 1")
    integrand = np.abs(f.values) ** p * sigma.values * f.cell_volume
    return float(np.sum(integrand)) ** (1.0 / p)


def conjugate(p: float) -> float:
    if p <= 1:
        return math.inf
    return p / (p - 1.0)


@dataclass(frozen=True)
class ExponentConfig:
    """Exponents (p_1..p_m, q, alpha) in dimension n; p is set by 1/p = sum 1/p_i."""

    n: int
    p_list: tuple[float, ...]
    q: float
    alpha: float = 0.0
    p: float = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(float(x) for x in self.p_list))
        if self.n not in (1, 2, 3):
            raise ValueError(f"n: dimension {self.n} not supported")
        if not self.p_list:
            raise ValueError("p_list: at least one exponent is required")
        if any(not (1 < pi < math.inf) for pi in self.p_list):
            raise ValueError(f"p_list: every p_i must lie in (1, inf), got {self.p_list}")
        if not (0 < self.q < math.inf):
            raise ValueError(f"q: must be positive and finite, got {self.q}")
        if not (0 <= self.alpha < self.m * self.n):
            raise ValueError(f"alpha: must satisfy 0 <= alpha < m*n = {self.m * self.n}")
        p = 1.0 / sum(1.0 / pi for pi in self.p_list)
        if self.p is None:
            object.__setattr__(self, "p", p)
        elif abs(1.0 / self.p - 1.0 / p) > 1e-12:
            raise ValueError("p: Hoelder relation 1/p = sum 1/p_i violated")

    @property
    def m(self) -> int:
        return len(self.p_list)

    @property
    def conjugates(self) -> tuple[float, ...]:
        return tuple(conjugate(pi) for pi in self.p_list)

    @property
    def homogeneity(self) -> float:
        """n*m - alpha, the exponent in the child/parent value bound 2^(nm - alpha)."""
        return self.n * self.m - self.alpha

    def require_p_le_q(self):
        if self.p > self.q + 1e-12:
            raise ValueError(f"q: this check requires p <= q (p={self.p}, q={self.q})")

    def require_q_ge_max(self):
        if max(self.p_list) > self.q + 1e-12:
            raise ValueError(f"q: this check requires q >= max p_i (q={self.q})")

    def to_dict(self) -> dict:
        return {"n": self.n, "p_list": list(self.p_list), "q": self.q, "alpha": self.alpha, "p": self.p}
