"""Dyadic maximal operators and the level-set stopping-cube decomposition."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dyadic import DyadicCube, ZERO, all_shifts, as_shift, level_index_ranges
from .gridfunc import ExponentConfig, GridFunction, _check_same_grid, upsample


def _check_vec(funcs: Sequence[GridFunction], m: int | None = None):
    if not funcs:
        raise ValueError("at least one function is required")
    if m is not None and len(funcs) != m:
        raise ValueError(f"expected {m} functions, got {len(funcs)}")
    for g in funcs[1:]:
        _check_same_grid(funcs[0], g)


def _sweep(level_values: list[np.ndarray]) -> np.ndarray:
    """Running max from the root down: R_k = max(upsample(R_{k-1}), V_k)."""
    run = level_values[0]
    for v in level_values[1:]:
        if run.shape[0] == v.shape[0]:
            run = np.maximum(run, v)
        else:
            run = np.maximum(upsample(run), v)
    return run


def _prod(arrays):
    out = arrays[0]
    for a in arrays[1:]:
        out = out * a
    return out


def dyadic_maximal(f: GridFunction) -> GridFunction:
    """M_d f: sup of averages over unit-subtree cubes containing each cell."""
    g = GridFunction(np.abs(f.values))
    vals = [g.tree[k] / (2.0 ** (-g.n * k)) for k in range(g.L + 1)]
    return GridFunction(_sweep(vals))


def weighted_dyadic_maximal(f: GridFunction, sigma: GridFunction) -> GridFunction:
    """M_d^sigma f: sup of sigma-averages of |f| over unit-subtree cubes."""
    _check_same_grid(f, sigma)
    fs = GridFunction(np.abs(f.values) * sigma.values)
    vals = [fs.tree[k] / sigma.tree[k] for k in range(f.L + 1)]
    return GridFunction(_sweep(vals))


def multilinear_weighted_maximal(f_vec, sigma_vec) -> GridFunction:
    """M_d^{sigma}(f): sup over unit-subtree cubes of prod_i m_{sigma_i}(|f_i|, Q)."""
    _check_vec(list(f_vec) + list(sigma_vec))
    if len(f_vec) != len(sigma_vec):
        raise ValueError("f_vec and sigma_vec lengths differ")
    pairs = [(GridFunction(np.abs(f.values) * s.values), s) for f, s in zip(f_vec, sigma_vec)]
    L = f_vec[0].L
    vals = [_prod([fs.tree[k] / s.tree[k] for fs, s in pairs]) for k in range(L + 1)]
    return GridFunction(_sweep(vals))


def _standard_level_values(gs: Sequence[GridFunction], hom: float, top: int = -1) -> list[np.ndarray]:
    """|Q|^{alpha/n - m} prod_i g_i(Q) for beta=0 cubes of levels top..L."""
    n, L = gs[0].n, gs[0].L
    out = []
    for k in range(top, L + 1):
        if k < 0:
            masses = [np.full((1,) * n, g.total) for g in gs]
        else:
            masses = [g.tree[k] for g in gs]
        out.append(_prod(masses) * 2.0 ** (k * hom))
    return out


def _shifted_cell_ranges(k: int, shift, L: int):
    """Per coordinate: (index, start, stop) for cubes with at least one full cell."""
    per_dim = []
    for b, rng in zip(shift, level_index_ranges(k, shift)):
        entries = []
        for m in rng:
            cube = DyadicCube(k, (m,), (b,))
            (start, stop), = cube.cell_range(L)
            if stop > start:
                entries.append((m, start, stop))
        per_dim.append(entries)
    return per_dim


def _shifted_fractional(gs: Sequence[GridFunction], hom: float, shift) -> np.ndarray:
    n, L = gs[0].n, gs[0].L
    out = np.zeros((2**L,) * n)
    vol = gs[0].cell_volume
    for k in range(-1, L + 1):
        pref = 2.0 ** (k * hom)
        for combo in itertools.product(*_shifted_cell_ranges(k, shift, L)):
            sl = tuple(slice(s, e) for _, s, e in combo)
            masses = [math.fsum((g.values[sl] * vol).ravel()) for g in gs]
            value = _prod(masses) * pref
            np.maximum(out[sl], value, out=out[sl])
    return out


def multilinear_fractional_dyadic(f_vec, cfg: ExponentConfig, shift=0) -> GridFunction:
    """M^beta_{d,alpha}(f): sup over cubes of D^beta (levels -1..L) holding the cell."""
    _check_vec(f_vec, cfg.m)
    if f_vec[0].n != cfg.n:
        raise ValueError("function dimension differs from cfg.n")
    gs = [GridFunction(np.abs(f.values)) for f in f_vec]
    shift = as_shift(shift, cfg.n)
    if all(b == ZERO for b in shift):
        return GridFunction(_sweep(_standard_level_values(gs, cfg.homogeneity)))
    return GridFunction(_shifted_fractional(gs, cfg.homogeneity, shift))


def multilinear_fractional_approx(f_vec, cfg: ExponentConfig) -> tuple[GridFunction, GridFunction]:
    """(lower, upper) with lower <= M_alpha f <= upper cell-wise."""
    parts = [multilinear_fractional_dyadic(f_vec, cfg, b).values for b in all_shifts(cfg.n)]
    lower = parts[0]
    total = parts[0]
    for v in parts[1:]:
        lower = np.maximum(lower, v)
        total = total + v
    return GridFunction(lower), GridFunction(6.0**cfg.homogeneity * total)


def lattice_fractional_maximal(f_vec, cfg: ExponentConfig) -> GridFunction:
    """n=1 reference for M_alpha: all intervals with lattice corners and sides j 2^-L, j <= 2^(L+1)."""
    if cfg.n != 1:
        raise ValueError("lattice oracle is one-dimensional")
    _check_vec(f_vec, cfg.m)
    L = f_vec[0].L
    N = 2**L
    h = 1.0 / N
    cells = [np.abs(f.values) * h for f in f_vec]
    out = np.zeros(N)
    for j in range(1, 2 * N + 1):
        pref = (j * h) ** (cfg.alpha - cfg.m)
        for a in range(1 - j, N):
            s, e = max(a, 0), min(a + j, N)
            prod = pref
            for c in cells:
                prod = prod * math.fsum(c[s:e])
            np.maximum(out[s:e], prod, out=out[s:e])
    return GridFunction(out)


# stopping cubes

def packing_gamma(cfg: ExponentConfig, a: float) -> float:
    """gamma = 1 / (1 - (2^(nm-alpha)/a)^(1/(m - alpha/n)))."""
    h = cfg.homogeneity
    if not a > 2.0**h:
        raise ValueError(f"a: must exceed 2^(nm-alpha) = {2.0**h}, got {a}")
    return 1.0 / (1.0 - (2.0**h / a) ** (1.0 / (cfg.m - cfg.alpha / cfg.n)))


def default_base(cfg: ExponentConfig) -> float:
    return 2.0 ** (cfg.homogeneity + 1)


@dataclass
class StoppingCube:
    cube: DyadicCube
    value: float
    E: np.ndarray
    exterior: float = 0.0

    def e_volume(self, cell_volume: float) -> float:
        return float(np.count_nonzero(self.E)) * cell_volume + self.exterior

    @property
    def is_chain(self) -> bool:
        return self.cube.level < 0


@dataclass
class CZDecomposition:
    """Stopping cubes by threshold exponent k, with the disjoint sets E(Q)."""

    a: float
    gamma: float
    n: int
    L: int
    levels: dict[int, list[StoppingCube]] = field(default_factory=dict)

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.n * self.L)

    def cubes(self):
        for k in sorted(self.levels):
            for sc in self.levels[k]:
                yield k, sc

    def __len__(self):
        return sum(len(v) for v in self.levels.values())

    def is_empty(self) -> bool:
        return len(self) == 0


def _threshold_level(M: np.ndarray, a: float) -> np.ndarray:
    """Integer k with a^k < M <= a^(k+1), corrected against the float powers."""
    k = np.floor(np.log(M) / math.log(a)).astype(int)
    out = np.empty_like(k)
    for i, (kk, mv) in enumerate(zip(k.ravel(), M.ravel())):
        kk = int(kk)
        while a ** (kk + 1) < mv:
            kk += 1
        while a**kk >= mv:
            kk -= 1
        out.flat[i] = kk
    return out


def cz_decomposition(f_vec, sigma_vec, cfg: ExponentConfig, a: float | None = None) -> CZDecomposition:
    """Maximal dyadic cubes with |Q|^(alpha/n - m) prod_i int_Q |f_i| sigma_i > a^k.

    The tree is the full standard dyadic tree: besides the unit subtree it
    contains the chain [0, 2^j)^n, j >= 1, whose values decay like
    2^(-j(nm - alpha)). A chain stopping cube also records the volume of the
    region outside the domain where the maximal function lies in (a^k, a^(k+1)].
    """
    _check_vec(list(f_vec) + list(sigma_vec))
    if len(f_vec) != cfg.m or len(sigma_vec) != cfg.m:
        raise ValueError(f"expected {cfg.m} functions and weights")
    a = default_base(cfg) if a is None else float(a)
    gamma = packing_gamma(cfg, a)
    n, L = cfg.n, f_vec[0].L
    out = CZDecomposition(a=a, gamma=gamma, n=n, L=L)
    gs = [GridFunction(np.abs(f.values) * s.values) for f, s in zip(f_vec, sigma_vec)]
    h = cfg.homogeneity
    V = _standard_level_values(gs, h, top=0)
    M = _sweep(V)
    pos = M > 0
    if not pos.any():
        return out
    kcell = np.full(M.shape, np.iinfo(int).min)
    kcell[pos] = _threshold_level(M[pos], a)
    v0 = float(V[0].flat[0])
    for k in sorted(set(int(x) for x in kcell[pos])):
        t = a**k
        c1 = v0 * 2.0 ** (-h)
        if c1 > t:
            J = 1
            while v0 * 2.0 ** (-(J + 1) * h) > t:
                J += 1
            ext = 0.0
            for i in range(1, J + 1):
                if v0 * 2.0 ** (-i * h) <= a * t:
                    ext += (2**n - 1) * 2.0 ** (n * (i - 1))
            cube = DyadicCube.standard(-J, (0,) * n)
            out.levels[k] = [StoppingCube(cube, v0 * 2.0 ** (-J * h), kcell == k, ext)]
            continue
        found = []
        covered = np.zeros((1,) * n, dtype=bool)
        for lev in range(L + 1):
            if lev > 0:
                covered = upsample(covered)
            hit = (V[lev] > t) & ~covered
            for idx in zip(*np.nonzero(hit)):
                idx = tuple(int(i) for i in idx)
                cube = DyadicCube.standard(lev, idx)
                mask = np.zeros(M.shape, dtype=bool)
                sl = tuple(slice(s, e) for s, e in cube.cell_range(L))
                mask[sl] = kcell[sl] == k
                found.append(StoppingCube(cube, float(V[lev][idx]), mask))
            covered = covered | hit
        out.levels[k] = found
    return out
