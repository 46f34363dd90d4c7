"""Weight characteristics as suprema over the unit-cube dyadic tree.

Every functional is evaluated for all standard cubes of levels 0..L at once,
level by level; the supremum reports the first maximizing cube in canonical
order (level ascending, then index lexicographic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .dyadic import DyadicCube
from .gridfunc import (
    ExponentConfig,
    GridFunction,
    Weight,
    _check_same_grid,
    block_sum,
    conjugate,
    upsample,
)
from .maximal import _standard_level_values


class LinearKind(str, Enum):
    A_p = "A_p"
    JOINT_A_p = "JOINT_A_p"
    A_pq = "A_pq"
    B_p = "B_p"
    AINF_FW = "AINF_FW"
    AINF_HR = "AINF_HR"


class MultiKind(str, Enum):
    A_P = "A_P"
    A_Pq = "A_Pq"
    B_Pq = "B_Pq"
    W_Pinf = "W_Pinf"
    RH_P = "RH_P"


class SawyerKind(str, Enum):
    S_linear = "S_linear"
    S_LiSun = "S_LiSun"
    S_nu = "S_nu"


@dataclass(frozen=True)
class Supremum:
    value: float
    cube: DyadicCube

    def __float__(self):
        return self.value


def _sup(levels: Sequence[np.ndarray]) -> Supremum:
    best, arg = -math.inf, None
    for k, arr in enumerate(levels):
        i = int(np.argmax(arr))
        v = float(arr.flat[i])
        if v > best:
            best, arg = v, (k, np.unravel_index(i, arr.shape))
    k, idx = arg
    return Supremum(best, DyadicCube.standard(k, tuple(int(j) for j in idx)))


def _volumes(n: int, L: int) -> list[float]:
    return [2.0 ** (-n * k) for k in range(L + 1)]


def localized_integrals(
    level_sets: Sequence[Sequence[np.ndarray]],
    combine: Callable[[list[np.ndarray]], np.ndarray],
    weight: np.ndarray | None = None,
) -> list[np.ndarray]:
    """For every unit-subtree Q: the integral over Q of combine(local sups) * weight.

    ``level_sets[j][k]`` holds cube values at level k; the local sup at x for
    the cube Q is taken over cubes R with x in R and R contained in Q.
    """
    L = len(level_sets[0]) - 1
    n = level_sets[0][0].ndim
    cell = 2.0 ** (-n * L)
    out = []
    for k0 in range(L + 1):
        runs = [vals[k0] for vals in level_sets]
        for k in range(k0 + 1, L + 1):
            runs = [np.maximum(upsample(r), vals[k]) for r, vals in zip(runs, level_sets)]
        dens = combine(runs)
        if weight is not None:
            dens = dens * weight
        out.append(block_sum(dens * cell, k0))
    return out


def _averages(w: GridFunction) -> list[np.ndarray]:
    return [t / v for t, v in zip(w.tree, _volumes(w.n, w.L))]


def _require(value, name):
    if value is None:
        raise ValueError(f"{name}: required for this constant")
    return value


def _exponent(p, name="p"):
    p = _require(p, name)
    if not (1 < p < math.inf):
        raise ValueError(f"{name}: must lie in (1, inf), got {p}")
    return float(p)


def _joint_levels(omega: GridFunction, sigma: GridFunction, p: float):
    vols = _volumes(omega.n, omega.L)
    return [o * s ** (p - 1) / v**p for o, s, v in zip(omega.tree, sigma.tree, vols)]


def linear_constant(kind, sigma: Weight, omega: Weight | None = None, p=None, q=None, detail=False):
    """One-weight and two-weight characteristics; see LinearKind."""
    kind = LinearKind(kind)
    sigma = Weight.of(sigma)
    if omega is not None:
        omega = Weight.of(omega)
        _check_same_grid(sigma, omega)
    vols = _volumes(sigma.n, sigma.L)
    if kind is LinearKind.A_p:
        p = _exponent(p)
        levels = _joint_levels(sigma, Weight(sigma.values ** (-1.0 / (p - 1))), p)
    elif kind is LinearKind.JOINT_A_p:
        p = _exponent(p)
        levels = _joint_levels(_require(omega, "omega"), sigma, p)
    elif kind is LinearKind.A_pq:
        p = _exponent(p)
        q = _exponent(q, "q")
        pp = conjugate(p)
        a = _averages(Weight(sigma.values**q))
        b = _averages(Weight(sigma.values ** (-pp)))
        levels = [x ** (1 / q) * y ** (1 / pp) for x, y in zip(a, b)]
    elif kind is LinearKind.B_p:
        p = _exponent(p)
        omega = _require(omega, "omega")
        levels = [
            o * s**p / v ** (p + 1) * np.exp(-lm)
            for o, s, v, lm in zip(omega.tree, sigma.tree, vols, sigma.log_means)
        ]
    elif kind is LinearKind.AINF_FW:
        ints = localized_integrals([_averages(sigma)], lambda r: r[0])
        levels = [i / s for i, s in zip(ints, sigma.tree)]
    else:
        levels = [avg * np.exp(-lm) for avg, lm in zip(_averages(sigma), sigma.log_means)]
    sup = _sup(levels)
    return sup if detail else sup.value


def nu_weight(sigma_vec: Sequence[Weight], cfg: ExponentConfig) -> Weight:
    """nu = prod_i sigma_i^(p/p_i), built cell-wise."""
    arr = None
    for s, pi in zip(sigma_vec, cfg.p_list):
        term = s.values ** (cfg.p / pi)
        arr = term if arr is None else arr * term
    return Weight(arr)


def _check_weights(sigma_vec, cfg: ExponentConfig, omega=None):
    if len(sigma_vec) != cfg.m:
        raise ValueError(f"sigma_vec: expected {cfg.m} weights, got {len(sigma_vec)}")
    sig = [Weight.of(s) for s in sigma_vec]
    for s in sig[1:]:
        _check_same_grid(sig[0], s)
    if sig[0].n != cfg.n:
        raise ValueError("weight dimension differs from cfg.n")
    if omega is not None:
        omega = Weight.of(omega)
        _check_same_grid(sig[0], omega)
    return sig, omega


def multilinear_constant(kind, sigma_vec, omega=None, cfg: ExponentConfig = None, detail=False):
    """Multilinear characteristics; see MultiKind."""
    kind = MultiKind(kind)
    cfg = _require(cfg, "cfg")
    sig, omega = _check_weights(sigma_vec, cfg, omega)
    n, L, p, q = cfg.n, sig[0].L, cfg.p, cfg.q
    vols = _volumes(n, L)
    nu = nu_weight(sig, cfg)
    if kind is MultiKind.A_P:
        levels = [a ** (1 / p) for a in _averages(nu)]
        for s, pp in zip(sig, cfg.conjugates):
            levels = [x * y ** (1 / pp) for x, y in zip(levels, _averages(Weight(s.values ** (1 - pp))))]
    elif kind in (MultiKind.A_Pq, MultiKind.B_Pq):
        omega = _require(omega, "omega")
        e = p * (cfg.m - cfg.alpha / n)
        if kind is MultiKind.A_Pq:
            levels = [o ** (p / q) / v**e for o, v in zip(omega.tree, vols)]
            for s, pp in zip(sig, cfg.conjugates):
                levels = [x * t ** (p / pp) for x, t in zip(levels, s.tree)]
        else:
            levels = [o ** (p / q) / v ** (e + 1) for o, v in zip(omega.tree, vols)]
            for s, pi in zip(sig, cfg.p_list):
                levels = [
                    x * t**p * np.exp(-lm) ** (p / pi)
                    for x, t, lm in zip(levels, s.tree, s.log_means)
                ]
    elif kind is MultiKind.W_Pinf:
        expo = [p / pi for pi in cfg.p_list]

        def combine(runs):
            out = runs[0] ** expo[0]
            for r, x in zip(runs[1:], expo[1:]):
                out = out * r**x
            return out

        ints = localized_integrals([_averages(s) for s in sig], combine)
        levels = [i / t for i, t in zip(ints, nu.tree)]
    else:
        levels = None
        for s, pi in zip(sig, cfg.p_list):
            term = [t ** (p / pi) for t in s.tree]
            levels = term if levels is None else [x * y for x, y in zip(levels, term)]
        levels = [x / t for x, t in zip(levels, nu.tree)]
    sup = _sup(levels)
    return sup if detail else sup.value


def sawyer_testing_constant(kind, sigma_vec, omega, cfg: ExponentConfig, detail=False):
    """sup_Q (int_Q M_{d,alpha}(sigma chi_Q)^q omega)^(1/q) / normalizer(Q)."""
    kind = SawyerKind(kind)
    sig, omega = _check_weights(sigma_vec, cfg, _require(omega, "omega"))
    q = cfg.q
    ints = localized_integrals(
        [_standard_level_values(sig, cfg.homogeneity, top=0)],
        lambda r: r[0] ** q,
        omega.values,
    )
    if kind is SawyerKind.S_linear:
        if cfg.m != 1:
            raise ValueError("S_linear: requires m = 1")
        norms = [t ** (1 / cfg.p) for t in sig[0].tree]
    elif kind is SawyerKind.S_LiSun:
        norms = None
        for s, pi in zip(sig, cfg.p_list):
            term = [t ** (1 / pi) for t in s.tree]
            norms = term if norms is None else [x * y for x, y in zip(norms, term)]
    else:
        norms = [t ** (1 / cfg.p) for t in nu_weight(sig, cfg).tree]
    sup = _sup([i ** (1 / q) / d for i, d in zip(ints, norms)])
    return sup if detail else sup.value

