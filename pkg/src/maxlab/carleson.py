"""Carleson sequences on the unit-cube dyadic tree, embeddings and the Haar paraproduct."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import _sup
from .dyadic import DyadicCube
from .gridfunc import ExponentConfig, GridFunction, _check_same_grid, coarsen, lp_norm, upsample
from .maximal import CZDecomposition


@dataclass
class CarlesonSequence:
    """Sparse nonnegative map Q -> lambda_Q over standard cubes of level >= 0."""

    values: dict[DyadicCube, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for Q, lam in self.values.items():
            if not Q.is_standard or Q.level < 0 or not Q.in_unit_subtree(Q.level):
                raise ValueError(f"{Q} is not a cube of the unit-cube dyadic tree")
            lam = float(lam)
            if not (lam >= 0 and math.isfinite(lam)):
                raise ValueError(f"lambda must be finite and nonnegative, got {lam} at {Q}")
            clean[Q] = clean.get(Q, 0.0) + lam
        dims = {Q.dimension for Q in clean}
        if len(dims) > 1:
            raise ValueError("mixed dimensions in sequence")
        self.values = dict(sorted(clean.items()))

    @property
    def n(self) -> int | None:
        return next(iter(self.values)).dimension if self.values else None

    @property
    def max_level(self) -> int:
        return max((Q.level for Q in self.values), default=-1)

    def __len__(self):
        return len(self.values)

    def items(self):
        return self.values.items()

    def total(self) -> float:
        return math.fsum(self.values.values())

    def dense(self, n: int, L: int) -> list[np.ndarray]:
        if self.max_level > L:
            raise ValueError(f"sequence has cubes of level {self.max_level} > L={L}")
        if self.values and self.n != n:
            raise ValueError("sequence dimension differs from the weight")
        out = [np.zeros((2**k,) * n) for k in range(L + 1)]
        for Q, lam in self.values.items():
            out[Q.level][Q.index] += lam
        return out

    @classmethod
    def from_dense(cls, levels: Sequence[np.ndarray]) -> "CarlesonSequence":
        vals = {}
        for k, arr in enumerate(levels):
            for idx in zip(*np.nonzero(arr)):
                vals[DyadicCube.standard(k, tuple(int(i) for i in idx))] = float(arr[idx])
        return cls(vals)

    def to_json(self) -> str:
        rows = [{"level": Q.level, "index": list(Q.index), "lambda": lam} for Q, lam in self.values.items()]
        return json.dumps(rows, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CarlesonSequence":
        vals = {}
        for row in json.loads(text):
            try:
                idx = row["index"]
                idx = (idx,) if isinstance(idx, int) else tuple(idx)
                Q = DyadicCube.standard(int(row["level"]), idx)
                vals[Q] = vals.get(Q, 0.0) + float(row["lambda"])
            except KeyError as exc:
                raise ValueError(f"sequence entry missing field {exc.args[0]!r}") from None
        return cls(vals)


def _subtree_sums(levels: list[np.ndarray]) -> list[np.ndarray]:
    """S_R = sum over Q inside R, for every R; one bottom-up pass."""
    out = [None] * len(levels)
    out[-1] = levels[-1]
    for k in range(len(levels) - 2, -1, -1):
        out[k] = levels[k] + coarsen(out[k + 1])
    return out


def carleson_constant(lam: CarlesonSequence, sigma: GridFunction, alpha: float = 1.0, detail=False):
    """sup_R (sum_{Q in R} lambda_Q) / sigma(R)^alpha over the unit subtree."""
    if alpha < 1:
        raise ValueError("alpha: must be >= 1")
    sums = _subtree_sums(lam.dense(sigma.n, sigma.L))
    sup = _sup([s / t**alpha for s, t in zip(sums, sigma.tree)])
    return sup if detail else sup.value


def _averages_at(f: GridFunction, sigma: GridFunction):
    _check_same_grid(f, sigma)
    fs = GridFunction(np.abs(f.values) * sigma.values)
    return lambda Q: fs.tree[Q.level][Q.index] / sigma.tree[Q.level][Q.index]


def embedding_sum(lam: CarlesonSequence, sigma: GridFunction, f: GridFunction, p: float, alpha: float) -> float:
    """sum_Q lambda_Q |m_sigma(f, Q)|^(p alpha)."""
    avg = _averages_at(f, sigma)
    return math.fsum(l * abs(float(avg(Q))) ** (p * alpha) for Q, l in lam.items())


def multilinear_embedding_sum(lam, sigma_vec, f_vec, cfg: ExponentConfig, alpha: float) -> float:
    """sum_Q lambda_Q |prod_i m_{sigma_i}(f_i, Q)|^(p alpha)."""
    if len(sigma_vec) != cfg.m or len(f_vec) != cfg.m:
        raise ValueError(f"expected {cfg.m} weights and functions")
    avgs = [_averages_at(f, s) for f, s in zip(f_vec, sigma_vec)]
    terms = []
    for Q, l in lam.items():
        prod = float(avgs[0](Q))
        for a in avgs[1:]:
            prod = prod * float(a(Q))
        terms.append(l * abs(prod) ** (cfg.p * alpha))
    return math.fsum(terms)


def holder_embedding_sum(lam, sigma, f_vec, q_vec, p_vec) -> float:
    """sum_Q lambda_Q prod_j |m_sigma(f_j, Q)|^(q_j); needs sum q_j/p_j >= 1."""
    if not (len(f_vec) == len(q_vec) == len(p_vec)):
        raise ValueError("f_vec, q_vec and p_vec lengths differ")
    if any(pj < 1 for pj in p_vec) or any(qj <= 0 for qj in q_vec):
        raise ValueError("need p_j >= 1 and q_j > 0")
    if holder_alpha(q_vec, p_vec) < 1:
        raise ValueError("q_vec: alpha = sum q_j/p_j must be >= 1")
    avgs = [_averages_at(f, sigma) for f in f_vec]
    terms = []
    for Q, l in lam.items():
        t = l
        for a, qj in zip(avgs, q_vec):
            t = t * abs(float(a(Q))) ** qj
        terms.append(t)
    return math.fsum(terms)


def holder_alpha(q_vec, p_vec) -> float:
    return sum(qj / pj for qj, pj in zip(q_vec, p_vec))


def sequence_from_cz(cz: CZDecomposition, sigma_vec, omega: GridFunction, cfg: ExponentConfig) -> CarlesonSequence:
    """lambda_Q = omega(E(Q)) (prod_i sigma_i(Q) / |Q|^(1 - alpha/(nm)))^q on stopping cubes.

    A stopping cube of the chain [0,2^j)^n sees the same data as [0,1)^n, so
    its term is stored on the key [0,1)^n.
    """
    vals: dict[DyadicCube, float] = {}
    expo = 1.0 - cfg.alpha / (cfg.n * cfg.m)
    cell = cz.cell_volume
    root = DyadicCube.standard(0, (0,) * cfg.n)
    for _, sc in cz.cubes():
        Q = sc.cube
        vol = float(Q.volume)
        key = root if sc.is_chain else Q
        prod = 1.0
        for s in sigma_vec:
            prod *= s.tree[key.level][key.index] / vol**expo
        w_e = math.fsum((omega.values[sc.E] * cell).ravel())
        vals[key] = vals.get(key, 0.0) + w_e * prod**cfg.q
    return CarlesonSequence(vals)


# Haar paraproduct (n = 1)

@dataclass
class HaarSymbol:
    """Haar coefficients <phi, h_I> of a symbol, on levels 0..L-1."""

    L: int
    coeffs: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1 to resolve Haar functions")
        clean = {}
        for (k, m), c in self.coeffs.items():
            k, m = int(k), int(m)
            if not (0 <= k <= self.L - 1 and 0 <= m < 2**k):
                raise ValueError(f"Haar index (level={k}, index={m}) outside levels 0..{self.L - 1}")
            clean[(k, m)] = float(c)
        self.coeffs = dict(sorted(clean.items()))

    def levels(self) -> list[np.ndarray]:
        out = [np.zeros(2**k) for k in range(self.L)]
        for (k, m), c in self.coeffs.items():
            out[k][m] = c
        return out

    @classmethod
    def single(cls, L: int, level: int = 0, index: int = 0, coeff: float = 1.0) -> "HaarSymbol":
        return cls(L, {(level, index): coeff})

    @classmethod
    def random(cls, rng: np.random.Generator, L: int, density: float = 0.5) -> "HaarSymbol":
        coeffs = {}
        for k in range(L):
            for m in range(2**k):
                if rng.random() < density:
                    coeffs[(k, m)] = float(rng.normal() * 2.0 ** (-k / 2))
        return cls(L, coeffs)

    def to_json(self) -> str:
        rows = [{"level": k, "index": m, "coeff": c} for (k, m), c in self.coeffs.items()]
        return json.dumps(rows, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, L: int | None = None) -> "HaarSymbol":
        rows = json.loads(text)
        try:
            coeffs = {(int(r["level"]), int(r["index"])): float(r["coeff"]) for r in rows}
        except KeyError as exc:
            raise ValueError(f"symbol entry missing field {exc.args[0]!r}") from None
        if L is None:
            L = max((k for k, _ in coeffs), default=0) + 1
        return cls(L, coeffs)


def _check_p(p: float):
    if not (1 <= p <= 2):
        raise ValueError(f"p must lie in [1, 2], got {p}")


def haar_function(L: int, level: int, index: int) -> GridFunction:
    arr = np.zeros(2**L)
    w = 2 ** (L - level)
    start = index * w
    amp = 2.0 ** (level / 2)
    arr[start : start + w // 2] = -amp
    arr[start + w // 2 : start + w] = amp
    return GridFunction(arr, signed=True)


def paraproduct_apply(phi: HaarSymbol, b: GridFunction) -> GridFunction:
    """Pi_phi b = sum_I <phi, h_I> m_I(b) h_I, evaluated cell-wise."""
    if b.n != 1:
        raise ValueError("the paraproduct is one-dimensional")
    if b.L != phi.L:
        raise ValueError(f"grid L={b.L} differs from symbol L={phi.L}")
    L = b.L
    out = np.zeros(2**L)
    for k, c in enumerate(phi.levels()):
        if not c.any():
            continue
        avg = b.tree[k] * 2.0**k
        amp = c * avg * 2.0 ** (k / 2)
        pair = np.stack([-amp, amp], axis=1).reshape(-1)
        out += upsample(pair, L - k - 1)
    return GridFunction(out, signed=True)


def paraproduct_carleson(phi: HaarSymbol, p: float, detail=False):
    """A = sup_J |J|^(-2/p) sum_{I in J} <phi, h_I>^2."""
    _check_p(p)
    lv = [c**2 for c in phi.levels()] + [np.zeros(2**phi.L)]
    sums = _subtree_sums(lv)
    sup = _sup([s * 2.0 ** (2 * k / p) for k, s in enumerate(sums)])
    return sup if detail else sup.value


def paraproduct_bounds(A: float, p: float) -> tuple[float, float]:
    """Two-sided envelope for ||Pi_phi||_{L^p -> L^2} in terms of A.

    Lower: the indicator of the maximizing J. Upper: Carleson embedding with
    lambda_I = <phi,h_I>^2, exponent 2/p, and ||M_d||_p <= p'.
    """
    lower = math.sqrt(A)
    if p == 1:
        return lower, math.inf
    return lower, math.sqrt(2.0 / p) * (p / (p - 1)) * math.sqrt(A)


def _paraproduct_candidates(L: int, trials: int, seed: int):
    for k in range(L + 1):
        for m in range(2**k):
            yield f"indicator(k={k},m={m})", GridFunction.indicator(DyadicCube.standard(k, m), 1, L)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        kind = t % 3
        if kind == 0:
            yield f"random_cells(t={t})", GridFunction(rng.lognormal(0.0, 1.0, 2**L))
        elif kind == 1:
            k = int(rng.integers(0, L))
            m = int(rng.integers(0, 2**k))
            yield f"haar(k={k},m={m})", haar_function(L, k, m)
        else:
            k = int(rng.integers(0, L + 1))
            m = int(rng.integers(0, 2**k))
            base = GridFunction.indicator(DyadicCube.standard(k, m), 1, L).values
            bump = rng.lognormal(0.0, 1.0, 2**L)
            yield f"bump(k={k},m={m},t={t})", GridFunction(base * (1.0 + bump))


def paraproduct_norm_estimate(phi: HaarSymbol, p: float, trials: int = 0, seed: int = 0, detail=False):
    """Lower bound for ||Pi_phi||_{L^p -> L^2}: max ratio over test functions.

    Every dyadic indicator is always tried, then ``trials`` seeded random
    functions, so the estimate is nondecreasing in ``trials``.
    """
    _check_p(p)
    one = GridFunction.constant(1.0, 1, phi.L)
    best, arg = 0.0, None
    for desc, b in _paraproduct_candidates(phi.L, trials, seed):
        den = lp_norm(b, one, p)
        if den == 0:
            continue
        r = lp_norm(paraproduct_apply(phi, b), one, 2.0) / den
        if r > best:
            best, arg = r, desc
    return (best, arg) if detail else best
