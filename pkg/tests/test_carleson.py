from __future__ import annotations

import math

import numpy as np
import pytest

from maxlab.carleson import (
    CarlesonSequence,
    HaarSymbol,
    carleson_constant,
    embedding_sum,
    haar_function,
    holder_embedding_sum,
    multilinear_embedding_sum,
    paraproduct_apply,
    paraproduct_bounds,
    paraproduct_carleson,
    paraproduct_norm_estimate,
    sequence_from_cz,
)
from maxlab.constants import nu_weight, sawyer_testing_constant
from maxlab.dyadic import DyadicCube
from maxlab.gridfunc import ExponentConfig, GridFunction, Weight
from maxlab.maximal import cz_decomposition

import oracles


def _rand_seq(rng, n, L):
    vals = {}
    for k, idx in oracles.standard_cubes(n, L):
        if rng.random() < 0.5:
            vals[DyadicCube.standard(k, idx)] = float(rng.lognormal()) * 2.0 ** (-n * k)
    return CarlesonSequence(vals)


def test_constant_examples():
    s = Weight(np.random.default_rng(0).lognormal(0, 1, 8))
    R0 = DyadicCube.standard(2, (1,))
    lam = CarlesonSequence({R0: s.tree[2][1] ** 1.5})
    res = carleson_constant(lam, s, 1.5, detail=True)
    assert res.value == pytest.approx(1.0, rel=1e-14) and res.cube == R0
    one = Weight.constant(1.0, 1, 3)
    full = CarlesonSequence({DyadicCube.standard(k, i): float(one.tree[k][i]) for k, i in oracles.standard_cubes(1, 3)})
    assert carleson_constant(full, one) == pytest.approx(4.0, rel=1e-14)
    assert carleson_constant(CarlesonSequence(), one) == 0.0


def test_sequence_validation_and_json():
    with pytest.raises(ValueError):
        CarlesonSequence({DyadicCube.standard(0, (0,)): -1.0})
    with pytest.raises(ValueError):
        CarlesonSequence({DyadicCube.standard(1, (2,)): 1.0})
    lam = _rand_seq(np.random.default_rng(1), 2, 2)
    assert CarlesonSequence.from_json(lam.to_json()) == lam


@pytest.mark.parametrize("seed", range(4))
def test_constant_and_sums_match_naive(seed):
    rng = np.random.default_rng(seed)
    s = Weight(rng.lognormal(0, 1, 8))
    lam = _rand_seq(rng, 1, 3)
    items = [((Q.level, Q.index), v) for Q, v in lam.items()]
    assert carleson_constant(lam, s, 1.5) == pytest.approx(oracles.carleson_constant(items, s.values, 1.5), rel=1e-12)
    f = GridFunction(rng.random(8))
    naive = 0.0
    for Q, v in lam.items():
        sl = oracles.cells_of(Q.level, Q.index, 3)
        naive += v * (np.sum(f.values[sl] * s.values[sl]) / np.sum(s.values[sl])) ** (2.0 * 1.5)
    assert embedding_sum(lam, s, f, 2.0, 1.5) == pytest.approx(naive, rel=1e-12)
    assert embedding_sum(lam, s, GridFunction.constant(1.0, 1, 3), 2.0, 1.5) == pytest.approx(lam.total(), rel=1e-14)


def test_multilinear_and_holder_forms():
    rng = np.random.default_rng(7)
    lam = _rand_seq(rng, 1, 3)
    ws = [Weight(rng.lognormal(0, 1, 8)) for _ in range(2)]
    fs = [GridFunction(rng.random(8)) for _ in range(2)]
    cfg1 = ExponentConfig(1, (2.0,), 2.0)
    assert multilinear_embedding_sum(lam, ws[:1], fs[:1], cfg1, 1.5) == embedding_sum(lam, ws[0], fs[0], 2.0, 1.5)
    cfg = ExponentConfig(1, (2.0, 3.0), 2.0)
    ones = [GridFunction.constant(1.0, 1, 3)] * 2
    assert multilinear_embedding_sum(lam, ws, ones, cfg, 1.0) == pytest.approx(lam.total(), rel=1e-14)
    naive = 0.0
    for Q, v in lam.items():
        sl = oracles.cells_of(Q.level, Q.index, 3)
        prod = 1.0
        for f, w in zip(fs, ws):
            prod *= np.sum(f.values[sl] * w.values[sl]) / np.sum(w.values[sl])
        naive += v * prod ** (cfg.p * 1.0)
    assert multilinear_embedding_sum(lam, ws, fs, cfg, 1.0) == pytest.approx(naive, rel=1e-12)
    with pytest.raises(ValueError, match="q_vec"):
        holder_embedding_sum(lam, ws[0], fs, [0.5, 0.5], [2.0, 2.0])


def test_sequence_from_cz_examples():
    cfg = ExponentConfig(1, (2.0,), 2.0)
    one = Weight.constant(1.0, 1, 3)
    empty = cz_decomposition([GridFunction.constant(0.0, 1, 3)], [one], cfg, 4.0)
    assert len(sequence_from_cz(empty, [one], one, cfg)) == 0
    cz = cz_decomposition([GridFunction.constant(1.0, 1, 3)], [one], cfg, 4.0)
    lam = sequence_from_cz(cz, [one], one, cfg)
    (Q, v), = lam.items()
    # chain cube [0,2) folded onto [0,1): omega(E) * (1/2)^q
    assert Q == DyadicCube.standard(0, (0,)) and v == pytest.approx(0.25, rel=1e-15)


@pytest.mark.parametrize("seed", range(6))
def test_cz_sequence_is_carleson(seed):
    rng = np.random.default_rng(seed)
    cfg = ExponentConfig(1, (3.0, 3.0), 2.0, 0.25)
    ws = [Weight(rng.lognormal(0, 1, 16)) for _ in range(2)]
    om = Weight(rng.lognormal(0, 1, 16))
    fs = [GridFunction(rng.lognormal(0, 1, 16)) for _ in range(2)]
    cz = cz_decomposition(fs, ws, cfg)
    lam = sequence_from_cz(cz, ws, om, cfg)
    S = sawyer_testing_constant("S_nu", ws, om, cfg)
    assert carleson_constant(lam, nu_weight(ws, cfg), cfg.q / cfg.p) <= S**cfg.q * (1 + 1e-9)


def test_paraproduct_examples():
    L = 4
    zero = HaarSymbol(L)
    b = GridFunction(np.random.default_rng(0).random(16))
    assert np.all(paraproduct_apply(zero, b).values == 0) and paraproduct_carleson(zero, 2.0) == 0.0
    phi = HaarSymbol.single(L)
    out = paraproduct_apply(phi, GridFunction.constant(1.0, 1, L))
    assert out == haar_function(L, 0, 0)
    assert math.sqrt(np.sum(out.values**2) / 2**L) == 1.0
    for p in (1.0, 1.5, 2.0):
        assert paraproduct_carleson(phi, p) == 1.0
    assert paraproduct_norm_estimate(phi, 2.0) >= 1.0


@pytest.mark.parametrize("seed", range(4))
def test_paraproduct_envelope(seed):
    rng = np.random.default_rng(seed)
    phi = HaarSymbol.random(rng, 5, 0.6)
    for p in (1.0, 1.5, 2.0):
        A = paraproduct_carleson(phi, p)
        est = paraproduct_norm_estimate(phi, p, trials=9, seed=seed)
        lo, hi = paraproduct_bounds(A, p)
        assert lo <= est * (1 + 1e-9) and est <= hi * (1 + 1e-9)


def test_symbol_json_and_validation():
    phi = HaarSymbol.random(np.random.default_rng(3), 4)
    assert HaarSymbol.from_json(phi.to_json(), 4) == phi
    with pytest.raises(ValueError):
        HaarSymbol(2, {(2, 0): 1.0})
    with pytest.raises(ValueError):
        paraproduct_carleson(phi, 3.0)
