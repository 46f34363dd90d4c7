from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from maxlab.dyadic import all_shifts
from maxlab.gridfunc import ExponentConfig, GridFunction, Weight
from maxlab.maximal import (
    cz_decomposition,
    default_base,
    dyadic_maximal,
    lattice_fractional_maximal,
    multilinear_fractional_approx,
    multilinear_fractional_dyadic,
    multilinear_weighted_maximal,
    packing_gamma,
    weighted_dyadic_maximal,
)

import oracles


def test_dyadic_maximal_examples():
    assert list(dyadic_maximal(GridFunction([4.0, 0, 0, 0])).values) == [4.0, 2.0, 1.0, 1.0]
    c = GridFunction.constant(2.5, 2, 3)
    assert np.all(dyadic_maximal(c).values == 2.5)


def test_weighted_reduces_to_unweighted():
    f = GridFunction(np.random.default_rng(1).random(16))
    assert weighted_dyadic_maximal(f, Weight.constant(1.0, 1, 4)) == dyadic_maximal(f)


def test_fractional_reductions():
    f = GridFunction(np.random.default_rng(2).random((8, 8)))
    assert multilinear_fractional_dyadic([f], ExponentConfig(2, (2.0,), 2.0)) == dyadic_maximal(f)
    cfg = ExponentConfig(1, (2.0, 2.0), 2.0, 0.5)
    out = multilinear_fractional_dyadic([GridFunction.constant(2.0, 1, 3), GridFunction.constant(3.0, 1, 3)], cfg)
    assert np.allclose(out.values, 6.0, rtol=1e-15)


def test_bilinear_example():
    cfg = ExponentConfig(1, (2.0, 2.0), 1.0)
    out = multilinear_fractional_dyadic([GridFunction([1.0, 0.0]), GridFunction([0.0, 1.0])], cfg)
    assert list(out.values) == [0.25, 0.25]


def test_multilinear_weighted_examples():
    rng = np.random.default_rng(3)
    f, s = GridFunction(rng.random(4)), Weight(rng.random(4) + 0.1)
    assert multilinear_weighted_maximal([f], [s]) == weighted_dyadic_maximal(f, s)
    cs = [GridFunction.constant(c, 1, 2) for c in (2.0, 5.0)]
    ws = [Weight(rng.random(4) + 0.1) for _ in range(2)]
    assert np.allclose(multilinear_weighted_maximal(cs, ws).values, 10.0, rtol=1e-14)
    fs = [GridFunction(rng.random(4)) for _ in range(2)]
    ref = oracles.multilinear_weighted_maximal([g.values for g in fs], [w.values for w in ws])
    assert np.array_equal(multilinear_weighted_maximal(fs, ws).values, ref)


def test_approx_examples():
    cfg = ExponentConfig(1, (2.0,), 2.0)
    lower, _ = multilinear_fractional_approx([GridFunction.constant(1.0, 1, 3)], cfg)
    assert np.all(lower.values == 1.0)
    cfg2 = ExponentConfig(1, (2.0, 2.0), 1.0)
    ones = [GridFunction.constant(1.0, 1, 3)] * 2
    lower, upper = multilinear_fractional_approx(ones, cfg2)
    assert np.all(upper.values >= 36 * lower.values)


@pytest.mark.parametrize("seed", range(5))
def test_sandwich_against_lattice(seed):
    rng = np.random.default_rng(seed)
    cfg = ExponentConfig(1, (2.0, 4.0), 2.0, 0.3)
    fs = [GridFunction(rng.random(16)) for _ in range(2)]
    lower, upper = multilinear_fractional_approx(fs, cfg)
    oracle = lattice_fractional_maximal(fs, cfg).values
    # shifted masses use fsum, the lattice oracle sums slices: allow a few ulps
    assert np.all(lower.values <= oracle * (1 + 1e-12))
    assert np.all(oracle <= upper.values)


@settings(max_examples=25, deadline=None)
@given(arrays(float, (8,), elements=st.floats(0, 50)), arrays(float, (8,), elements=st.floats(0.01, 50)))
def test_weighted_maximal_matches_oracle(f, s):
    got = weighted_dyadic_maximal(GridFunction(f), Weight(s)).values
    assert np.array_equal(got, oracles.weighted_maximal(f, s))


@settings(max_examples=25, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(0, 50)), st.sampled_from(all_shifts(2)), st.floats(0, 1.5))
def test_fractional_matches_oracle_2d(f, shift, alpha):
    cfg = ExponentConfig(2, (2.0,), 2.0, alpha)
    got = multilinear_fractional_dyadic([GridFunction(f)], cfg, shift).values
    if all(b == 0 for b in shift):
        ref = oracles.standard_fractional([f], cfg.homogeneity)
    else:
        ref = oracles.fractional_maximal([f], cfg.homogeneity, shift)
    assert np.array_equal(got, ref)


@settings(max_examples=30, deadline=None)
@given(arrays(float, (8,), elements=st.floats(0, 50)))
def test_maximal_dominates_and_is_monotone(f):
    g = GridFunction(f)
    M = dyadic_maximal(g).values
    assert np.all(M >= f * (1 - 1e-15))
    M2 = dyadic_maximal(GridFunction(f + 1.0)).values
    assert np.all(M2 >= M)


# stopping cubes

def test_packing_gamma_examples():
    assert packing_gamma(ExponentConfig(1, (2.0,), 2.0), 4.0) == 2.0
    assert packing_gamma(ExponentConfig(1, (2.0, 2.0), 1.0), 8.0) == pytest.approx(1 / (1 - math.sqrt(0.5)), rel=1e-14)
    assert packing_gamma(ExponentConfig(1, (2.0,), 2.0), 2.0**11) < 1.01
    with pytest.raises(ValueError, match="^a:"):
        packing_gamma(ExponentConfig(1, (2.0,), 2.0), 2.0)


def test_cz_empty_and_constant():
    cfg = ExponentConfig(1, (2.0,), 2.0)
    one = Weight.constant(1.0, 1, 3)
    assert cz_decomposition([GridFunction.constant(0.0, 1, 3)], [one], cfg, 4.0).is_empty()
    cz = cz_decomposition([GridFunction.constant(1.0, 1, 3)], [one], cfg, 4.0)
    (k, sc), = list(cz.cubes())
    assert k == -1 and sc.cube.level == -1 and sc.E.all()
    assert sc.e_volume(cz.cell_volume) == 2.0
    assert float(sc.cube.volume) <= cz.gamma * sc.e_volume(cz.cell_volume)


@pytest.mark.parametrize("m,alpha,n,L", [(1, 0.0, 1, 5), (2, 0.5, 1, 5), (2, 0.0, 2, 3), (1, 0.5, 2, 3)])
def test_cz_invariants(m, alpha, n, L):
    cfg = ExponentConfig(n, (2.0 * m,) * m, 2.0, alpha)
    h = cfg.homogeneity
    for seed in range(6):
        rng = np.random.default_rng(seed)
        fs = [GridFunction(rng.lognormal(0, 1.5, (2**L,) * n)) for _ in range(m)]
        ws = [Weight(rng.lognormal(0, 1, (2**L,) * n)) for _ in range(m)]
        cz = cz_decomposition(fs, ws, cfg)
        assert cz.a == default_base(cfg)
        owner = np.zeros((2**L,) * n, dtype=int)
        for k, sc in cz.cubes():
            assert cz.a**k < sc.value <= 2**h * cz.a**k * (1 + 1e-12)
            assert float(sc.cube.volume) <= cz.gamma * sc.e_volume(cz.cell_volume) * (1 + 1e-12)
            owner += sc.E
        assert owner.max() <= 1
        for cubes in cz.levels.values():
            for i, a in enumerate(cubes):
                assert not any(a.cube.contains(b.cube) or b.cube.contains(a.cube) for b in cubes[i + 1 :])
