"""Acceptance suite: one printed PASS/FAIL line per criterion."""

from __future__ import annotations

import subprocess
import sys
import time

import numpy as np
import pytest

from maxlab.carleson import (
    CarlesonSequence,
    HaarSymbol,
    embedding_sum,
    haar_function,
    paraproduct_apply,
    paraproduct_carleson,
)
from maxlab.constants import linear_constant, multilinear_constant, sawyer_testing_constant
from maxlab.dyadic import DyadicCube, all_shifts
from maxlab.gridfunc import ExponentConfig, GridFunction, Weight
from maxlab.lab import ExperimentConfig, verify_theorem
from maxlab.maximal import (
    dyadic_maximal,
    multilinear_fractional_dyadic,
    multilinear_weighted_maximal,
    weighted_dyadic_maximal,
)

import oracles


@pytest.fixture
def report(capsys):
    lines = []

    def emit(number: int, ok: bool, text: str):
        lines.append(f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {text}")
        with capsys.disabled():
            print("\n" + lines[-1])
        return ok

    return emit


def _run_all(configs):
    reports = [verify_theorem(ExperimentConfig(**c)) for c in configs]
    trials = sum(len(r.trials) for r in reports)
    worst = max(reports, key=lambda r: r.max_ratio)
    return reports, trials, worst


def _summary(reports, trials, worst, elapsed):
    ok = all(r.passed for r in reports)
    return ok, f"{trials} trials, max ratio {worst.max_ratio:.6g} ({worst.theorem}/{worst.argmax.binding.name}), {elapsed:.1f}s"


def _max_check(reports, prefix):
    return max((c.ratio for r in reports for t in r.trials for c in t.checks if c.name.startswith(prefix)), default=0.0)


def test_01_oracle_equivalence(report):
    start = time.perf_counter()
    mismatches = 0
    count = 0
    for n, L, reps in ((1, 5, 50), (2, 3, 10)):
        for seed in range(reps):
            rng = np.random.default_rng([n, seed])
            m = int(rng.integers(1, 3))
            alpha = float(rng.choice([0.0, 0.5]))
            shape = (2**L,) * n
            fs = [GridFunction(np.where(rng.random(shape) < 0.2, 0.0, rng.lognormal(0, 1, shape))) for _ in range(m)]
            ws = [Weight(rng.lognormal(0, 1, shape)) for _ in range(m)]
            fv, wv = [f.values for f in fs], [w.values for w in ws]
            cfg = ExponentConfig(n, (2.0 * m,) * m, 2.0, alpha)
            pairs = [
                (dyadic_maximal(fs[0]).values, oracles.dyadic_maximal(fv[0])),
                (weighted_dyadic_maximal(fs[0], ws[0]).values, oracles.weighted_maximal(fv[0], wv[0])),
                (multilinear_weighted_maximal(fs, ws).values, oracles.multilinear_weighted_maximal(fv, wv)),
            ]
            for b in all_shifts(n):
                got = multilinear_fractional_dyadic(fs, cfg, b).values
                if all(x == 0 for x in b):
                    ref = oracles.standard_fractional(fv, cfg.homogeneity)
                else:
                    ref = oracles.fractional_maximal(fv, cfg.homogeneity, b)
                pairs.append((got, ref))
            count += len(pairs)
            mismatches += sum(not np.array_equal(a, b) for a, b in pairs)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 10
    report(1, ok, f"oracle equivalence: {count} operator outputs, {mismatches} mismatches, {elapsed:.1f}s (< 10s)")
    assert ok


def test_02_trivial_identities(report):
    errs = {}
    for n, L in ((1, 4), (2, 3), (3, 2)):
        one = Weight.constant(1.0, n, L)
        errs[f"A_p n={n}"] = linear_constant("A_p", one, p=2.5)
        errs[f"JOINT_A_p n={n}"] = linear_constant("JOINT_A_p", one, one, p=2.5)
        errs[f"B_p n={n}"] = linear_constant("B_p", one, one, p=2.5)
        errs[f"AINF_FW n={n}"] = linear_constant("AINF_FW", one)
        errs[f"AINF_HR n={n}"] = linear_constant("AINF_HR", one)
        cfg = ExponentConfig(n, (3.0, 1.5), 2.0)
        errs[f"W_Pinf n={n}"] = multilinear_constant("W_Pinf", [one, one], None, cfg)
        s = Weight(np.random.default_rng(n).lognormal(0, 1, (2**L,) * n))
        errs[f"RH_P n={n}"] = multilinear_constant("RH_P", [s, s], None, cfg)
        c1 = ExponentConfig(n, (2.0,), 2.0)
        for kind in ("S_linear", "S_LiSun", "S_nu"):
            errs[f"{kind} n={n}"] = sawyer_testing_constant(kind, [one], one, c1)
        # critical scaling 1/q = 1/p - alpha/n
        alpha = 0.5
        p = 1.0
        q = 1.0 / (1.0 / p - alpha / n)
        cfg_c = ExponentConfig(n, (2.0, 2.0), q, alpha)
        errs[f"A_Pq n={n}"] = multilinear_constant("A_Pq", [one, one], one, cfg_c)
    worst = max(errs, key=lambda k: abs(errs[k] - 1))
    dev = abs(errs[worst] - 1)
    ok = dev <= 1e-12
    report(2, ok, f"trivial identities: {len(errs)} constants equal 1, max deviation {dev:.2e} ({worst})")
    assert ok


def test_03_carleson_embedding(report):
    start = time.perf_counter()
    reports, trials, worst = _run_all([dict(theorem="CARLESON_EQ", n=1, L=4, trials=100, seed=0)])
    # indicator recovery: with lambda restricted to the subtree of R, the embedding of chi_R is the sum
    rng = np.random.default_rng(3)
    exact = True
    for _ in range(20):
        s = Weight(rng.lognormal(0, 1, 16))
        vals = {DyadicCube.standard(k, i): float(rng.lognormal()) for k, i in oracles.standard_cubes(1, 4) if rng.random() < 0.5}
        k = int(rng.integers(0, 5))
        R = DyadicCube.standard(k, (int(rng.integers(0, 2**k)),))
        inside = CarlesonSequence({Q: v for Q, v in vals.items() if R.contains(Q)})
        for p, al in ((1.25, 1.0), (4.0, 2.0)):
            exact &= embedding_sum(inside, s, GridFunction.indicator(R, 1, 4), p, al) == inside.total()
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and exact and elapsed < 20
    report(3, ok, f"Carleson embedding: {text} (< 20s); indicator recovery exact: {exact}")
    assert ok


def test_04_multilinear_and_holder(report):
    start = time.perf_counter()
    configs = [
        dict(theorem="MULTI_CARLESON", n=1, L=4, p_list=(2.0, 3.0), q=2.0, trials=25, seed=0),
        dict(theorem="MULTI_CARLESON", n=2, L=3, p_list=(3.0, 3.0, 3.0), q=2.0, trials=15, seed=1),
        dict(theorem="MULTI_CARLESON", n=1, L=4, p_list=(1.5,), q=2.0, trials=10, seed=2),
    ]
    reports, trials, worst = _run_all(configs)
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and trials >= 50 and elapsed < 20
    report(4, ok, f"multilinear and Hoelder embeddings: {text} (< 20s)")
    assert ok


def test_05_cover_and_sandwich(report):
    start = time.perf_counter()
    configs = [
        dict(theorem="GRID_COVER", n=1, trials=100, seed=0),
        dict(theorem="SANDWICH", n=1, L=5, p_list=(2.0,), q=2.0, alpha=0.0, trials=7, seed=0),
        dict(theorem="SANDWICH", n=1, L=5, p_list=(1.5,), q=2.0, alpha=0.5, trials=7, seed=1),
        dict(theorem="SANDWICH", n=1, L=5, p_list=(2.0, 2.0), q=2.0, alpha=0.5, trials=6, seed=2),
    ]
    reports, trials, worst = _run_all(configs)
    side = max(c.lhs for t in reports[0].trials for c in t.checks if c.name == "side_ratio")
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and side <= 6 and elapsed < 30
    report(5, ok, f"cover and sandwich: max side ratio {side:.4g} <= 6; {text} (< 30s)")
    assert ok


def test_06_cz_packing(report):
    start = time.perf_counter()
    configs = [
        dict(theorem="PACKING", n=1, L=5, p_list=pl, q=2.0, alpha=al, trials=13, seed=i)
        for i, (pl, al) in enumerate((((2.0,), 0.0), ((2.0,), 0.5), ((4.0, 4.0), 0.0), ((4.0, 4.0), 0.5)))
    ]
    reports, trials, worst = _run_all(configs)
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and trials >= 50 and elapsed < 20
    report(6, ok, f"CZ packing and disjoint E-sets: {text} (< 20s)")
    assert ok


def test_07_sawyer(report):
    start = time.perf_counter()
    configs = [
        dict(theorem="SAWYER_LINEAR", n=1, L=4, p_list=(2.0,), q=3.0, alpha=0.25, trials=25, seed=0),
        dict(theorem="PROP_SUFF", n=1, L=4, p_list=(3.0, 3.0), q=2.0, alpha=0.25, trials=25, seed=1),
        dict(theorem="LISUN", n=1, L=4, p_list=(2.0, 3.0), q=3.0, trials=25, seed=2),
        dict(theorem="EQUAL_WEIGHTS", n=1, L=4, p_list=(4.0, 4.0), q=2.0, trials=25, seed=3),
    ]
    reports, trials, worst = _run_all(configs)
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and elapsed < 60
    consts = ", ".join(f"{r.theorem} C={r.c_tracked['sufficiency']:.4g}" for r in reports)
    suff = _max_check(reports, "sufficiency")
    report(7, ok, f"Sawyer necessity/sufficiency: {text} (< 60s); max sufficiency ratio {suff:.4g}; {consts}")
    assert ok


def test_08_chain_and_main_bounds(report):
    start = time.perf_counter()
    configs = [
        dict(theorem="MAIN_BOUNDS", n=1, L=4, p_list=(3.0, 3.0), q=2.0, trials=20, seed=0),
        dict(theorem="MAIN_BOUNDS", n=1, L=4, p_list=(2.0,), q=3.0, alpha=0.25, trials=15, seed=1),
        dict(theorem="MAIN_BOUNDS", n=2, L=3, p_list=(4.0, 4.0), q=3.0, alpha=0.5, trials=15, seed=2),
    ]
    reports, trials, worst = _run_all(configs)
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and trials >= 50 and elapsed < 60
    main = _max_check(reports, "main")
    report(8, ok, f"chain inequality and main bounds: {text} (< 60s); max main-bound ratio {main:.4g}")
    assert ok


def test_09_ainf_packing(report):
    start = time.perf_counter()
    configs = [
        dict(theorem="AINF_PACK", n=1, L=5, p_list=(2.0,), q=2.0, trials=25, seed=0),
        dict(theorem="AINF_PACK", n=2, L=3, p_list=(4.0, 4.0), q=2.0, alpha=0.5, trials=25, seed=1),
    ]
    reports, trials, worst = _run_all(configs)
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and elapsed < 20
    report(9, ok, f"A_inf Carleson packing: {text} (< 20s)")
    assert ok


def test_10_paraproduct(report):
    start = time.perf_counter()
    L = 6
    phi = HaarSymbol.single(L)
    single = all(paraproduct_carleson(phi, p) == 1.0 for p in (1.0, 1.25, 1.5, 2.0))
    out = paraproduct_apply(phi, GridFunction.constant(1.0, 1, L))
    single &= out == haar_function(L, 0, 0) and float(np.sum(out.values**2) / 2**L) == 1.0
    reports, trials, worst = _run_all([dict(theorem="PARAPRODUCT", n=1, L=6, trials=20, seed=0)])
    elapsed = time.perf_counter() - start
    ok, text = _summary(reports, trials, worst, elapsed)
    ok = ok and single and elapsed < 30
    report(10, ok, f"paraproduct: single-coefficient A=1 and norm 1 exact: {single}; {text} (< 30s)")
    assert ok


def test_11_determinism(report, tmp_path):
    cases = [
        ["--theorem", "GRID_COVER", "--trials", "20"],
        ["--theorem", "PROP_SUFF", "--p-list", "3", "3", "--q", "2", "--trials", "4"],
        ["--theorem", "PACKING", "--p-list", "2", "2", "--q", "1", "--alpha", "0.5", "--trials", "6", "--jobs", "2"],
    ]
    same = 0
    for i, args in enumerate(cases):
        outs = []
        for rep in range(2):
            path = tmp_path / f"r{i}_{rep}.json"
            cmd = [sys.executable, "-m", "maxlab.cli", "verify", *args, "--seed", "7", "--output", str(path)]
            subprocess.run(cmd, check=True)
            outs.append(path.read_bytes())
        same += outs[0] == outs[1]
    ok = same == len(cases)
    report(11, ok, f"determinism: {same}/{len(cases)} repeated CLI verifications byte-identical")
    assert ok
