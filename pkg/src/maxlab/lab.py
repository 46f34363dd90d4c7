"""Weight generators, norm estimation by test functions, and per-result verifiers."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .carleson import (
    CarlesonSequence,
    HaarSymbol,
    carleson_constant,
    embedding_sum,
    holder_alpha,
    holder_embedding_sum,
    multilinear_embedding_sum,
    paraproduct_bounds,
    paraproduct_carleson,
    paraproduct_norm_estimate,
    _subtree_sums,
)
from .constants import linear_constant, multilinear_constant, nu_weight, sawyer_testing_constant
from .dyadic import ArbitraryCube, DyadicCube, check_resolution, shifted_cover
from .gridfunc import ExponentConfig, GridFunction, Weight, conjugate, lp_norm
from .maximal import (
    cz_decomposition,
    default_base,
    lattice_fractional_maximal,
    multilinear_fractional_approx,
    multilinear_fractional_dyadic,
    multilinear_weighted_maximal,
    packing_gamma,
    weighted_dyadic_maximal,
)

THEOREMS = (
    "SAWYER_LINEAR",
    "PROP_SUFF",
    "RH_EXT",
    "EQUAL_WEIGHTS",
    "AINF_COR",
    "LISUN",
    "CARLESON_EQ",
    "MULTI_CARLESON",
    "PARAPRODUCT",
    "GRID_COVER",
    "SANDWICH",
    "PACKING",
    "MAIN_BOUNDS",
    "CHAIN",
    "AINF_PACK",
    "HYT_PEREZ",
    "BUCKLEY",
)

SLACK = 1e-9


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# weight generation

WEIGHT_PARAMS = {
    "constant": ("c",),
    "two_cell": ("t",),
    "power_like": ("a", "c"),
    "martingale_random": ("low", "high"),
    "checkerboard": ("t", "level"),
}


def parse_weight_spec(spec: str) -> tuple[str, dict]:
    """'two_cell:4' or 'power_like:a=-0.5,c=2' -> (kind, params)."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind not in WEIGHT_PARAMS:
        raise ConfigError("weight", f"unknown weight kind {kind!r}")
    params = {}
    names = WEIGHT_PARAMS[kind]
    for i, tok in enumerate(t for t in rest.split(",") if t.strip()):
        if "=" in tok:
            key, val = tok.split("=", 1)
            key = key.strip()
        else:
            if i >= len(names):
                raise ConfigError("weight", f"too many parameters for {kind}")
            key, val = names[i], tok
        if key not in names and key != "x0":
            raise ConfigError("weight", f"unknown parameter {key!r} for {kind}")
        params[key] = [float(v) for v in val.split(";")] if key == "x0" else float(val)
    return kind, params


def generate_weight(kind: str, params: dict | None = None, seed: int = 0, n: int = 1, L: int = 4) -> Weight:
    """Strictly positive weight of the named family on the 2^(nL) cells."""
    params = dict(params or {})
    check_resolution(n, L)
    shape = (2**L,) * n
    if kind == "constant":
        c = params.get("c", 1.0)
        if c <= 0:
            raise ConfigError("c", "constant weight must be positive")
        return Weight(np.full(shape, float(c)))
    if kind == "two_cell":
        t = params.get("t", 4.0)
        if t <= 0:
            raise ConfigError("t", "two_cell ratio must be positive")
        if L < 1:
            raise ConfigError("L", "two_cell needs L >= 1")
        arr = np.ones(shape)
        arr[2 ** (L - 1) :] = t
        return Weight(arr)
    if kind == "power_like":
        a = params.get("a", -0.5)
        c = params.get("c", 1.0)
        if a <= -n:
            raise ConfigError("a", f"power_like exponent must exceed -n = {-n}")
        if c <= 0:
            raise ConfigError("c", "power_like scale must be positive")
        x0 = np.asarray(params.get("x0", [0.0] * n), dtype=float)
        if x0.shape != (n,):
            raise ConfigError("x0", f"expected {n} coordinates")
        centers = (np.indices(shape) + 0.5) / 2**L
        dist = np.sqrt(sum((centers[i] - x0[i]) ** 2 for i in range(n)))
        if np.any(dist == 0):
            raise ConfigError("x0", "x0 must not be a cell center")
        return Weight(c * dist**a)
    if kind == "martingale_random":
        low, high = params.get("low", 0.5), params.get("high", 2.0)
        if not (0 < low <= high < math.inf):
            raise ConfigError("low", "martingale factors need 0 < low <= high")
        rng = np.random.default_rng(seed)
        arr = np.ones((1,) * n)
        for _ in range(L):
            for ax in range(n):
                arr = np.repeat(arr, 2, axis=ax)
            arr = arr * np.exp(rng.uniform(math.log(low), math.log(high), arr.shape))
        return Weight(arr)
    if kind == "checkerboard":
        t = params.get("t", 4.0)
        level = int(params.get("level", L))
        if t <= 0:
            raise ConfigError("t", "checkerboard value must be positive")
        if not 0 <= level <= L:
            raise ConfigError("level", f"checkerboard level must lie in 0..{L}")
        idx = np.indices(shape) // 2 ** (L - level)
        parity = idx.sum(axis=0) % 2
        return Weight(np.where(parity == 1, t, 1.0))
    raise ConfigError("weight", f"unknown weight kind {kind!r}")


def load_weight(spec: str, n: int, L: int, seed: int = 0) -> Weight:
    """A weight from a file path (CSV/JSON grid function) or a 'kind:params' spec."""
    path = Path(spec)
    if path.suffix in (".json", ".csv") and path.exists():
        return Weight.of(GridFunction.load(path))
    kind, params = parse_weight_spec(spec)
    return generate_weight(kind, params, seed, n, L)


def random_weight(rng: np.random.Generator, n: int, L: int) -> tuple[Weight, str]:
    kind = ("martingale_random", "power_like", "two_cell", "checkerboard", "martingale_random")[
        int(rng.integers(0, 5))
    ]
    if kind == "martingale_random":
        s = float(rng.uniform(0.2, 1.0))
        params = {"low": math.exp(-s), "high": math.exp(s)}
    elif kind == "power_like":
        params = {"a": float(rng.uniform(-0.8 * n, 1.5)), "c": float(math.exp(rng.normal()))}
    elif kind == "two_cell":
        params = {"t": float(math.exp(rng.uniform(-2.0, 2.0)))}
    else:
        params = {"t": float(math.exp(rng.uniform(-2.0, 2.0))), "level": float(rng.integers(1, L + 1))}
    seed = int(rng.integers(0, 2**31))
    desc = kind + "(" + ",".join(f"{k}={v:.4g}" for k, v in params.items()) + f",seed={seed})"
    return generate_weight(kind, params, seed, n, L), desc


# norm estimation

def _qnorm(g: np.ndarray, w: np.ndarray, q: float, cell: float) -> float:
    return float(np.sum(np.abs(g) ** q * w * cell)) ** (1.0 / q)


def _indicator_tuples(n: int, L: int, m: int):
    for k in range(L + 1):
        for idx in np.ndindex(*(2**k,) * n):
            Q = DyadicCube.standard(k, idx)
            chi = GridFunction.indicator(Q, n, L)
            yield f"indicator{list(idx)}@k={k}", [chi] * m


def _random_tuples(sigma_vec, cfg: ExponentConfig, trials: int, seed: int):
    n, L, m = cfg.n, sigma_vec[0].L, cfg.m
    shape = (2**L,) * n
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        kind = t % 3
        if kind == 0:
            k = int(rng.integers(0, L + 1))
            idx = tuple(int(i) for i in rng.integers(0, 2**k, n))
            chi = GridFunction.indicator(DyadicCube.standard(k, idx), n, L).values
            fs = [GridFunction(s.values ** (pp - 1) * chi) for s, pp in zip(sigma_vec, cfg.conjugates)]
            yield f"sigma_adapted{list(idx)}@k={k}", fs
        elif kind == 1:
            k = int(rng.integers(0, max(L, 1)))
            idx = tuple(int(i) for i in rng.integers(0, 2**k, n))
            Q = DyadicCube.standard(k, idx)
            chi = GridFunction.indicator(Q, n, L).values
            fs = []
            for _ in range(m):
                child = Q.child(tuple(int(o) for o in rng.integers(0, 2, n))) if k < L else Q
                half = GridFunction.indicator(child, n, L).values
                fs.append(GridFunction(chi + float(rng.exponential(2.0)) * half))
            yield f"haar_half{list(idx)}@k={k},t={t}", fs
        else:
            fs = [GridFunction(rng.lognormal(0.0, 1.0, shape)) for _ in range(m)]
            yield f"lognormal(t={t})", fs


def operator_norm_estimate(
    sigma_vec,
    omega,
    cfg: ExponentConfig,
    trials: int = 24,
    seed: int = 0,
    detail: bool = False,
    op_weights=None,
):
    """Lower bound for ||M_{d,alpha}(sigma f)||_{q,omega} / prod ||f_i||_{p_i,sigma_i}.

    The candidate set always holds (chi_Q, ..., chi_Q) for every unit-subtree
    cube, followed by ``trials`` seeded random tuples. ``op_weights`` replaces
    the sigma_i inside the operator (the norms keep sigma_i).
    """
    sigma_vec = [Weight.of(s) for s in sigma_vec]
    omega = Weight.of(omega)
    op_weights = sigma_vec if op_weights is None else [Weight.of(s) for s in op_weights]
    L = sigma_vec[0].L
    cell = sigma_vec[0].cell_volume
    best, arg = 0.0, None
    cands = list(_indicator_tuples(cfg.n, L, cfg.m)) + list(_random_tuples(sigma_vec, cfg, trials, seed))
    for desc, fs in cands:
        den = 1.0
        for f, s, pi in zip(fs, sigma_vec, cfg.p_list):
            den *= lp_norm(f, s, pi)
        if den == 0:
            continue
        M = multilinear_fractional_dyadic([f * w for f, w in zip(fs, op_weights)], cfg)
        r = _qnorm(M.values, omega.values, cfg.q, cell) / den
        if r > best:
            best, arg = r, desc
    return (best, arg) if detail else best


# experiment configuration and reports

@dataclass
class ExperimentConfig:
    theorem: str
    n: int = 1
    L: int = 4
    p_list: tuple = (2.0,)
    q: float = 2.0
    alpha: float = 0.0
    trials: int = 25
    seed: int = 0
    norm_trials: int = 24
    a: float | None = None
    weights: tuple = ()
    omega: str | None = None

    def __post_init__(self):
        self.p_list = tuple(float(x) for x in np.atleast_1d(self.p_list))
        self.weights = tuple(self.weights or ())
        self.validate()

    @property
    def cfg(self) -> ExponentConfig:
        return ExponentConfig(self.n, self.p_list, self.q, self.alpha)

    @property
    def base(self) -> float:
        return default_base(self.cfg) if self.a is None else self.a

    def validate(self):
        if self.theorem not in THEOREMS:
            raise ConfigError("theorem", f"unknown theorem id {self.theorem!r}")
        try:
            check_resolution(self.n, self.L)
        except ValueError as exc:
            raise ConfigError("L" if self.n in (1, 2, 3) else "n", str(exc)) from None
        try:
            cfg = self.cfg
        except ValueError as exc:
            field = str(exc).split(":", 1)[0]
            raise ConfigError(field, str(exc).split(": ", 1)[-1]) from None
        if self.trials < 1:
            raise ConfigError("trials", "must be a positive integer")
        if self.norm_trials < 0:
            raise ConfigError("norm_trials", "must be nonnegative")
        if self.a is not None and not self.a > 2.0**cfg.homogeneity:
            raise ConfigError("a", f"must exceed 2^(nm-alpha) = {2.0**cfg.homogeneity}")
        if self.weights and len(self.weights) not in (1, cfg.m):
            raise ConfigError("weights", f"give 1 or {cfg.m} weight specs")
        th = self.theorem
        if th in ("SAWYER_LINEAR", "HYT_PEREZ", "BUCKLEY") and cfg.m != 1:
            raise ConfigError("p_list", f"{th} is a linear statement (m = 1)")
        if th in ("HYT_PEREZ", "BUCKLEY") and (cfg.alpha != 0 or abs(cfg.q - cfg.p) > 1e-12):
            raise ConfigError("q", f"{th} needs alpha = 0 and q = p")
        if th in ("SAWYER_LINEAR", "PROP_SUFF", "RH_EXT", "EQUAL_WEIGHTS", "AINF_COR", "MAIN_BOUNDS"):
            if cfg.p > cfg.q + 1e-12:
                raise ConfigError("q", f"{th} requires p <= q (p={cfg.p:.6g}, q={cfg.q})")
        if th == "LISUN":
            if cfg.m != 2:
                raise ConfigError("p_list", "LISUN is checked in the bilinear case (m = 2)")
            if cfg.q < max(cfg.p_list) - 1e-12:
                raise ConfigError("q", "LISUN requires q >= max p_i")
        if th == "SANDWICH":
            if self.n != 1:
                raise ConfigError("n", "SANDWICH uses the one-dimensional lattice oracle")
            if self.L > 5:
                raise ConfigError("L", "SANDWICH runs at L <= 5")
        if th == "PARAPRODUCT" and self.n != 1:
            raise ConfigError("n", "the paraproduct is one-dimensional")
        if th == "PARAPRODUCT" and self.L < 1:
            raise ConfigError("L", "the paraproduct needs L >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p_list"] = list(self.p_list)
        d["weights"] = list(self.weights)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
        if "theorem" not in d:
            raise ConfigError("theorem", "missing")
        conv = {"n": int, "L": int, "trials": int, "seed": int, "norm_trials": int, "q": float, "alpha": float}
        kw = {}
        for key, val in d.items():
            try:
                kw[key] = conv[key](val) if key in conv else val
            except (TypeError, ValueError):
                raise ConfigError(key, f"invalid value {val!r}") from None
        return cls(**kw)


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs <= 0 else math.inf
        return self.lhs / self.rhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs * (1 + SLACK) or self.lhs <= 0

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": _num(self.lhs), "rhs": _num(self.rhs), "ratio": _num(self.ratio), "pass": self.passed}


@dataclass
class TrialResult:
    trial: int
    descriptor: str
    checks: list[Check]

    @property
    def binding(self) -> Check:
        return max(self.checks, key=lambda c: c.ratio)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _num(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


@dataclass
class VerificationReport:
    theorem: str
    config: dict
    trials: list[TrialResult]
    c_tracked: dict = field(default_factory=dict)
    wall_time: float = 0.0
    provenance: str = "dyadic-restricted"

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trials)

    @property
    def max_ratio(self) -> float:
        return max(t.binding.ratio for t in self.trials)

    @property
    def argmax(self) -> TrialResult:
        return max(self.trials, key=lambda t: t.binding.ratio)

    def to_dict(self, timing: bool = False) -> dict:
        top = self.argmax
        d = {
            "theorem": self.theorem,
            "config": self.config,
            "provenance": self.provenance,
            "c_tracked": {k: _num(v) for k, v in self.c_tracked.items()},
            "pass": self.passed,
            "max_ratio": _num(self.max_ratio),
            "argmax": {"trial": top.trial, "descriptor": top.descriptor, "check": top.binding.name},
            "trials": [
                {
                    "trial": t.trial,
                    "descriptor": t.descriptor,
                    "check": t.binding.name,
                    "lhs": _num(t.binding.lhs),
                    "rhs": _num(t.binding.rhs),
                    "ratio": _num(t.binding.ratio),
                    "pass": t.passed,
                    "checks": [c.to_dict() for c in t.checks],
                }
                for t in self.trials
            ],
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theorem", "trial", "check", "lhs", "rhs", "ratio", "pass"])
        for t in self.trials:
            b = t.binding
            w.writerow([self.theorem, t.trial, b.name, repr(b.lhs), repr(b.rhs), repr(b.ratio), t.passed])
        return buf.getvalue()


# tracked constants

def tracked_constants(theorem: str, cfg: ExponentConfig, a: float) -> dict:
    """Explicit constants assembled from the proof chain for the given config."""
    p, q = cfg.p, cfg.q
    pprod = math.prod(cfg.conjugates)
    base = a * (q / p) ** (1 / q)
    if theorem in ("SAWYER_LINEAR", "PROP_SUFF", "RH_EXT", "EQUAL_WEIGHTS", "AINF_COR"):
        return {"sufficiency": base * pprod}
    if theorem == "LISUN":
        best = math.inf
        for p1, p2 in (cfg.p_list, cfg.p_list[::-1]):
            c1, c2 = conjugate(p1), conjugate(p2)
            val = a * a * (q / p1) ** (1 / q) * c1 * (1 + (q / p2) * c2**q) ** (1 / q)
            best = min(best, val)
        return {"sufficiency": best}
    if theorem in ("MAIN_BOUNDS", "HYT_PEREZ"):
        g = packing_gamma(cfg, a)
        return {
            "main1": base * (g * math.e + 1) ** (1 / p) * pprod,
            "main2": base * (g + 1) ** (1 / p) * pprod,
            "main3": base * (g + 1) ** (1 / p) * pprod,
        }
    if theorem == "BUCKLEY":
        return {"buckley": p ** (1 / (p - 1)) * conjugate(p)}
    if theorem in ("PACKING", "AINF_PACK"):
        return {"gamma": packing_gamma(cfg, a)}
    if theorem == "SANDWICH":
        return {"upper_factor": 6.0**cfg.homogeneity}
    if theorem == "GRID_COVER":
        return {"max_side_ratio": 6.0}
    return {}


# trials

def _weights_for(ec: ExperimentConfig, rng, count: int):
    n, L = ec.n, ec.L
    descs = []
    ws = []
    if ec.weights:
        specs = list(ec.weights) * (count if len(ec.weights) == 1 else 1)
        for s in specs[:count]:
            ws.append(load_weight(s, n, L, int(rng.integers(0, 2**31))))
            descs.append(s)
    else:
        for _ in range(count):
            w, d = random_weight(rng, n, L)
            ws.append(w)
            descs.append(d)
    if ec.omega:
        om, od = load_weight(ec.omega, n, L, int(rng.integers(0, 2**31))), ec.omega
    else:
        om, od = random_weight(rng, n, L)
    return ws, om, "sigma=[" + "; ".join(descs) + "] omega=" + od


def _trial_sawyer(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    cfg = ec.cfg
    th = ec.theorem
    count = 1 if th == "EQUAL_WEIGHTS" else cfg.m
    sig, om, desc = _weights_for(ec, rng, count)
    if th == "EQUAL_WEIGHTS":
        sig = sig * cfg.m
    C = tracked_constants(th, cfg, ec.base)["sufficiency"]
    N, arg = operator_norm_estimate(sig, om, cfg, ec.norm_trials, seed=ec.seed * 100003 + t, detail=True)
    S_li = sawyer_testing_constant("S_LiSun", sig, om, cfg)
    S_nu = sawyer_testing_constant("S_nu", sig, om, cfg)
    checks = []
    if th == "SAWYER_LINEAR":
        S = sawyer_testing_constant("S_linear", sig, om, cfg)
        checks += [Check("necessity", S, N), Check("sufficiency", N, C * S)]
    elif th == "PROP_SUFF":
        checks += [Check("necessity", S_li, N), Check("sufficiency", N, C * S_nu)]
    elif th == "RH_EXT":
        rh = multilinear_constant("RH_P", sig, None, cfg)
        checks += [Check("necessity", S_nu, rh ** (1 / cfg.p) * N), Check("sufficiency", N, C * S_nu)]
    elif th == "EQUAL_WEIGHTS":
        checks += [
            Check("normalizers_agree", abs(S_nu - S_li), 1e-12 * S_li),
            Check("necessity", S_nu, N),
            Check("sufficiency", N, C * S_nu),
        ]
    elif th == "AINF_COR":
        rh = multilinear_constant("RH_P", sig, None, cfg)
        H = math.prod(linear_constant("AINF_HR", s) ** (cfg.p / pi) for s, pi in zip(sig, cfg.p_list))
        checks += [
            Check("rh_via_hruscev", rh, H),
            Check("necessity", S_nu, H ** (1 / cfg.p) * N),
            Check("sufficiency", N, C * H ** (1 / cfg.p) * S_li),
        ]
    else:
        checks += [Check("necessity", S_li, N), Check("sufficiency", N, C * S_li)]
    return TrialResult(t, f"{desc} argmax_f={arg}", checks)


def _random_sequence(rng, n: int, L: int, density: float = 0.4) -> CarlesonSequence:
    levels = []
    for k in range(L + 1):
        shape = (2**k,) * n
        mask = rng.random(shape) < density
        levels.append(np.where(mask, rng.lognormal(0.0, 1.0, shape) * 2.0 ** (-n * k), 0.0))
    return CarlesonSequence.from_dense(levels)


def _random_function(rng, n: int, L: int) -> tuple[GridFunction, str]:
    shape = (2**L,) * n
    if rng.random() < 0.3:
        k = int(rng.integers(0, L + 1))
        idx = tuple(int(i) for i in rng.integers(0, 2**k, n))
        return GridFunction.indicator(DyadicCube.standard(k, idx), n, L), f"indicator{list(idx)}@k={k}"
    return GridFunction(rng.lognormal(0.0, 1.0, shape)), "lognormal"


def _trial_carleson_eq(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    n, L = ec.n, ec.L
    sig, d = random_weight(rng, n, L)
    lam = _random_sequence(rng, n, L)
    f, fd = _random_function(rng, n, L)
    p = float(rng.choice([1.25, 2.0, 4.0]))
    al = float(rng.choice([1.0, 1.5, 2.0]))
    A = carleson_constant(lam, sig, al)
    E = embedding_sum(lam, sig, f, p, al)
    Mf = weighted_dyadic_maximal(f, sig)
    checks = [
        Check("maximal_form", E, A * al * lp_norm(Mf, sig, p) ** (p * al)),
        Check("embedding", E, A * al * conjugate(p) ** (p * al) * lp_norm(f, sig, p) ** (p * al)),
    ]
    sums = _subtree_sums(lam.dense(n, L))
    worst = None
    for k in range(L + 1):
        for idx in np.ndindex(*(2**k,) * n):
            R = DyadicCube.standard(k, idx)
            c = Check("indicator_test", float(sums[k][idx]), embedding_sum(lam, sig, GridFunction.indicator(R, n, L), p, al))
            if worst is None or c.ratio > worst.ratio:
                worst = c
    checks.append(worst)
    return TrialResult(t, f"sigma={d} f={fd} p={p} alpha={al}", checks)


def _trial_multi_carleson(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    n, L, cfg = ec.n, ec.L, ec.cfg
    sig = [random_weight(rng, n, L)[0] for _ in range(cfg.m)]
    fs = [_random_function(rng, n, L)[0] for _ in range(cfg.m)]
    lam = _random_sequence(rng, n, L)
    al = float(rng.choice([1.0, 1.5, 2.0]))
    nu = nu_weight(sig, cfg)
    A = carleson_constant(lam, nu, al)
    p = cfg.p
    lhs = multilinear_embedding_sum(lam, sig, fs, cfg, al)
    r1 = A * al * lp_norm(multilinear_weighted_maximal(fs, sig), nu, p) ** (p * al)
    r2 = A * al * math.prod(lp_norm(weighted_dyadic_maximal(f, s), s, pi) for f, s, pi in zip(fs, sig, cfg.p_list)) ** (p * al)
    r3 = A * al * math.prod(conjugate(pi) * lp_norm(f, s, pi) for f, s, pi in zip(fs, sig, cfg.p_list)) ** (p * al)
    checks = [Check("multilinear", lhs, r1), Check("multilinear_holder", r1, r2), Check("multilinear_maximal", r2, r3)]
    # Hoelder form with a single weight
    N = int(rng.integers(1, 4))
    target = float(rng.choice([1.0, 1.5, 2.0]))
    ps = [float(x) for x in rng.choice([1.0, 1.5, 2.0, 3.0], N)]
    w = rng.dirichlet(np.ones(N)) * target * (1 + 1e-12)  # keep the sum >= 1 after rounding
    qs = [float(wi * pi) for wi, pi in zip(w, ps)]
    ah = holder_alpha(qs, ps)
    hf = [_random_function(rng, n, L)[0] for _ in range(N)]
    Ah = carleson_constant(lam, sig[0], ah)
    hl = holder_embedding_sum(lam, sig[0], hf, qs, ps)
    hr = math.prod(
        (Ah * ah * lp_norm(weighted_dyadic_maximal(f, sig[0]), sig[0], pj) ** (pj * ah)) ** (qj / (ah * pj))
        for f, qj, pj in zip(hf, qs, ps)
    )
    checks.append(Check("holder", hl, hr))
    return TrialResult(t, f"alpha={al} holder_alpha={ah:.6g} N={N}", checks)


def _trial_paraproduct(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    L = ec.L
    phi = HaarSymbol.random(rng, L, float(rng.uniform(0.2, 1.0)))
    p = float(rng.choice([1.0, 1.25, 1.5, 2.0]))
    A = paraproduct_carleson(phi, p)
    est, arg = paraproduct_norm_estimate(phi, p, ec.norm_trials, seed=ec.seed * 100003 + t, detail=True)
    lo, hi = paraproduct_bounds(A, p)
    checks = [Check("lower", lo, est)]
    if math.isfinite(hi):
        checks.append(Check("upper", est, hi))
    return TrialResult(t, f"p={p} terms={len(phi.coeffs)} argmax_b={arg}", checks)


def _random_cube(rng, n: int) -> ArbitraryCube:
    den = int(rng.integers(1, 1000))
    num = int(rng.integers(1, 2 * den + 1))
    side = Fraction(num, den)
    lower = tuple(Fraction(int(rng.integers(-num + 1, den)), den) for _ in range(n))
    return ArbitraryCube(lower, side)


def _trial_grid_cover(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    Q = _random_cube(rng, ec.n)
    C = shifted_cover(Q)
    ratio = C.side / Q.side
    checks = [Check("contains", 0.0 if C.contains(Q) else 1.0, 0.0), Check("side_ratio", float(ratio), 6.0)]
    lo = ",".join(str(x) for x in Q.lower)
    return TrialResult(t, f"Q(lower=({lo}), side={Q.side}) cover={C}", checks)


def _random_fvec(rng, n, L, m):
    out = []
    for _ in range(m):
        arr = rng.lognormal(0.0, 1.0, (2**L,) * n)
        arr = np.where(rng.random(arr.shape) < 0.2, 0.0, arr)
        out.append(GridFunction(arr))
    return out


def _cellwise_worst(name, lhs: np.ndarray, rhs: np.ndarray) -> Check:
    checks = [Check(name, float(a), float(b)) for a, b in zip(lhs.ravel(), rhs.ravel())]
    return max(checks, key=lambda c: c.ratio)


def _trial_sandwich(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    cfg = ec.cfg
    L = int(rng.integers(1, ec.L + 1))
    fs = _random_fvec(rng, 1, L, cfg.m)
    lower, upper = multilinear_fractional_approx(fs, cfg)
    oracle = lattice_fractional_maximal(fs, cfg)
    checks = [
        _cellwise_worst("lower", lower.values, oracle.values),
        _cellwise_worst("upper", oracle.values, upper.values),
    ]
    return TrialResult(t, f"L={L}", checks)


def _cz_instance(ec, rng):
    cfg = ec.cfg
    sig = [random_weight(rng, ec.n, ec.L)[0] for _ in range(cfg.m)]
    fs = _random_fvec(rng, ec.n, ec.L, cfg.m)
    return sig, fs, cz_decomposition(fs, sig, cfg, ec.base)


def _trial_packing(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    cfg = ec.cfg
    sig, fs, cz = _cz_instance(ec, rng)
    h = 2.0**cfg.homogeneity
    checks = []
    owner = np.zeros((2**ec.L,) * ec.n, dtype=int)
    for k, sc in cz.cubes():
        checks.append(Check("packing", float(sc.cube.volume), cz.gamma * sc.e_volume(cz.cell_volume)))
        checks.append(Check("bracket_upper", sc.value, h * cz.a**k))
        checks.append(Check("bracket_lower", cz.a**k, sc.value * (1 - 1e-15)))
        owner += sc.E
    overlap = float(np.count_nonzero(owner > 1))
    same_level = 0
    for k, cubes in cz.levels.items():
        for i, a in enumerate(cubes):
            for b in cubes[i + 1 :]:
                if a.cube.contains(b.cube) or b.cube.contains(a.cube):
                    same_level += 1
    checks.append(Check("E_disjoint", overlap, 0.0))
    checks.append(Check("level_disjoint", float(same_level), 0.0))
    return TrialResult(t, f"stopping_cubes={len(cz)} levels={sorted(cz.levels)}", checks)


def _trial_ainf_pack(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    sig, fs, cz = _cz_instance(ec, rng)
    n, L = ec.n, ec.L
    checks = []
    for i, s in enumerate(sig):
        fw = linear_constant("AINF_FW", s)
        dense = [np.zeros((2**k,) * n) for k in range(L + 1)]
        for _, sc in cz.cubes():
            Q = sc.cube
            if Q.level >= 0:
                dense[Q.level][Q.index] += s.tree[Q.level][Q.index]
        sums = _subtree_sums(dense)
        ratios = [sm / (cz.gamma * fw * tr) for sm, tr in zip(sums, s.tree)]
        k = max(range(L + 1), key=lambda j: float(ratios[j].max()))
        idx = np.unravel_index(int(np.argmax(ratios[k])), ratios[k].shape)
        checks.append(Check(f"packing_sigma{i + 1}", float(sums[k][idx]), cz.gamma * fw * float(s.tree[k][idx])))
    return TrialResult(t, f"stopping_cubes={len(cz)}", checks)


def _chain_checks(sig, om, cfg) -> tuple[list[Check], float, float]:
    A = multilinear_constant("A_Pq", sig, om, cfg)
    B = multilinear_constant("B_Pq", sig, om, cfg)
    H = math.prod(linear_constant("AINF_HR", s) ** (cfg.p / pi) for s, pi in zip(sig, cfg.p_list))
    return [Check("chain_lower", A, B), Check("chain_upper", B, A * H)], A, B


def _trial_chain(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    sig, om, desc = _weights_for(ec, rng, ec.cfg.m)
    checks, _, _ = _chain_checks(sig, om, ec.cfg)
    return TrialResult(t, desc, checks)


def _trial_main(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    cfg = ec.cfg
    sig, om, desc = _weights_for(ec, rng, cfg.m)
    checks, A, B = _chain_checks(sig, om, cfg)
    C = tracked_constants("MAIN_BOUNDS", cfg, ec.base)
    N, arg = operator_norm_estimate(sig, om, cfg, ec.norm_trials, seed=ec.seed * 100003 + t, detail=True)
    fw = [linear_constant("AINF_FW", s) for s in sig]
    W = multilinear_constant("W_Pinf", sig, None, cfg)
    checks += [
        Check("main1", N, C["main1"] * B ** (1 / cfg.p)),
        Check("main2", N, C["main2"] * A ** (1 / cfg.p) * math.prod(f ** (1 / pi) for f, pi in zip(fw, cfg.p_list))),
        Check("main3", N, C["main3"] * (A * W) ** (1 / cfg.p)),
    ]
    return TrialResult(t, f"{desc} argmax_f={arg}", checks)


def _trial_hyt_perez(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    cfg = ec.cfg
    p = cfg.p
    sig, om, desc = _weights_for(ec, rng, 1)
    s = sig[0]
    C = tracked_constants("HYT_PEREZ", cfg, ec.base)
    N, arg = operator_norm_estimate(sig, om, cfg, ec.norm_trials, seed=ec.seed * 100003 + t, detail=True)
    B = linear_constant("B_p", s, om, p)
    A = linear_constant("JOINT_A_p", s, om, p)
    fw = linear_constant("AINF_FW", s)
    checks = [
        Check("hytperez1", N, C["main1"] * B ** (1 / p)),
        Check("hytperez2", N, C["main2"] * (A * fw) ** (1 / p)),
    ]
    return TrialResult(t, f"{desc} argmax_f={arg}", checks)


def _trial_buckley(ec: ExperimentConfig, t: int, rng) -> TrialResult:
    cfg = ec.cfg
    p = cfg.p
    sig, _, desc = _weights_for(ec, rng, 1)
    s = sig[0]
    one = Weight.constant(1.0, ec.n, ec.L)
    N, arg = operator_norm_estimate([s], s, cfg, ec.norm_trials, seed=ec.seed * 100003 + t, detail=True, op_weights=[one])
    Ap = linear_constant("A_p", s, p=p)
    C = tracked_constants("BUCKLEY", cfg, ec.base)["buckley"]
    return TrialResult(t, f"{desc} argmax_f={arg}", [Check("buckley", N, C * Ap ** (1 / (p - 1)))])


_TRIALS = {
    "SAWYER_LINEAR": _trial_sawyer,
    "PROP_SUFF": _trial_sawyer,
    "RH_EXT": _trial_sawyer,
    "EQUAL_WEIGHTS": _trial_sawyer,
    "AINF_COR": _trial_sawyer,
    "LISUN": _trial_sawyer,
    "CARLESON_EQ": _trial_carleson_eq,
    "MULTI_CARLESON": _trial_multi_carleson,
    "PARAPRODUCT": _trial_paraproduct,
    "GRID_COVER": _trial_grid_cover,
    "SANDWICH": _trial_sandwich,
    "PACKING": _trial_packing,
    "MAIN_BOUNDS": _trial_main,
    "CHAIN": _trial_chain,
    "AINF_PACK": _trial_ainf_pack,
    "HYT_PEREZ": _trial_hyt_perez,
    "BUCKLEY": _trial_buckley,
}


def run_trial(config: dict, t: int) -> TrialResult:
    ec = ExperimentConfig.from_dict(config)
    rng = np.random.default_rng([ec.seed, t])
    return _TRIALS[ec.theorem](ec, t, rng)


def verify_theorem(theorem: str | ExperimentConfig, config: ExperimentConfig | dict | None = None, jobs: int = 1) -> VerificationReport:
    """Run the checks of one result over ``trials`` seeded instances."""
    if isinstance(theorem, ExperimentConfig):
        ec = theorem
    elif isinstance(config, ExperimentConfig):
        ec = config
        if ec.theorem != theorem:
            raise ConfigError("theorem", f"config is for {ec.theorem}, not {theorem}")
    else:
        d = dict(config or {})
        d.setdefault("theorem", theorem)
        ec = ExperimentConfig.from_dict(d)
    cd = ec.to_dict()
    start = time.perf_counter()
    if jobs > 1 and ec.trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_trial, [cd] * ec.trials, range(ec.trials)))
    else:
        results = [run_trial(cd, t) for t in range(ec.trials)]
    results.sort(key=lambda r: r.trial)
    return VerificationReport(
        theorem=ec.theorem,
        config=cd,
        trials=results,
        c_tracked=tracked_constants(ec.theorem, ec.cfg, ec.base),
        wall_time=time.perf_counter() - start,
    )
