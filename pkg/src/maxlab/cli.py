"""Command-line driver: ``maxlab <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import lab
from .carleson import (
    CarlesonSequence,
    HaarSymbol,
    carleson_constant,
    embedding_sum,
    paraproduct_bounds,
    paraproduct_carleson,
    paraproduct_norm_estimate,
)
from .constants import LinearKind, MultiKind, SawyerKind, linear_constant, multilinear_constant, sawyer_testing_constant
from .gridfunc import ExponentConfig, GridFunction
from .maximal import (
    dyadic_maximal,
    multilinear_fractional_approx,
    multilinear_fractional_dyadic,
    multilinear_weighted_maximal,
    weighted_dyadic_maximal,
)

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2

KINDS = [k.value for k in LinearKind] + [k.value for k in MultiKind] + [k.value for k in SawyerKind]


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors; 2 is reserved for failed checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, grid: bool = True):
    p.add_argument("--config", help="JSON document; flags override its fields")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--output", help="write here instead of stdout")
    if grid:
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--L", type=int, default=None)


def _exponents(p: argparse.ArgumentParser):
    p.add_argument("--p", type=float, default=None, help="single exponent (linear kinds)")
    p.add_argument("--p-list", dest="p_list", type=float, nargs="+", default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maxlab", description="Dyadic maximal operators and weighted inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="evaluate a weight characteristic")
    _common(p)
    _exponents(p)
    p.add_argument("--kind", choices=KINDS, default=None)
    p.add_argument("--weight", action="append", default=None, help="weight spec or file; repeat for sigma_i")
    p.add_argument("--omega", default=None)
    p.add_argument("--detail", action="store_true", help="also report the maximizing cube")

    p = sub.add_parser("maximal", help="apply a maximal operator to grid functions")
    _common(p)
    _exponents(p)
    p.add_argument("--op", choices=("M_d", "M_sigma", "multilinear", "fractional", "approx"), default=None)
    p.add_argument("--f", action="append", default=None, help="function file or weight spec; repeatable")
    p.add_argument("--weight", action="append", default=None)
    p.add_argument("--shift", type=Fraction, nargs="+", default=None, help="0 or 1/3 per coordinate")

    p = sub.add_parser("carleson", help="Carleson constant and embedding sum of a sequence")
    _common(p)
    p.add_argument("--sequence", default=None, help="JSON list of {level, index, lambda}")
    p.add_argument("--weight", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--f", default=None)
    p.add_argument("--p", type=float, default=None)

    p = sub.add_parser("paraproduct", help="Carleson constant and norm estimate of a Haar paraproduct")
    _common(p, grid=False)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--symbol", default=None, help="JSON list of {level, index, coeff}")
    p.add_argument("--density", type=float, default=None, help="random symbol when no file is given")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)

    p = sub.add_parser("verify", help="run the checks of one result")
    _common(p)
    _exponents(p)
    p.add_argument("--theorem", default=None, help="one of " + ", ".join(lab.THEOREMS))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--norm-trials", dest="norm_trials", type=int, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--weight", dest="weights", action="append", default=None)
    p.add_argument("--omega", default=None)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default $MAXLAB_JOBS or 1)")
    p.add_argument("--timing", action="store_true", help="include wall time in the JSON report")

    p = sub.add_parser("generate", help="write a weight of a named family")
    _common(p)
    p.add_argument("--kind", default=None, help="weight spec, e.g. power_like:a=-0.5")
    return parser


def _merge_config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise lab.ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise lab.ConfigError("config", f"invalid JSON ({exc.msg})") from None
        if not isinstance(cfg, dict):
            raise lab.ConfigError("config", "expected a JSON object")
    skip = {"command", "config", "output", "format", "timing", "detail", "jobs"}
    for key, val in vars(args).items():
        if key not in skip and val is not None:
            cfg[key] = val
    return cfg


def _emit(text: str, args):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _pop(cfg: dict, key: str, default=None):
    return cfg.pop(key, default)


def _weights(specs, n, L, seed):
    if isinstance(specs, str):
        specs = [specs]
    return [lab.load_weight(s, n, L, seed) for s in specs]


def _function(spec: str, n: int, L: int, seed: int) -> GridFunction:
    path = Path(spec)
    if path.suffix in (".json", ".csv"):
        if not path.exists():
            raise lab.ConfigError("f", f"no such file {spec}")
        return GridFunction.load(path)
    return lab.load_weight(spec, n, L, seed)


def _exponent_config(cfg: dict, n: int, m: int) -> ExponentConfig:
    p_list = cfg.pop("p_list", None)
    p = cfg.pop("p", None)
    if p_list is None:
        p_list = [p if p is not None else 2.0] * m
    q = cfg.pop("q", None)
    alpha = cfg.pop("alpha", None) or 0.0
    try:
        if q is None:
            q = 1.0 / sum(1.0 / x for x in p_list)
        return ExponentConfig(n, tuple(p_list), q, alpha)
    except ValueError as exc:
        field, _, msg = str(exc).partition(": ")
        raise lab.ConfigError(field or "p_list", msg or str(exc)) from None


def _grid(cfg: dict) -> tuple[int, int, int]:
    n = int(cfg.pop("n", None) or 1)
    L = cfg.pop("L", None)
    L = 4 if L is None else int(L)
    seed = int(cfg.pop("seed", None) or 0)
    return n, L, seed


def _leftover(cfg: dict):
    for key in cfg:
        raise lab.ConfigError(key, "not used by this subcommand")


def cmd_constants(args) -> int:
    cfg = _merge_config(args)
    n, L, seed = _grid(cfg)
    kind = _pop(cfg, "kind")
    if kind is None:
        raise lab.ConfigError("kind", "required")
    specs = _pop(cfg, "weight") or ["constant:1"]
    sig = _weights(specs, n, L, seed)
    om_spec = _pop(cfg, "omega")
    omega = _weights(om_spec, n, L, seed)[0] if om_spec else None
    if kind in LinearKind.__members__:
        p, q = _pop(cfg, "p"), _pop(cfg, "q")
        _pop(cfg, "p_list")
        _pop(cfg, "alpha")
        _leftover(cfg)
        res = linear_constant(kind, sig[0], omega, p=p, q=q, detail=True)
    else:
        ecfg = _exponent_config(cfg, n, len(sig))
        _leftover(cfg)
        if kind in MultiKind.__members__:
            res = multilinear_constant(kind, sig, omega, ecfg, detail=True)
        else:
            res = sawyer_testing_constant(kind, sig, omega if omega is not None else sig[0], ecfg, detail=True)
    if args.detail or args.format == "json":
        out = {"kind": kind, "value": lab._num(res.value), "cube": {"level": res.cube.level, "index": list(res.cube.index)}}
        _emit(json.dumps(out, sort_keys=True) + "\n", args)
    else:
        _emit(f"{res.value!r}\n", args)
    return EXIT_OK


def _grid_output(g: GridFunction, args) -> str:
    return g.to_csv() if args.format == "csv" else g.to_json() + "\n"


def cmd_maximal(args) -> int:
    cfg = _merge_config(args)
    n, L, seed = _grid(cfg)
    op = _pop(cfg, "op") or "M_d"
    fspecs = _pop(cfg, "f")
    if not fspecs:
        raise lab.ConfigError("f", "at least one function is required")
    fs = [_function(s, n, L, seed) for s in fspecs]
    n, L = fs[0].n, fs[0].L
    wspecs = _pop(cfg, "weight")
    shift = _pop(cfg, "shift")
    if op == "M_d":
        _leftover(cfg)
        out = dyadic_maximal(fs[0])
    elif op in ("M_sigma", "multilinear"):
        if not wspecs:
            raise lab.ConfigError("weight", f"{op} needs weights")
        sig = _weights(wspecs, n, L, seed)
        _leftover(cfg)
        out = weighted_dyadic_maximal(fs[0], sig[0]) if op == "M_sigma" else multilinear_weighted_maximal(fs, sig)
    else:
        ecfg = _exponent_config(cfg, n, len(fs))
        _leftover(cfg)
        if op == "fractional":
            out = multilinear_fractional_dyadic(fs, ecfg, tuple(shift) if shift else 0)
        else:
            lower, upper = multilinear_fractional_approx(fs, ecfg)
            if args.format == "csv":
                raise lab.ConfigError("format", "approx emits a pair; use json")
            _emit(json.dumps({"lower": lower.to_dict(), "upper": upper.to_dict()}, sort_keys=True) + "\n", args)
            return EXIT_OK
    _emit(_grid_output(out, args), args)
    return EXIT_OK


def cmd_carleson(args) -> int:
    cfg = _merge_config(args)
    n, L, seed = _grid(cfg)
    path = _pop(cfg, "sequence")
    if path is None:
        raise lab.ConfigError("sequence", "required")
    try:
        lam = CarlesonSequence.from_json(Path(path).read_text())
    except OSError as exc:
        raise lab.ConfigError("sequence", f"cannot read {path}: {exc.strerror}") from None
    sig = _weights(_pop(cfg, "weight") or "constant:1", n, L, seed)[0]
    alpha = _pop(cfg, "alpha") or 1.0
    fspec, p = _pop(cfg, "f"), _pop(cfg, "p")
    _leftover(cfg)
    res = carleson_constant(lam, sig, alpha, detail=True)
    out = {"A": lab._num(res.value), "cube": {"level": res.cube.level, "index": list(res.cube.index)}, "alpha": alpha}
    if fspec is not None:
        if p is None:
            raise lab.ConfigError("p", "required with --f")
        out["embedding_sum"] = embedding_sum(lam, sig, _function(fspec, n, L, seed), p, alpha)
    _emit(json.dumps(out, sort_keys=True) + "\n", args)
    return EXIT_OK


def cmd_paraproduct(args) -> int:
    cfg = _merge_config(args)
    L = cfg.pop("L", None)
    seed = int(cfg.pop("seed", None) or 0)
    path = _pop(cfg, "symbol")
    density = _pop(cfg, "density")
    p = _pop(cfg, "p") or 2.0
    trials = int(_pop(cfg, "trials") or 0)
    _leftover(cfg)
    if path:
        try:
            phi = HaarSymbol.from_json(Path(path).read_text(), L)
        except OSError as exc:
            raise lab.ConfigError("symbol", f"cannot read {path}: {exc.strerror}") from None
    else:
        phi = HaarSymbol.random(np.random.default_rng(seed), int(L or 6), density if density is not None else 0.5)
    A = paraproduct_carleson(phi, p)
    est, arg = paraproduct_norm_estimate(phi, p, trials, seed, detail=True)
    lo, hi = paraproduct_bounds(A, p)
    out = {"A": A, "estimate": est, "argmax": arg, "lower_bound": lab._num(lo), "upper_bound": lab._num(hi), "p": p}
    _emit(json.dumps(out, sort_keys=True) + "\n", args)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _merge_config(args)
    if "seed" not in cfg:
        cfg["seed"] = 0
    if cfg.get("p") is not None and "p_list" not in cfg:
        cfg["p_list"] = [cfg["p"]]
    cfg.pop("p", None)
    ec = lab.ExperimentConfig.from_dict(cfg)
    jobs = args.jobs if args.jobs is not None else int(os.environ.get("MAXLAB_JOBS", "1") or 1)
    if jobs < 1:
        raise lab.ConfigError("jobs", "must be a positive integer")
    report = lab.verify_theorem(ec, jobs=jobs)
    _emit(report.to_csv() if args.format == "csv" else report.to_json(args.timing) + "\n", args)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_generate(args) -> int:
    cfg = _merge_config(args)
    n, L, seed = _grid(cfg)
    spec = _pop(cfg, "kind")
    if spec is None:
        raise lab.ConfigError("kind", "required")
    _leftover(cfg)
    kind, params = lab.parse_weight_spec(spec)
    w = lab.generate_weight(kind, params, seed, n, L)
    _emit(_grid_output(w, args), args)
    return EXIT_OK


COMMANDS = {
    "constants": cmd_constants,
    "maximal": cmd_maximal,
    "carleson": cmd_carleson,
    "paraproduct": cmd_paraproduct,
    "verify": cmd_verify,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except lab.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
