"""Command line front end.

    lpcurse geometry     --d 2,4,8 --p 2,4,inf
    lpcurse sample       --d 8 --p 4 --n 1000 --measure isotropic_rescaled --format bin --out x.bin
    lpcurse concentrate  --d 4,16,64 --p 2 --t 0,0.2 --n 100000
    lpcurse fool         --d 4 --p inf --points pts.csv --n 500
    lpcurse curse-report --A-seq "d^-1" --B-seq "d^-2"

Exit status: 0 success, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import complexity as cx
from . import concentration as conc
from . import fooling as fl
from . import geometry as geo
from . import sampling as smp
from .output import dumps_csv, dumps_json, write_text

EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_D = "2,4,8,16,32,64"
DEFAULT_P = "2,3,4,8,inf"
DEFAULT_N = 100_000

VERDICT_CURSE = "curse condition holds"
VERDICT_NO_CURSE = "no curse — trivial algorithm converges"


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    d_list: List[int]
    p_list: List[float]
    n: int = DEFAULT_N
    seed: int = 0
    delta: Optional[float] = None
    alpha: float = 2.0
    output: str = "-"
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.d_list:
            raise UsageError("--d must list at least one dimension")
        if not self.p_list:
            raise UsageError("--p must list at least one exponent")
        if any(d < 1 for d in self.d_list):
            raise UsageError("dimensions must be >= 1")
        if any(not p >= 1 for p in self.p_list):
            raise UsageError("exponents must be >= 1")
        if self.n < 1:
            raise UsageError("--n must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        formats = ("csv", "json", "bin") if self.command == "sample" else ("csv", "json")
        if self.format not in formats:
            raise UsageError(f"--format must be one of {', '.join(formats)}")


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _p_list(text: str) -> List[float]:
    return [geo.parse_p(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# -- commands -----------------------------------------------------------------

def run_geometry(cfg: ExperimentConfig) -> dict:
    cert = geo.monotonicity_certificate()
    rows = []
    for p in cfg.p_list:
        for d in cfg.d_list:
            b = geo.PBallBody(d, p)
            ratio = b.radius_ratio
            rows.append({
                "d": d, "p": p, "alpha": b.alpha, "gamma2": b.gamma2, "L": b.L,
                "radius": b.radius, "ratio": ratio,
                "passes_paper_condition": ratio < geo.SMALL_DIAMETER_THRESHOLD,
                "passes_HNUW_condition": b.radius / math.sqrt(d) < geo.HNUW_RADIUS_THRESHOLD,
                "h": geo.h_ratio(p) if p >= 2 else None,
                "limsup_bound": geo.radius_ratio_limit_bound(p) if p >= 2 else None,
                "monotone_certificate": cert.ok,
            })
    return {"rows": rows, "monotonicity": cert.summary()}


def _single_body(cfg: ExperimentConfig) -> geo.PBallBody:
    if len(cfg.d_list) != 1 or len(cfg.p_list) != 1:
        raise UsageError(f"{cfg.command} needs exactly one --d and one --p")
    return geo.PBallBody(cfg.d_list[0], cfg.p_list[0])


def run_sample(cfg: ExperimentConfig):
    body = _single_body(cfg)
    return smp.sample(body, cfg.extra["measure"], cfg.n, cfg.seed)


def run_concentrate(cfg: ExperimentConfig) -> dict:
    if cfg.n < 10_000:
        raise UsageError("concentrate needs --n >= 10000")
    reports = []
    for p in cfg.p_list:
        for d in cfg.d_list:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", conc.ZeroTailWarning)
                rep = conc.thin_shell_report(geo.PBallBody(d, p), cfg.extra["t"], cfg.n, cfg.seed,
                                             alpha=cfg.alpha)
            reports.append(rep)
    return {"reports": reports}


def run_fool(cfg: ExperimentConfig) -> dict:
    body = _single_body(cfg)
    window = fl.admissible_delta(body)
    delta = window["default"] if cfg.delta is None else cfg.delta
    if cfg.extra.get("points"):
        pts = smp.load_points_csv(cfg.extra["points"])
        if pts.shape[1] != body.d:
            raise UsageError(f"point file has {pts.shape[1]} columns, expected {body.d}")
    else:
        pts = fl.random_points(body, cfg.extra["n_points"], cfg.seed)
    f = fl.FoolingFunction(pts, delta, body)
    queries = smp.sample_uniform(body, cfg.n, cfg.seed).points
    evals = []
    for x in queries:
        v, g, _ = f.value_and_gradient(x)
        row = {f"x{i}": float(c) for i, c in enumerate(x)}
        row["value"] = v
        row["gradient_norm"] = float(np.linalg.norm(g))
        evals.append(row)
    summary = fl.integral_lower_bound(body, pts, delta, cfg.n, cfg.seed)
    summary.update({
        "delta": delta, "delta_window": window,
        "covering_radius": fl.covering_radius(body, delta),
        "lipschitz": fl.lipschitz_certificate(f, 200, cfg.seed),
    })
    return {"evaluations": evals, "summary": summary}


def run_curse_report(cfg: ExperimentConfig) -> dict:
    ex = cfg.extra
    if not ex.get("A_seq") or not ex.get("B_seq"):
        raise UsageError("curse-report needs --A-seq and --B-seq")
    try:
        A = cx.SequenceSpec.parse(ex["A_seq"])
        B = cx.SequenceSpec.parse(ex["B_seq"])
        params = cx.BoundParameters(alpha=cfg.alpha, q=ex["q"], C=ex["C"], epsilon=ex["epsilon"])
    except ValueError as err:
        raise UsageError(str(err)) from err
    rows = []
    verdicts = {}
    for p in cfg.p_list:
        bodies = [geo.PBallBody(d, p) for d in sorted(cfg.d_list)]
        cond = cx.curse_condition(A, B, bodies)
        verdict = VERDICT_CURSE if cond["holds"] else VERDICT_NO_CURSE
        verdicts[geo.parse_p(p)] = {"verdict": verdict, **cond}
        for b, m in zip(bodies, cond["values"]):
            a_d, b_d = A(b.d, b.L), B(b.d, b.L)
            triv = cx.trivial_algorithm_error(cx.SmoothnessClass(b, a_d, b_d))
            lb = cx.lower_bound_count(params, b.d)
            adv = None
            if b.d <= ex["adversary_max_d"] and ex["trials"] > 0:
                adv = cx.empirical_adversary_error(b, ex["n_points"], cfg.delta, ex["trials"],
                                                   ex["mc_n"], cfg.seed)
            rows.append({
                "d": b.d, "p": b.p, "L": b.L, "A": a_d, "B": b_d, "min_condition": m,
                "lower_bound_log10": lb["log10_count"], "lower_bound_count": lb["count"],
                "trivial_bound_A": triv["bound_A"], "trivial_bound_B": triv["bound_B"],
                "trivial_combined": triv["combined"], "adversary_error": adv,
                "verdict": verdict,
            })
    return {"rows": rows, "verdicts": verdicts,
            "parameters": {"alpha": params.alpha, "q": params.q, "C": params.C,
                           "epsilon": params.epsilon, "A_seq": str(A), "B_seq": str(B)}}


# -- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", default=DEFAULT_D, help="comma-separated dimensions")
    common.add_argument("--p", default=DEFAULT_P, help="comma-separated exponents, 'inf' allowed")
    common.add_argument("--n", type=int, default=DEFAULT_N, help="sample count")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--delta", type=float, default=None)
    common.add_argument("--alpha", type=float, default=2.0, help="psi_alpha exponent in [1, 2]")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", default="json")

    parser = argparse.ArgumentParser(prog="lpcurse", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("geometry", parents=[common], help="closed-form constants per (d, p)")
    s = sub.add_parser("sample", parents=[common], help="draw a batch of points")
    s.add_argument("--measure", default=smp.UNIFORM_NORMALIZED, choices=smp.MEASURES)
    c = sub.add_parser("concentrate", parents=[common], help="thin-shell tail tables")
    c.add_argument("--t", default="0,0.1,0.2,0.5", help="comma-separated deviations")
    f = sub.add_parser("fool", parents=[common], help="evaluate a fooling function")
    f.add_argument("--points", default=None, help="CSV point set (n rows, d columns)")
    f.add_argument("--n-points", type=int, default=8)
    r = sub.add_parser("curse-report", parents=[common], help="lower/upper bound report")
    r.add_argument("--A-seq", dest="A_seq", default=None)
    r.add_argument("--B-seq", dest="B_seq", default=None)
    r.add_argument("--q", type=float, default=0.5)
    r.add_argument("--C", type=float, default=1.0)
    r.add_argument("--epsilon", type=float, default=0.1)
    r.add_argument("--trials", type=int, default=2)
    r.add_argument("--n-points", type=int, default=8)
    r.add_argument("--mc-n", type=int, default=1000)
    r.add_argument("--adversary-max-d", type=int, default=16)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    try:
        d_list = _int_list(args.d)
        p_list = _p_list(args.p)
    except ValueError as err:
        raise UsageError(f"invalid grid: {err}") from err
    extra = {}
    if args.command == "sample":
        extra["measure"] = args.measure
    elif args.command == "concentrate":
        try:
            extra["t"] = _float_list(args.t)
        except ValueError as err:
            raise UsageError(f"invalid --t: {err}") from err
        if not extra["t"]:
            raise UsageError("--t must list at least one value")
    elif args.command == "fool":
        extra.update(points=args.points, n_points=args.n_points)
    elif args.command == "curse-report":
        extra.update(A_seq=args.A_seq, B_seq=args.B_seq, q=args.q, C=args.C, epsilon=args.epsilon,
                     trials=args.trials, n_points=args.n_points, mc_n=args.mc_n,
                     adversary_max_d=args.adversary_max_d)
    cfg = ExperimentConfig(args.command, d_list, p_list, args.n, args.seed, args.delta, args.alpha,
                           args.out, args.format, extra)
    cfg.validate()
    return cfg


def _emit(cfg: ExperimentConfig, result) -> None:
    cmd = cfg.command
    if cmd == "sample":
        if cfg.format == "bin":
            if cfg.output in (None, "-"):
                raise UsageError("binary output needs --out")
            result.to_binary(cfg.output)
            return
        if cfg.format == "csv":
            cols = [f"x{i}" for i in range(result.body.d)]
            rows = [dict(zip(cols, r)) for r in result.points.tolist()]
            write_text(dumps_csv(rows, cols), cfg.output)
            return
        write_text(dumps_json({"body": result.body.to_dict(), "measure": result.measure,
                               "seed": result.seed, "points": result.points}), cfg.output)
        return
    if cmd == "concentrate":
        if cfg.format == "csv":
            rows = [r for rep in result["reports"] for r in rep.csv_rows()]
            write_text(dumps_csv(rows), cfg.output)
        else:
            write_text(dumps_json({"reports": [rep.to_dict() for rep in result["reports"]]}), cfg.output)
        return
    if cmd == "fool":
        if cfg.format == "csv":
            write_text(dumps_csv(result["evaluations"]), cfg.output)
        else:
            write_text(dumps_json(result), cfg.output)
        return
    # geometry, curse-report
    if cfg.format == "csv":
        write_text(dumps_csv(result["rows"]), cfg.output)
    else:
        write_text(dumps_json(result), cfg.output)


RUNNERS = {
    "geometry": run_geometry,
    "sample": run_sample,
    "concentrate": run_concentrate,
    "fool": run_fool,
    "curse-report": run_curse_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = RUNNERS[cfg.command](cfg)
        _emit(cfg, result)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"lpcurse: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (fl.EmptyDeltaWindow, RuntimeError, FloatingPointError, ValueError) as err:
        print(f"lpcurse: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
