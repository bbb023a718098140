"""Command line surface for reproducible projection runs.

Every stochastic subcommand takes an explicit --seed, and identical
invocations produce identical output bytes.  Structured results are
JSON, scatter data is CSV, and all floating output carries 17
significant digits so values round-trip losslessly.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .atloss import ATLossSpec, loss_and_gradient, stack_from_descriptors
from .designs import (
    CandidateSet,
    covering_radius_estimate,
    cubature_strength_test,
    haar_candidate_set,
    load_design,
    save_design,
)
from .errors import ProjBalanceError
from .grassmann import (
    PointCloud,
    frame_to_json_dict,
    load_cloud_csv,
    save_frame_json,
    _read_numeric_csv,
)
from .moments import closed_form_moments
from .objectives import jl_min_dimension, jl_theorem_params
from .selection import pareto_scan, select
from .serialize import dump_json, format_float

FORMAT_VERSION = 1

_COMMANDS = (
    "moments",
    "scan",
    "select",
    "sample",
    "design-validate",
    "design-radius",
    "jl-check",
    "atloss-eval",
)


@dataclass(frozen=True)
class RunConfig:
    """Resolved arguments for one subcommand invocation."""

    command: str
    data_path: str | None = None
    design_path: str | None = None
    k: int | None = None
    d: int | None = None
    n: int | None = None
    seed: int | None = None
    rule: str | None = None
    m_tol: float | None = None
    tvar_tol: float = 0.01
    strength: int = 2
    trials: int = 200
    tol: float = 1e-8
    probes: int = 10000
    m: int | None = None
    epsilon: float | None = None
    tau: float | None = None
    spec_path: str | None = None
    y_path: str | None = None
    yhat_path: str | None = None
    out_path: str | None = None
    frame_out: str | None = None
    on_coincident: str = "error"


def ingest_csv(path, on_coincident: str = "error") -> PointCloud:
    """Numeric CSV (optional header) to a point cloud; errors name the cell."""
    cloud = load_cloud_csv(path)
    if on_coincident != "error":
        cloud = PointCloud(cloud.points, on_coincident=on_coincident)
    return cloud


def _deliver(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _json_text(obj) -> str:
    return dump_json(obj) + "\n"


def _candidates(config: RunConfig, d: int) -> CandidateSet:
    if config.design_path is not None:
        return load_design(config.design_path)
    return haar_candidate_set(config.k, d, config.n, config.seed)


def _cmd_moments(config: RunConfig) -> int:
    x = ingest_csv(config.data_path, config.on_coincident)
    result = closed_form_moments(x, config.k)
    payload = {"m": x.m, "d": x.d, "k": config.k}
    payload.update(result.to_json_dict())
    _deliver(_json_text(payload), config.out_path)
    return 0


def _cmd_scan(config: RunConfig) -> int:
    x = ingest_csv(config.data_path, config.on_coincident)
    cands = _candidates(config, x.d)
    table = pareto_scan(x, cands)
    lines = ["index,tvar,M,V"]
    for i, (tv, m_val, v_val) in enumerate(table):
        lines.append(
            f"{i},{format_float(float(tv))},"
            f"{format_float(float(m_val))},{format_float(float(v_val))}"
        )
    _deliver("\n".join(lines) + "\n", config.out_path)
    return 0


def _cmd_select(config: RunConfig) -> int:
    x = ingest_csv(config.data_path, config.on_coincident)
    cands = _candidates(config, x.d)
    result = select(
        x, cands, config.rule, m_tol=config.m_tol, tvar_tol=config.tvar_tol
    )
    if config.frame_out is not None:
        save_frame_json(cands.frame(result.index), config.frame_out)
    _deliver(_json_text(result.to_json_dict()), config.out_path)
    return 0


def _cmd_sample(config: RunConfig) -> int:
    cands = haar_candidate_set(config.k, config.d, config.n, config.seed)
    if config.out_path is not None:
        save_design(cands, config.out_path)
    else:
        payload = [frame_to_json_dict(cands.frame(i)) for i in range(len(cands))]
        sys.stdout.write(dump_json(payload) + "\n")
    return 0


def _cmd_design_validate(config: RunConfig) -> int:
    cands = load_design(config.design_path)
    passes, max_dev = cubature_strength_test(
        cands, config.strength, config.trials, config.seed, tol=config.tol
    )
    payload = {
        "design": str(config.design_path),
        "n_frames": len(cands),
        "k": cands.k,
        "d": cands.d,
        "strength": config.strength,
        "trials": config.trials,
        "tolerance": config.tol,
        "max_rel_deviation": max_dev,
        "passes": passes,
    }
    _deliver(_json_text(payload), config.out_path)
    return 0


def _cmd_design_radius(config: RunConfig) -> int:
    cands = load_design(config.design_path)
    radius = covering_radius_estimate(cands, config.probes, config.seed)
    payload = {
        "design": str(config.design_path),
        "n_frames": len(cands),
        "k": cands.k,
        "d": cands.d,
        "n_probes": config.probes,
        "covering_radius": radius,
    }
    _deliver(_json_text(payload), config.out_path)
    return 0


def _cmd_jl_check(config: RunConfig) -> int:
    if config.tau is None:
        payload = {
            "m": config.m,
            "epsilon": config.epsilon,
            "k_min": jl_min_dimension(config.m, config.epsilon),
        }
    else:
        params = jl_theorem_params(config.m, config.epsilon, config.tau)
        payload = {
            "m": params.m,
            "epsilon": params.epsilon,
            "tau": params.tau,
            "k_min": params.k_min,
        }
    _deliver(_json_text(payload), config.out_path)
    return 0


def _cmd_atloss_eval(config: RunConfig) -> int:
    with open(config.spec_path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    spec = ATLossSpec.from_json_dict(obj)
    stack = stack_from_descriptors(obj.get("transforms", []))
    y = _read_numeric_csv(config.y_path, allow_header=True)
    yhat = _read_numeric_csv(config.yhat_path, allow_header=True)
    value, grad = loss_and_gradient(spec, stack, y, yhat)
    payload = {
        "loss": value,
        "gradient_norm": float(np.linalg.norm(grad)),
    }
    _deliver(_json_text(payload), config.out_path)
    return 0


_DISPATCH = {
    "moments": _cmd_moments,
    "scan": _cmd_scan,
    "select": _cmd_select,
    "sample": _cmd_sample,
    "design-validate": _cmd_design_validate,
    "design-radius": _cmd_design_radius,
    "jl-check": _cmd_jl_check,
    "atloss-eval": _cmd_atloss_eval,
}


def run(config: RunConfig) -> int:
    """Execute one resolved configuration; returns the exit code."""
    return _DISPATCH[config.command](config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projbalance",
        description="Projection sampling, moment analysis, candidate selection, "
        "design validation, and augmented-target loss evaluation.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__} (file formats v{FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="closed-form moment report for a dataset")
    p.add_argument("--data", required=True, help="numeric CSV of points, one per row")
    p.add_argument("--k", type=int, required=True, help="projection rank")
    p.add_argument("--on-coincident", choices=("error", "drop"), default="error",
                   help="reject or drop coincident point pairs")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("scan", help="summarize candidates as CSV (index,tvar,M,V)")
    p.add_argument("--data", required=True)
    p.add_argument("--design", help="candidate design JSON (alternative to sampling)")
    p.add_argument("--k", type=int, help="rank for sampled candidates")
    p.add_argument("--sample", type=int, help="number of candidates to sample")
    p.add_argument("--seed", type=int, help="seed for sampled candidates")
    p.add_argument("--on-coincident", choices=("error", "drop"), default="error",
                   help="reject or drop coincident point pairs")
    p.add_argument("--out")

    p = sub.add_parser("select", help="pick a candidate by a named rule")
    p.add_argument("--data", required=True)
    p.add_argument("--design")
    p.add_argument("--k", type=int)
    p.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--on-coincident",
        choices=("error", "drop"),
        default="error",
        help="reject or drop coincident point pairs",
    )
    p.add_argument(
        "--rule",
        required=True,
        help="cross, diamond, square, circle, star, or pca-star",
    )
    p.add_argument("--m-tol", type=float, help="band half-width on |M - 1|")
    p.add_argument(
        "--tvar-tol",
        type=float,
        default=0.01,
        help="relative tvar tolerance for the circle rule",
    )
    p.add_argument("--frame-out", help="also write the chosen frame as JSON")
    p.add_argument("--out")

    p = sub.add_parser("sample", help="write a design of invariant-measure draws")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="design JSON path (stdout if omitted)")

    p = sub.add_parser("design-validate", help="cubature strength test of a design")
    p.add_argument("--design", required=True)
    p.add_argument("--strength", type=int, choices=(1, 2), default=2)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")

    p = sub.add_parser("design-radius", help="covering radius estimate of a design")
    p.add_argument("--design", required=True)
    p.add_argument("--probes", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("jl-check", help="minimal rank for distance preservation")
    p.add_argument("--m", type=int, required=True, help="number of points")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--tau", type=float, help="use the success-probability bound")
    p.add_argument("--out")

    p = sub.add_parser("atloss-eval", help="evaluate an augmented-target loss")
    p.add_argument("--spec", required=True, help="loss spec JSON (with transforms)")
    p.add_argument("--y", required=True, help="targets CSV, one row per sample")
    p.add_argument("--yhat", required=True, help="predictions CSV, same shape")
    p.add_argument("--out")

    return parser


def _config_from_args(parser: argparse.ArgumentParser, args) -> RunConfig:
    cmd = args.command
    fields: dict = {"command": cmd, "out_path": getattr(args, "out", None)}
    if cmd in ("moments", "scan", "select"):
        fields["data_path"] = args.data
        fields["k"] = getattr(args, "k", None)
        fields["on_coincident"] = args.on_coincident
    if cmd in ("scan", "select"):
        fields["design_path"] = args.design
        fields["n"] = args.sample
        fields["seed"] = args.seed
        if args.design is None:
            missing = [
                flag
                for flag, val in (
                    ("--k", args.k),
                    ("--sample", args.sample),
                    ("--seed", args.seed),
                )
                if val is None
            ]
            if missing:
                parser.error(
                    f"{cmd}: pass --design, or {' '.join(missing)} to sample candidates"
                )
        elif args.sample is not None:
            parser.error(f"{cmd}: --design and --sample are mutually exclusive")
    if cmd == "select":
        fields["rule"] = args.rule
        fields["m_tol"] = args.m_tol
        fields["tvar_tol"] = args.tvar_tol
        fields["frame_out"] = args.frame_out
    if cmd == "sample":
        fields.update(k=args.k, d=args.d, n=args.n, seed=args.seed)
    if cmd == "design-validate":
        fields.update(
            design_path=args.design,
            strength=args.strength,
            trials=args.trials,
            seed=args.seed,
            tol=args.tol,
        )
    if cmd == "design-radius":
        fields.update(design_path=args.design, probes=args.probes, seed=args.seed)
    if cmd == "jl-check":
        fields.update(m=args.m, epsilon=args.epsilon, tau=args.tau)
    if cmd == "atloss-eval":
        fields.update(spec_path=args.spec, y_path=args.y, yhat_path=args.yhat)
    return RunConfig(**fields)


def _emit_error(exc: BaseException) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(dump_json(payload) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config_from_args(parser, args)
    try:
        return run(config)
    except ProjBalanceError as exc:
        _emit_error(exc)
        return 1
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _emit_error(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
