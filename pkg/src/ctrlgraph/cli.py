"""Command line entry point: ``ctrlgraph gen|check|sweep|eig|smallball|enumerate``.

Exit codes: 0 success, 2 configuration error, 3 runtime or numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io as mio
from .control import is_controllable, pbh_screen, simple_spectrum
from .harness import ConfigError, ExperimentConfig, enumerate_small, run_experiment
from .matgen import AtomDistribution, check_int_symmetric, sample_gnp, sample_gnpq, sample_wigner

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

_SUBCOMMAND_EXPERIMENTS = {
    "sweep": ("godsil-sweep", "loops-sweep", "simple-spectrum", "dot-profile", "symmetrization"),
    "eig": ("eig-structure",),
    "smallball": ("smallball-family",),
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--n", type=int, action="append", help="dimension (repeatable; overrides n_list)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output CSV path (stdout when omitted)")
    p.add_argument("--workers", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctrlgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a random matrix")
    _add_common(g)
    g.add_argument("--model", choices=("gnp", "gnpq", "wigner"), default="gnp")
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--q", type=float, default=0.0)
    g.add_argument("--xi", default="rademacher", help="atom kind or JSON atom spec")
    g.add_argument("--zeta", default="rademacher")
    g.add_argument("--format", choices=("text", "bits"), default="text")

    c = sub.add_parser("check", help="decide controllability of (A, b)")
    c.add_argument("matrix", help="matrix file (text or bitstring)")
    c.add_argument("--b", help="vector file, one entry per line (default: all ones)")
    c.add_argument("--tol", type=float, default=1e-7, help="PBH screen tolerance")
    c.add_argument("--seed", type=int, default=0)

    for name, help_ in (("sweep", "controllability / spectrum sweeps"),
                        ("eig", "eigenvector structure experiment"),
                        ("smallball", "small-ball (t, empirical, bound) table")):
        s = sub.add_parser(name, help=help_)
        _add_common(s)
        s.add_argument("--experiment", choices=_SUBCOMMAND_EXPERIMENTS[name])
        if name == "sweep":
            s.add_argument("--q", type=float)

    e = sub.add_parser("enumerate", help="exact counts over all graphs on n <= 5 vertices")
    e.add_argument("--n", type=int, action="append", required=True)
    e.add_argument("--method", choices=("rational", "certified"), default="rational")
    return parser


def _atom_arg(text: str) -> AtomDistribution:
    text = text.strip()
    return AtomDistribution.from_dict(json.loads(text) if text.startswith("{") else {"kind": text})


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> int:
    n = (args.n or [10])[0]
    seed = args.seed or 0
    if args.model == "gnp":
        A = sample_gnp(n, args.p, seed)
    elif args.model == "gnpq":
        A = sample_gnpq(n, args.p, args.q, seed)
    else:
        A = sample_wigner(n, _atom_arg(args.xi), _atom_arg(args.zeta), seed)
    text = mio.to_bitstring(A) + "\n" if args.format == "bits" else mio.format_matrix(A)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_check(args) -> int:
    A = check_int_symmetric(mio.read_matrix(args.matrix))
    b = mio.read_vector(args.b) if args.b else None
    verdict = is_controllable(A, b, seed=args.seed)
    screen = pbh_screen(A, b, args.tol)
    out = {
        "n": int(A.shape[0]),
        "controllable": verdict.controllable,
        "rank": verdict.rank,
        "method": verdict.method,
        "certificate": verdict.certificate,
        "simple_spectrum": simple_spectrum(A),
        "pbh_screen": {"likely_controllable": screen.controllable, "certificate": screen.certificate,
                       "witness": screen.witness},
    }
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def _config_from_args(args, default_experiment: str) -> ExperimentConfig:
    d = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if getattr(args, "experiment", None):
        d["experiment"] = args.experiment
    d.setdefault("experiment", default_experiment)
    if args.n:
        d["n_list"] = sorted(args.n)
    for flag, key in (("trials", "trials"), ("seed", "master_seed"), ("out", "output_path"),
                      ("workers", "workers"), ("q", "q")):
        v = getattr(args, flag, None)
        if v is not None:
            d[key] = v
    d.setdefault("n_list", [10])
    return ExperimentConfig.from_dict(d)


def _summary_json(table) -> str:
    def clean(o):
        if isinstance(o, dict):
            return {str(k): clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, float) and math.isnan(o):
            return None
        if isinstance(o, np.generic):
            return o.item()
        return o
    payload = getattr(table, "summary", None) or getattr(table, "fit", None) or {}
    return json.dumps(clean(payload))


def _cmd_experiment(args, allowed) -> int:
    cfg = _config_from_args(args, allowed[0])
    if cfg.experiment not in allowed:
        raise ConfigError(f"'{args.command}' runs {allowed}, not {cfg.experiment!r}")
    out_path = cfg.output_path
    table = run_experiment(cfg)
    if not out_path:
        sys.stdout.write(table.to_csv())
    logging.getLogger("ctrlgraph").info("summary %s", _summary_json(table))
    return EXIT_OK


def _cmd_enumerate(args) -> int:
    for n in args.n:
        k, total = enumerate_small(n, args.method)
        sys.stdout.write(f"n={n} controllable={k} total={total}\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "enumerate":
            return _cmd_enumerate(args)
        return _cmd_experiment(args, _SUBCOMMAND_EXPERIMENTS[args.command])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError) as exc:
        if args.command in ("gen", "enumerate"):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
