"""Command-line front end: sweeps, game runs, audits, and exact replays.

Every run that writes an output file also writes ``<out>.manifest.json``
recording the subcommand, its flags, and the seed.  ``replay`` re-executes a
manifest and, because every code path is seeded, reproduces the output file
byte for byte.

Exit codes: 0 on success, 1 when an audit reports violations, 2 on usage or
domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import __version__
from .adversaries import (
    PrivilegedReadout,
    QeForger,
    RandomGuesser,
    SubspaceAdversary,
    TomographyAdversary,
    forgery_fidelity_bound,
    run_forgery,
)
from .errors import PrivilegeRequired, QpufLabError
from .games import GameConfig, estimate_win_rate, transcript_record
from .qpuf import QPufGenParams, qgen
from .testers import TestConfig
from .verify import run_all_checks


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_with_manifest(args: argparse.Namespace, subcommand: str, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    flags = {
        k: v
        for k, v in vars(args).items()
        if k not in ("func", "out", "subcommand") and v is not None
    }
    manifest = {
        "subcommand": subcommand,
        "flags": flags,
        "seed": args.seed,
        "created_unix": int(time.time()),
        "version": __version__,
        "out": args.out,
    }
    with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _rows_to_csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _rows_to_json(header: list[str], rows: list[list[str]]) -> str:
    objs = [dict(zip(header, row)) for row in rows]
    return json.dumps({"rows": objs}, sort_keys=True, indent=2) + "\n"


def _emit_rows(
    args: argparse.Namespace, subcommand: str, header: list[str], rows: list[list[str]]
) -> None:
    if args.format == "json":
        text = _rows_to_json(header, rows)
    else:
        text = _rows_to_csv(header, rows)
    _write_with_manifest(args, subcommand, text)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_forge_sweep(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    header = ["mu", "mean_fidelity", "theory_bound", "p_succ_stage1", "trials"]
    rows: list[list[str]] = []
    for j in range(args.mu_steps):
        mu = j / args.mu_steps
        fids: list[float] = []
        p_succs: list[float] = []
        for _ in range(args.trials):
            seed = int(rng.integers(2**63))
            instance = qgen(QPufGenParams(qubits=args.qubits, seed=seed))
            report = run_forgery(instance, mu, margin=args.margin)
            fids.append(report.fidelity)
            p_succs.append(report.p_succ_stage1)
        rows.append(
            [
                _fmt(mu),
                _fmt(float(np.mean(fids))),
                _fmt(forgery_fidelity_bound(mu)),
                _fmt(float(np.mean(p_succs))),
                str(args.trials),
            ]
        )
    _emit_rows(args, "forge-sweep", header, rows)
    return 0


def _cmd_selective_bound(args: argparse.Namespace) -> int:
    dim = 2**args.qubits
    cfg = GameConfig(
        mode="qsel",
        gen=QPufGenParams(qubits=args.qubits, seed=args.seed),
        test=TestConfig(kind="ideal", delta=args.delta),
        learning_budget=args.d,
        seed=args.seed,
    )
    estimate = estimate_win_rate(cfg, lambda: SubspaceAdversary(args.d), args.trials)
    header = ["d", "D", "delta", "empirical_rate", "bound", "stderr", "trials"]
    rows = [
        [
            str(args.d),
            str(dim),
            _fmt(args.delta),
            _fmt(estimate.win_rate),
            _fmt((args.d + 1) / dim),
            _fmt(estimate.stderr),
            str(args.trials),
        ]
    ]
    _emit_rows(args, "selective-bound", header, rows)
    return 0


def _cmd_verify_all(args: argparse.Namespace) -> int:
    reports = run_all_checks(
        args.seed, include_negative_control=args.negative_control
    )
    text = (
        json.dumps([r.as_dict() for r in reports], sort_keys=True, indent=2) + "\n"
    )
    _write_with_manifest(args, "verify-all", text)
    return 0 if all(r.passed for r in reports) else 1


def _make_test_config(args: argparse.Namespace) -> TestConfig:
    if args.test == "ideal":
        return TestConfig(kind="ideal", delta=args.delta)
    return TestConfig(kind="swap", kappa1=args.kappa1, kappa2=args.kappa2)


def _cmd_game(args: argparse.Namespace) -> int:
    if args.adversary == "forger":
        if args.mode != "qex":
            raise QpufLabError("the emulation forger plays the existential game")
        if args.mu is None:
            raise QpufLabError("qex games need --mu")
        factory = lambda: QeForger(args.mu)  # noqa: E731
        budget = 2
    elif args.adversary == "subspace":
        if args.mode != "qsel":
            raise QpufLabError("the subspace adversary plays the selective game")
        factory = lambda: SubspaceAdversary(args.d)  # noqa: E731
        budget = args.d
    elif args.adversary == "random":
        if args.mode != "qsel":
            raise QpufLabError("the random guesser plays the selective game")
        factory = RandomGuesser
        budget = 0
    elif args.adversary == "tomography":
        if args.mode != "qsel":
            raise QpufLabError("the tomography adversary plays the selective game")
        if not args.privileged:
            raise PrivilegeRequired(
                "tomography reads amplitudes; pass --privileged to grant that"
            )
        readout = PrivilegedReadout()
        factory = lambda: TomographyAdversary(readout)  # noqa: E731
        budget = 2**args.qubits
    else:  # pragma: no cover - argparse restricts choices
        raise QpufLabError(f"unknown adversary {args.adversary!r}")

    cfg = GameConfig(
        mode=args.mode,
        gen=QPufGenParams(qubits=args.qubits, seed=args.seed),
        test=_make_test_config(args),
        learning_budget=budget,
        seed=args.seed,
        mu=args.mu if args.mode == "qex" else None,
    )
    estimate = estimate_win_rate(cfg, factory, args.trials, keep_transcripts=True)
    lines = [
        json.dumps(transcript_record(cfg, t), sort_keys=True)
        for t in estimate.transcripts
    ]
    summary = {
        "summary": {
            "adversary": args.adversary,
            "mode": args.mode,
            "n": args.qubits,
            "stderr": estimate.stderr,
            "trials": estimate.trials,
            "win_rate": estimate.win_rate,
            "wins": estimate.wins,
        }
    }
    lines.append(json.dumps(summary, sort_keys=True))
    _write_with_manifest(args, "game", "\n".join(lines) + "\n")
    return 0


def _cmd_qe_demo(args: argparse.Namespace) -> int:
    instance = qgen(QPufGenParams(qubits=args.qubits, seed=args.seed))
    report = run_forgery(instance, args.mu, margin=args.margin)
    payload = {
        "mu": args.mu,
        "n": args.qubits,
        "device": instance.id,
        "alpha": report.plan.alpha,
        "beta": report.plan.beta,
        "p_succ_stage1": report.p_succ_stage1,
        "stage2_pass_prob": report.stage2_pass_prob,
        "fidelity": report.fidelity,
        "theory_bound": report.theory_bound,
    }
    _write_with_manifest(
        args, "qe-demo", json.dumps(payload, sort_keys=True, indent=2) + "\n"
    )
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv: list[str] = [manifest["subcommand"]]
    for key, value in sorted(manifest["flags"].items()):
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    out = args.out if args.out is not None else manifest["out"]
    argv.extend(["--out", out])
    return main(argv)


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, fmt: bool = True) -> None:
    p.add_argument("--seed", type=int, default=7, help="master random seed")
    p.add_argument("--out", type=str, default=None, help="output file path")
    if fmt:
        p.add_argument(
            "--format", choices=("csv", "json"), default="csv", help="table format"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpuflab",
        description="numerical laboratory for unitary-device unforgeability",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser(
        "forge-sweep",
        help="emulation-attack fidelity vs the distinguishability parameter",
    )
    p.add_argument("--qubits", type=int, default=3)
    p.add_argument("--mu-steps", type=int, default=10)
    p.add_argument("--trials", type=int, default=20, help="devices per mu value")
    p.add_argument("--margin", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_forge_sweep)

    p = sub.add_parser(
        "selective-bound", help="subspace-adversary win rate vs (d + 1) / D"
    )
    p.add_argument("--qubits", type=int, default=3)
    p.add_argument("--d", type=int, default=1, help="learned subspace dimension")
    p.add_argument("--delta", type=float, default=0.5, help="acceptance threshold")
    p.add_argument("--trials", type=int, default=2000)
    _add_common(p)
    p.set_defaults(func=_cmd_selective_bound)

    p = sub.add_parser("verify-all", help="run the audit battery, JSON report")
    p.add_argument(
        "--negative-control",
        action="store_true",
        help="include the deliberately failing audit (forces exit 1)",
    )
    _add_common(p, fmt=False)
    p.set_defaults(func=_cmd_verify_all)

    p = sub.add_parser("game", help="Monte Carlo unforgeability games, JSONL")
    p.add_argument("--mode", choices=("qex", "qsel"), required=True)
    p.add_argument(
        "--adversary",
        choices=("forger", "subspace", "random", "tomography"),
        required=True,
    )
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--test", choices=("swap", "ideal"), default="ideal")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--kappa1", type=int, default=1)
    p.add_argument("--kappa2", type=int, default=1)
    p.add_argument("--privileged", action="store_true")
    _add_common(p, fmt=False)
    p.set_defaults(func=_cmd_game)

    p = sub.add_parser("qe-demo", help="one audited emulation-attack run, JSON")
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--margin", type=float, default=None)
    _add_common(p, fmt=False)
    p.set_defaults(func=_cmd_qe_demo)

    p = sub.add_parser("replay", help="re-run a manifest; output is byte-identical")
    p.add_argument("--manifest", type=str, required=True)
    p.add_argument("--out", type=str, default=None, help="override the output path")
    p.set_defaults(func=_cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QpufLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
