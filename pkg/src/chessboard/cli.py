"""Command-line front end: ``chessboard {exact,simulate,oracle,compare,twin}``.

Exit codes: 0 success, 2 usage error, 3 guard error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path as FsPath

from . import analysis, kernel, montecarlo
from .kernel import Convention, GuardError, KernelParams
from .paths import Path
from .twins import entwine, extend_even, meeting_points, orthogonal_twin

logger = logging.getLogger("chessboard")

EXIT_USAGE = 2
EXIT_GUARD = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


class InputError(Exception):
    """An input file is missing pieces or malformed."""


def sci_int(text: str) -> int:
    """Integer flag that also accepts scientific notation, e.g. ``1e6``."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite() or value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def direction(text: str) -> int:
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    if text not in table:
        raise argparse.ArgumentTypeError(f"direction must be +1 or -1, got {text!r}")
    return table[text]


def _digest(path: FsPath) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: FsPath, command: str, params: dict, started: datetime, outputs: list[FsPath]) -> FsPath:
    manifest = {
        "command": command,
        "params": params,
        "seed": params.get("seed"),
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": {p.name: _digest(p) for p in outputs},
    }
    dest = out / f"{command}.manifest.json"
    dest.write_text(json.dumps(manifest, indent=2) + "\n")
    return dest


def cmd_exact(args) -> list[FsPath]:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.corner_weight < 0:
        raise UsageError("--corner-weight must be >= 0")
    params = KernelParams(args.steps, args.corner_weight, Convention(args.convention))
    table = kernel.kernel_table(params, args.start)
    t = None if args.all_slices else args.steps
    if args.format == "csv":
        dest = args.out / "kernel.csv"
        with dest.open("w", newline="") as fh:
            kernel.write_table_csv(table, fh, t)
    else:
        dest = args.out / "kernel.json"
        rows = kernel.table_rows(table, t)
        sign = params.convention.imag_sign
        for row in rows:
            row["k_re"], row["k_im"] = row["phi_r"], sign * row["phi_i"]
        doc = {
            "t_max": params.t_max,
            "corner_weight": params.corner_weight,
            "convention": params.convention.value,
            "start": args.start,
            "rows": rows,
        }
        dest.write_text(json.dumps(doc, indent=2) + "\n")
    return [dest]


def cmd_simulate(args) -> list[FsPath]:
    try:
        config = montecarlo.SimConfig(args.steps, args.corner_prob, args.loops, args.seed, args.workers)
    except ValueError as err:
        raise UsageError(str(err)) from None
    lattice = montecarlo.run(config)
    counts = args.out / "counts.csv"
    meta = args.out / "counts.json"
    with counts.open("w", newline="") as fh:
        montecarlo.write_counts_csv(lattice, fh)
    meta.write_text(json.dumps(montecarlo.metadata(lattice), indent=2) + "\n")
    return [counts, meta]


def cmd_oracle(args) -> list[FsPath]:
    if args.steps < 1 or not 0 <= args.corner_prob <= 1:
        raise UsageError("--steps must be >= 1 and --corner-prob in [0, 1]")
    if args.steps > montecarlo.ORACLE_LIMIT:
        raise GuardError(f"oracle limited to --steps <= {montecarlo.ORACLE_LIMIT}")
    dest = args.out / "oracle.csv"
    with dest.open("w", newline="") as fh:
        montecarlo.write_expected_csv(args.steps, args.corner_prob, fh)
    return [dest]


def cmd_compare(args) -> list[FsPath]:
    sim = FsPath(args.sim_file)
    meta = sim.with_suffix(".json")
    with sim.open() as cf, meta.open() as mf:
        try:
            lattice = montecarlo.read_counts(cf, mf)
        except (KeyError, ValueError) as err:
            raise InputError(f"cannot read {sim}: {err}") from None
    n = lattice.config.n_steps
    if not 1 <= args.slice <= n:
        raise UsageError(f"--slice must lie in 1..{n}")
    try:
        comparison = analysis.compare_slice(lattice, args.slice)
    except ValueError as err:
        raise UsageError(str(err)) from None
    if comparison.warning:
        logger.warning(comparison.warning)
    table = args.out / "comparison.csv"
    summary = args.out / "comparison.json"
    with table.open("w", newline="") as fh:
        analysis.write_comparison_csv(comparison, fh)
    summary.write_text(json.dumps(comparison.summary(), indent=2) + "\n")
    return [table, summary]


def cmd_twin(args) -> None:
    try:
        path = Path.parse(args.path)
    except ValueError as err:
        raise UsageError(str(err)) from None
    twin = orthogonal_twin(path)
    print(f"path: {path}")
    print(f"extended: {extend_even(path)}")
    print(f"twin: {twin}")
    print("meetings: " + " ".join(f"({s.x},{s.t})" for s in meeting_points(path, twin)))
    print("channel,space_dir,time_dir,x_from,t_from,x_to,t_to")
    for move, a, b in entwine(path).segments():
        print(f"{move.channel.value},{move.space_dir:+d},{move.time_dir:+d},{a.x},{a.t},{b.x},{b.t}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chessboard",
        description="Exact chessboard kernel and its single-path Monte Carlo reconstruction.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def out_flag(p):
        p.add_argument("--out", type=FsPath, default=FsPath("."), help="output directory (default: .)")

    p = sub.add_parser("exact", help="exact kernel table", allow_abbrev=False)
    p.add_argument("--steps", type=sci_int, required=True)
    p.add_argument("--corner-weight", type=float, required=True)
    p.add_argument("--convention", choices=[c.value for c in Convention], default="feynman")
    p.add_argument("--start", type=direction, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--all-slices", action="store_true", help="export every slice, not just t = steps")
    out_flag(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="single-path Monte Carlo run", allow_abbrev=False)
    p.add_argument("--steps", type=sci_int, required=True)
    p.add_argument("--corner-prob", type=float, required=True)
    p.add_argument("--loops", type=sci_int, required=True)
    p.add_argument("--seed", type=sci_int, default=0)
    p.add_argument("--workers", type=sci_int, default=1)
    out_flag(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact per-loop expected deposits", allow_abbrev=False)
    p.add_argument("--steps", type=sci_int, required=True)
    p.add_argument("--corner-prob", type=float, required=True)
    out_flag(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="compare a simulation slice with the kernel", allow_abbrev=False)
    p.add_argument("sim_file", help="counts CSV; metadata is read from the sibling .json")
    p.add_argument("--slice", type=sci_int, required=True)
    out_flag(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("twin", help="show a path's twin, meetings and entwined loop", allow_abbrev=False)
    p.add_argument("path", help='path as a string over "+-", e.g. "++-"')
    p.set_defaults(func=cmd_twin)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    started = datetime.now(timezone.utc)
    try:
        if hasattr(args, "out"):
            args.out.mkdir(parents=True, exist_ok=True)
        outputs = args.func(args)
        if outputs:
            params = {k: (str(v) if isinstance(v, FsPath) else v)
                      for k, v in vars(args).items() if k not in ("func", "command")}
            write_manifest(args.out, args.command, params, started, outputs)
    except UsageError as err:
        parser.error(str(err))
    except GuardError as err:
        print(f"chessboard: guard error: {err}", file=sys.stderr)
        return EXIT_GUARD
    except (OSError, InputError) as err:
        print(f"chessboard: I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
