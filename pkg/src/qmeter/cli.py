"""Command-line entry point: ``qmeter run`` and ``qmeter verify``.

Exit codes: 0 success, 1 numerical failure (a verify tolerance breach),
2 input error.  Output files are written atomically, so a failed run
never leaves a partial file behind.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, scenario, verify
from .errors import ValidationError
from .table import ResultTable, emit

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors already; keep it but route through stderr
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("QMETER_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"QMETER_SEED: expected an integer, got {raw!r}") from None


def _dims(text: str) -> list[int]:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not dims or any(d < 2 or d > 16 for d in dims):
        raise argparse.ArgumentTypeError("dimensions must lie in [2, 16]")
    return dims


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmeter", description="Exact qubit-meter and weak-value calculator.")
    parser.add_argument("--version", action="version", version=f"qmeter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=None, help="default: $QMETER_SEED or 0")
    common.add_argument("--threads", type=_positive, default=1)

    run = sub.add_parser("run", parents=[common], help="evaluate a scenario file")
    run.add_argument("file", type=Path)

    ver = sub.add_parser("verify", parents=[common], help="randomized oracle campaign")
    ver.add_argument("--cases", type=_positive, default=1000)
    ver.add_argument("--dims", type=_dims, default=list(verify.DEFAULT_DIMS))
    return parser


def write_atomic(path: Path, data: bytes) -> None:
    """Write through a temp file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or Path("."))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _output(table: ResultTable, args, fallback: str | None) -> None:
    data = emit(table, args.format)
    target = args.out if args.out is not None else (Path(fallback) if fallback else None)
    if target is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        write_atomic(target, data)


def _run(args) -> int:
    try:
        text = args.file.read_text()
    except OSError as exc:
        raise ValidationError(f"{args.file}: {exc.strerror}") from None
    doc = scenario.load(text)
    table = scenario.run(doc, seed=args.seed, threads=args.threads)
    fallback = doc.get("output")
    if fallback is not None and not isinstance(fallback, str):
        raise scenario.ScenarioError("output", "expected a path string")
    if fallback is not None and not os.path.isabs(fallback):
        fallback = str(args.file.parent / fallback)
    _output(table, args, fallback)
    if doc["mode"] == "verify" and not verify.campaign_passed(table):
        return EXIT_NUMERICAL
    return EXIT_OK


def _verify(args) -> int:
    table = verify.run_campaign(args.cases, args.dims, seed=args.seed, threads=args.threads)
    table.meta = {"mode": "verify", "seed": args.seed, "version": __version__, "cases": args.cases}
    _output(table, args, None)
    return EXIT_OK if verify.campaign_passed(table) else EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.command == "run":
            return _run(args)
        return _verify(args)
    except ValidationError as exc:
        print(f"qmeter: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"qmeter: error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
