"""
ivexpand — Command-line front end

    ivexpand eval   --expr E --arity N --at P
    ivexpand diff   --expr E --arity N --at P --wrt I
    ivexpand grad   --expr E --arity N --at P
    ivexpand hess   --expr E --arity N --at P
    ivexpand mono   --expr E --arity N --box B --wrt I [--grid G]
    ivexpand expand --expr E --arity N --about A --order K [--target X]
    ivexpand check  [--corpus FILE --arity N] [--seed S]

Points are comma-separated reals (``--at 2,2``), boxes semicolon-separated
intervals (``--box "[0,1];[0,2]"``). Every command accepts
``--format json|text``.

Exit codes: 0 success, 2 input or parse error, 3 mathematical failure,
4 failed verification.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from contextlib import contextmanager
from typing import Any, Iterator, Literal, Optional, Sequence, TextIO

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from ivexpand.calculus import DEFAULT_MU_GRID, MAX_SERIES_ORDER, MAX_TENSOR_ORDER, hessian, mu_classify, partial_gh
from ivexpand.corpus import DEFAULT_SEED, load_corpus
from ivexpand.errors import InvalidArgumentError, IvexpandError, MathematicalError
from ivexpand.expansion import eval_polynomial, taylor_1d, taylor_nd
from ivexpand.funcexpr import eval_interval, parse
from ivexpand.interval import Interval, format_interval, parse_box
from ivexpand.verify import Report, run_suite

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

EXIT_OK: int     = 0
EXIT_INPUT: int  = 2
EXIT_MATH: int   = 3
EXIT_VERIFY: int = 4

SUBCOMMANDS: tuple[str, ...] = ("eval", "diff", "grad", "hess", "mono", "expand", "check")
FORMATS: tuple[str, ...] = ("json", "text")

FLAGS: dict[str, str] = {
    "expr_text": "--expr",
    "arity":     "--arity",
    "point":     "--at",
    "wrt":       "--wrt",
    "box":       "--box",
    "about":     "--about",
    "target":    "--target",
    "order":     "--order",
    "grid":      "--grid",
    "corpus":    "--corpus",
    "format":    "--format",
    "seed":      "--seed",
}

_REQUIRED: dict[str, tuple[str, ...]] = {
    "eval":   ("expr_text", "arity", "point"),
    "diff":   ("expr_text", "arity", "point", "wrt"),
    "grad":   ("expr_text", "arity", "point"),
    "hess":   ("expr_text", "arity", "point"),
    "mono":   ("expr_text", "arity", "box", "wrt"),
    "expand": ("expr_text", "arity", "about", "order"),
    "check":  (),
}

_OPTIONAL: dict[str, tuple[str, ...]] = {
    "mono":   ("grid",),
    "expand": ("target",),
    "check":  ("corpus", "arity"),
}

REPORT_HEADER = "ivexpand verify: {total} checks, {passed} passed, {failed} failed, {skipped} skipped"


# ---------------------------------------------------------------------------
# Command spec
# ---------------------------------------------------------------------------


class CommandSpec(BaseModel):
    """Validated command-line request."""

    model_config = ConfigDict(frozen=True)

    subcommand: Literal["eval", "diff", "grad", "hess", "mono", "expand", "check"]
    expr_text:  Optional[str] = None
    arity:      Optional[int] = None
    point:      Optional[list[float]] = None
    wrt:        Optional[int] = None
    box:        Optional[list[tuple[float, float]]] = None
    about:      Optional[list[float]] = None
    target:     Optional[list[float]] = None
    order:      Optional[int] = None
    grid:       Optional[int] = None
    corpus:     Optional[str] = None
    format:     Literal["json", "text"] = "text"
    seed:       int = DEFAULT_SEED

    @model_validator(mode="after")
    def _flags_match_subcommand(self) -> "CommandSpec":
        cmd = self.subcommand
        required = _REQUIRED[cmd]
        allowed = set(required) | set(_OPTIONAL.get(cmd, ()))
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"{cmd} needs {FLAGS[name]}")
        for name in FLAGS:
            if name in ("format", "seed") or name in allowed:
                continue
            if getattr(self, name) is not None:
                raise ValueError(f"{FLAGS[name]} is not used by {cmd}")

        if self.arity is not None and self.arity < 1:
            raise ValueError(f"--arity must be >= 1, got {self.arity}")
        for name in ("point", "about", "target"):
            value = getattr(self, name)
            if value is None:
                continue
            if not all(math.isfinite(x) for x in value):
                raise ValueError(f"{FLAGS[name]} must contain finite reals, got {value}")
            if len(value) != self.arity:
                raise ValueError(f"{FLAGS[name]} has {len(value)} coordinates, --arity is {self.arity}")
        if self.box is not None and len(self.box) != self.arity:
            raise ValueError(f"--box has {len(self.box)} intervals, --arity is {self.arity}")
        if self.wrt is not None and not 1 <= self.wrt <= (self.arity or 0):
            raise ValueError(f"--wrt must be in 1..{self.arity}, got {self.wrt}")
        if self.grid is not None and self.grid < 3:
            raise ValueError(f"--grid must be >= 3, got {self.grid}")
        if self.order is not None:
            top = MAX_SERIES_ORDER if self.arity == 1 else MAX_TENSOR_ORDER
            if not 1 <= self.order <= top:
                raise ValueError(f"--order must be in 1..{top} for arity {self.arity}, got {self.order}")
        if self.corpus is not None and self.arity is None:
            raise ValueError("--corpus needs --arity")
        return self


def build_spec(**values: Any) -> CommandSpec:
    """``CommandSpec(**values)`` with validation failures raised as InvalidArgumentError."""
    try:
        return CommandSpec(**values)
    except ValidationError as exc:
        messages = []
        for err in exc.errors():
            msg = err["msg"].removeprefix("Value error, ")
            loc = [str(part) for part in err.get("loc", ()) if str(part) in FLAGS]
            messages.append(f"{FLAGS[loc[0]]}: {msg}" if loc else msg)
        raise InvalidArgumentError("; ".join(messages)) from exc


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _emit(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj + 0.0, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Interval):
        return _emit(obj.to_list())
    if isinstance(obj, BaseModel):
        return _emit(obj.model_dump())
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_emit(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_emit(v) for v in obj) + "]"
    if hasattr(obj, "to_dict"):
        return _emit(obj.to_dict())
    raise InvalidArgumentError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj: Any) -> str:
    """Compact JSON, reals with 17 significant digits, non-finite reals as null."""
    return _emit(obj)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _report_line(report: Report) -> str:
    line = f"{report.status}  {report.check_id}  measured={report.measured:.3e}  tolerance={report.tolerance:.3e}  samples={report.samples}"
    if report.skipped:
        return f"{line}  reason: {report.reason}"
    if not report.passed and report.witnesses:
        worst = report.witnesses[0]
        line += f"  worst: point={worst.point} expected={worst.expected} actual={worst.actual}"
    return line


def report_summary(reports: Sequence[Report]) -> dict[str, int]:
    return {
        "total":   len(reports),
        "passed":  sum(1 for r in reports if r.passed and not r.skipped),
        "failed":  sum(1 for r in reports if not r.passed),
        "skipped": sum(1 for r in reports if r.skipped),
    }


def render_report(reports: Sequence[Report], fmt: str = "text") -> str:
    """Reports ordered by check_id, as text lines or one JSON object."""
    if fmt not in FORMATS:
        raise InvalidArgumentError(f"--format must be one of {list(FORMATS)}, got {fmt!r}")
    ordered = sorted(reports, key=lambda r: r.check_id)
    counts = report_summary(ordered)
    if fmt == "json":
        return dump_json({"summary": counts, "reports": [r.to_dict() for r in ordered]})
    return "\n".join([REPORT_HEADER.format(**counts)] + [_report_line(r) for r in ordered])


def _render_text(spec: CommandSpec, result: dict) -> str:
    cmd = spec.subcommand
    if cmd == "eval":
        return format_interval(Interval(*result["value"]))
    if cmd == "diff":
        note = "" if result["branch_stable"] else ", endpoint branches tie"
        return f"d/dx{spec.wrt} = {format_interval(Interval(*result['value']))}  ({result['method']}{note})"
    if cmd == "grad":
        return "\n".join(f"x{i + 1}: {format_interval(Interval(*v))}" for i, v in enumerate(result["gradient"]))
    if cmd == "hess":
        return "\n".join("  ".join(format_interval(Interval(*v)) for v in row) for row in result["hessian"])
    if cmd == "mono":
        lines = [f"x{result['axis']}: {result['verdict']}"]
        lines += [f"  split at {tuple(p)}" for p in result["split_points"]]
        return "\n".join(lines)
    if cmd == "expand":
        lines = [f"alpha={tuple(t['alpha'])}  {format_interval(Interval(*t['coeff']))}" for t in result["terms"]]
        if result["remainder"] is not None:
            lines.append(f"remainder  {format_interval(Interval(*result['remainder']))}  ({result['meta'].get('sampling')})")
        if result.get("value_at_target") is not None:
            lines.append(f"partial sum at target  {format_interval(Interval(*result['value_at_target']))}")
        return "\n".join(lines)
    raise InvalidArgumentError(f"no text rendering for {cmd}")


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


@contextmanager
def capture_warnings() -> Iterator[list[str]]:
    """Collect warning-level log messages emitted while the block runs."""
    messages: list[str] = []
    sink_id = logger.add(lambda message: messages.append(message.record["message"]), level="WARNING", format="{message}")
    try:
        yield messages
    finally:
        logger.remove(sink_id)


def _execute(spec: CommandSpec) -> tuple[dict, int]:
    cmd = spec.subcommand
    if cmd == "check":
        corpus = load_corpus(spec.corpus, spec.arity, spec.seed) if spec.corpus else None
        reports = run_suite(seed=spec.seed, corpus=corpus)
        failed = any(not r.passed for r in reports)
        return {"summary": report_summary(reports), "reports": reports}, (EXIT_VERIFY if failed else EXIT_OK)

    e = parse(spec.expr_text, spec.arity)
    if cmd == "eval":
        return {"value": eval_interval(e, spec.point).to_list()}, EXIT_OK
    if cmd == "diff":
        return partial_gh(e, spec.wrt, spec.point).to_dict(), EXIT_OK
    if cmd == "grad":
        results = [partial_gh(e, i, spec.point) for i in range(1, e.arity + 1)]
        return {
            "gradient":      [r.value.to_list() for r in results],
            "methods":       [r.method for r in results],
            "branch_stable": all(r.branch_stable for r in results),
        }, EXIT_OK
    if cmd == "hess":
        return {"hessian": hessian(e, spec.point).to_list()}, EXIT_OK
    if cmd == "mono":
        box = [Interval(lo, hi) for lo, hi in spec.box]
        return mu_classify(e, spec.wrt, box, grid=spec.grid or DEFAULT_MU_GRID).to_dict(), EXIT_OK

    # expand
    if e.arity == 1:
        target = spec.target[0] if spec.target else None
        poly = taylor_1d(e, spec.about[0], spec.order, x=target)
    else:
        poly = taylor_nd(e, spec.about, x=spec.target, s=spec.order)
    result = poly.to_dict()
    result["value_at_target"] = eval_polynomial(poly, spec.target).to_list() if spec.target else None
    return result, EXIT_OK


def run(spec: CommandSpec, stream: Optional[TextIO] = None) -> int:
    """Execute one command, write its output to ``stream`` (stdout by default) and return the exit code."""
    if stream is None:
        stream = sys.stdout
    payload: dict[str, Any] = {
        "command": spec.subcommand,
        "input":   spec.model_dump(exclude_none=True, exclude={"format"}),
    }
    with capture_warnings() as warnings:
        try:
            result, code = _execute(spec)
        except InvalidArgumentError as exc:
            result, code, error = None, EXIT_INPUT, exc
        except MathematicalError as exc:
            result, code, error = None, EXIT_MATH, exc
        except IvexpandError as exc:
            result, code, error = None, EXIT_INPUT, exc
        except ArithmeticError as exc:
            # float overflow on finite input is treated like a domain error
            result, code, error = None, EXIT_INPUT, exc
        else:
            error = None
    payload["result"] = result
    payload["warnings"] = sorted(set(warnings))

    if error is not None:
        logger.error("{} failed: {}", spec.subcommand, error)
        payload["error"] = {"type": type(error).__name__, "message": str(error)}
        if spec.format == "json":
            stream.write(dump_json(payload) + "\n")
        return code

    if spec.subcommand == "check" and spec.format == "text":
        stream.write(render_report(result["reports"]) + "\n")
    elif spec.format == "json":
        stream.write(dump_json(payload) + "\n")
    else:
        stream.write(_render_text(spec, result) + "\n")
    return code


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _reals(text: Optional[str], flag: str) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise InvalidArgumentError(f"{flag}: expected comma-separated reals, got {text!r}") from exc


def _box(text: Optional[str]) -> Optional[list[tuple[float, float]]]:
    if text is None:
        return None
    try:
        return [(b.lo, b.hi) for b in parse_box(text)]
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"--box: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--expr", dest="expr_text", help="Interval-valued expression")
    common.add_argument("--arity", type=int, help="Number of real variables")
    common.add_argument("--at", help="Evaluation point, comma-separated")
    common.add_argument("--wrt", type=int, help="Axis, 1-based")
    common.add_argument("--box", help="Semicolon-separated intervals, e.g. [0,1];[0,2]")
    common.add_argument("--about", help="Expansion base point, comma-separated")
    common.add_argument("--target", help="Expansion target point, comma-separated")
    common.add_argument("--order", type=int, help="Expansion order (n for one variable, s ≤ 3 otherwise)")
    common.add_argument("--grid", type=int, help="Samples per axis for mono")
    common.add_argument("--corpus", help="File with one expression per line, for check")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED, help="Corpus seed")

    parser = argparse.ArgumentParser(
        prog="ivexpand",
        description="gH calculus and expansions of interval-valued functions",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def spec_from_args(args: argparse.Namespace) -> CommandSpec:
    return build_spec(
        subcommand=args.subcommand,
        expr_text=args.expr_text,
        arity=args.arity,
        point=_reals(args.at, "--at"),
        wrt=args.wrt,
        box=_box(args.box),
        about=_reals(args.about, "--about"),
        target=_reals(args.target, "--target"),
        order=args.order,
        grid=args.grid,
        corpus=args.corpus,
        format=args.format,
        seed=args.seed,
    )


def configure_logging() -> None:
    logger.remove()
    logger.add(sys.stderr, level=os.getenv("LOG_LEVEL", "WARNING"))


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
    except IvexpandError as exc:
        logger.error("{}", exc)
        return EXIT_INPUT
    return run(spec)


if __name__ == "__main__":
    raise SystemExit(main())
