"""Command-line front end.

    btparam generate --kind koch --level 4 > koch.json
    btparam analyze koch.json
    btparam parametrize koch.json --depth 3 -o hierarchy.json --breakpoints bp.csv
    btparam verify koch.json --depth 3 --samples 10000 --seed 7 --no-timestamp
    btparam render koch.json --depth 3 -o koch.svg

Curves are read from a file or, with ``-`` (the default), from stdin.
Exit status: 0 success, 1 a verification check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .curve import bounded_turning_constant, remetrize_dd
from .division import DEFAULT_TOL
from .errors import BtParamError, InputError
from .generators import GeneratorSpec, generate_curve
from .io import breakpoint_rows, breakpoints_csv, curve_from_dict, curve_to_dict, hierarchy_export, read_curve, write_json
from .parametrization import build_parametrization
from .render import render_svg
from .verification import certify

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


@dataclass
class CommandConfig:
    subcommand: str
    input: str = "-"
    output: str | None = None
    breakpoints: str | None = None
    open_curve: bool = False
    depth: int = 4
    resolution: int | None = None
    samples: int = 10_000
    seed: int = 0
    tol: float = DEFAULT_TOL
    levels: list[int] | None = None
    no_timestamp: bool = False
    kind: str | None = None
    params: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(EXIT_INPUT, {"error": "usage", "message": message})


def _fail(status: int, payload: dict):
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    raise SystemExit(status)


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="btparam", description="Weak-quasisymmetric parametrization of bounded turning curves.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a fixture curve as curve JSON")
    gen.add_argument("--kind", required=True)
    gen.add_argument("--level", type=int)
    gen.add_argument("--n", type=int, help="vertex count (circle, polygon, segment)")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--p", type=float, help="apex displacement of snowflake_family")
    gen.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    gen.add_argument("-o", "--output")

    def with_input(p):
        p.add_argument("input", nargs="?", default="-", help="curve JSON or CSV distance matrix; - for stdin")
        p.add_argument("--open", dest="open_curve", action="store_true", help="CSV matrices describe an arc")
        p.add_argument("-o", "--output")
        return p

    ana = with_input(sub.add_parser("analyze", help="bounded turning constants and diameter"))
    ana.add_argument("--resolution", type=int)
    ana.add_argument("--seed", type=int, default=0)

    par = with_input(sub.add_parser("parametrize", help="export both subdivisions and the breakpoint table"))
    par.add_argument("--depth", type=int, default=4)
    par.add_argument("--tol", type=float, default=DEFAULT_TOL)
    par.add_argument("--breakpoints", help="breakpoint table (.csv or .json)")

    ver = with_input(sub.add_parser("verify", help="run every check and write the certification report"))
    ver.add_argument("--depth", type=int, default=4)
    ver.add_argument("--samples", type=int, default=10_000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--tol", type=float, default=DEFAULT_TOL)
    ver.add_argument("--no-timestamp", action="store_true")

    ren = with_input(sub.add_parser("render", help="SVG of the curve with subdivision points"))
    ren.add_argument("--depth", type=int, default=4)
    ren.add_argument("--levels", type=lambda s: [int(v) for v in s.split(",") if v])
    ren.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return parser


def parse_config(argv=None) -> CommandConfig:
    ns = vars(build_parser().parse_args(argv))
    cfg = CommandConfig(subcommand=ns.pop("subcommand"))
    if cfg.subcommand == "generate":
        cfg.kind = ns.pop("kind")
        params = dict(ns.pop("param"))
        for key in ("level", "n", "seed", "p"):
            if ns.get(key) is not None:
                params[key] = ns[key]
            ns.pop(key, None)
        cfg.params = params
    for key, value in ns.items():
        setattr(cfg, key, value)
    return cfg


def _load(cfg: CommandConfig):
    if cfg.input == "-":
        text = sys.stdin.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"stdin is not valid curve JSON: {exc}") from exc
        return curve_from_dict(data)
    return read_curve(cfg.input, closed=not cfg.open_curve)


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def execute_command(cfg: CommandConfig) -> int:
    if cfg.subcommand == "generate":
        curve = generate_curve(GeneratorSpec(cfg.kind, cfg.params))
        _emit(write_json(curve_to_dict(curve)), cfg.output)
        return EXIT_OK

    curve = _load(cfg)
    if cfg.subcommand == "analyze":
        out = {
            "C_original": bounded_turning_constant(curve, cfg.resolution, seed=cfg.seed),
            "C_dd": bounded_turning_constant(remetrize_dd(curve), cfg.resolution, seed=cfg.seed),
            "diameter": curve.diameter,
            "vertices": curve.n,
            "closed": curve.closed,
        }
        _emit(write_json(out), cfg.output)
        return EXIT_OK

    if cfg.subcommand == "parametrize":
        p = build_parametrization(curve, cfg.depth, cfg.tol)
        _emit(write_json(hierarchy_export(p)), cfg.output)
        if cfg.breakpoints:
            path = Path(cfg.breakpoints)
            text = write_json(breakpoint_rows(p)) if path.suffix.lower() == ".json" else breakpoints_csv(p)
            path.write_text(text, encoding="utf-8")
        return EXIT_OK

    if cfg.subcommand == "verify":
        report = certify(curve, cfg.depth, cfg.samples, cfg.seed, cfg.tol, timestamp=not cfg.no_timestamp)
        _emit(report.to_json() + "\n", cfg.output)
        if not report.passed:
            _fail(EXIT_FAILED, {"error": "check_failed", "failing": report.failing, "errors": report.errors})
        return EXIT_OK

    if cfg.subcommand == "render":
        p = build_parametrization(curve, cfg.depth, cfg.tol)
        _emit(render_svg(p, cfg.levels), cfg.output)
        return EXIT_OK
    raise InputError(f"unknown subcommand {cfg.subcommand!r}")


def main(argv=None) -> int:
    try:
        return execute_command(parse_config(argv))
    except BtParamError as exc:
        _fail(EXIT_INPUT, exc.to_dict())
    except OSError as exc:
        _fail(EXIT_INPUT, {"error": "io_error", "message": str(exc)})


if __name__ == "__main__":
    sys.exit(main())
