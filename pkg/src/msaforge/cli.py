"""Command-line entry point: ``msaforge check|graph|generate|fmt``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

from .analyzer import dependency_graph, export_dot, export_json
from .codegen import GenerationRequest, Target, generate
from .diagnostics import Diagnostic, Severity, sort_diagnostics
from .errors import AddressUnparsable, DiagnosticError, GenerationRefused, OutputConflict
from .formatter import format_unit
from .linker import load_model, read_file
from .parser import EXTENSIONS, parse_source
from .validator import validate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_USAGE = 3

CONFIG_FILE = "msaforge.toml"
NO_COLOR_ENV = "MSAFORGE_NO_COLOR"


@dataclass
class CliConfig:
    entry_files: list[str]
    output_dir: str = "out"
    json_output: bool = False
    fail_on_warning: bool = False


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which means something else here
        raise UsageError(f"{self.format_usage().rstrip()}\n{self.prog}: error: {message}")


def _truthy(text: str) -> bool:
    value = text.strip().lower()
    if value in ("true", "yes", "on", "1"):
        return True
    if value in ("false", "no", "off", "0"):
        return False
    raise UsageError(f"{CONFIG_FILE}: expected a boolean, got {text!r}")


def read_config(path: str = CONFIG_FILE) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, values may be double-quoted."""
    if not os.path.isfile(path):
        return {}
    out = {}
    for n, raw in enumerate(read_file(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] == '"':
            value = value[1:-1]
        out[key.strip().replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="msaforge", description="Microservice architecture model toolchain.")
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    check = sub.add_parser("check", help="parse, link and validate models")
    check.add_argument("files", nargs="+")
    check.add_argument("--json", action="store_true", default=None, help="print diagnostics as JSON")
    check.add_argument("--fail-on-warning", action="store_true", default=None)

    graph = sub.add_parser("graph", help="print the microservice interaction graph")
    graph.add_argument("files", nargs="+")
    fmt_group = graph.add_mutually_exclusive_group()
    fmt_group.add_argument("--dot", action="store_const", dest="graph_format", const="dot")
    fmt_group.add_argument("--json", action="store_const", dest="graph_format", const="json")

    gen = sub.add_parser("generate", help="generate interface descriptors or a deployment manifest")
    gen.add_argument("files", nargs="+")
    gen.add_argument("--target", required=True, choices=[t.value for t in Target])
    gen.add_argument("--out", dest="output_dir", default=None)
    gen.add_argument("--overwrite", action="store_true")

    fmt = sub.add_parser("fmt", help="print or rewrite files in canonical layout")
    fmt.add_argument("files", nargs="+")
    mode = fmt.add_mutually_exclusive_group()
    mode.add_argument("--write", action="store_true")
    mode.add_argument("--check", action="store_true")
    return parser


def _config(args: argparse.Namespace) -> CliConfig:
    defaults = read_config()
    cfg = CliConfig(entry_files=list(args.files))
    if "output_dir" in defaults or "out" in defaults:
        cfg.output_dir = defaults.get("output_dir", defaults.get("out"))
    if "json" in defaults:
        cfg.json_output = _truthy(defaults["json"])
    if "fail_on_warning" in defaults:
        cfg.fail_on_warning = _truthy(defaults["fail_on_warning"])
    if getattr(args, "json", None):
        cfg.json_output = True
    if getattr(args, "fail_on_warning", None):
        cfg.fail_on_warning = True
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    for f in cfg.entry_files:
        if os.path.splitext(f)[1] not in EXTENSIONS:
            raise UsageError(f"{f}: unrecognized extension (expected one of {', '.join(sorted(EXTENSIONS))})")
    return cfg


class _Session:
    def __init__(self, out: TextIO, err: TextIO):
        self.out = out
        self.err = err
        self.color = not os.environ.get(NO_COLOR_ENV) and getattr(err, "isatty", lambda: False)()

    def report(self, diags: Sequence[Diagnostic]) -> None:
        for d in sort_diagnostics(diags):
            print(d.render(self.color), file=self.err)

    def report_json(self, diags: Sequence[Diagnostic]) -> None:
        diags = sort_diagnostics(diags)
        doc = {
            "diagnostics": [d.to_json() for d in diags],
            "summary": {
                "errors": sum(1 for d in diags if d.severity is Severity.ERROR),
                "warnings": sum(1 for d in diags if d.severity is Severity.WARNING),
            },
        }
        print(json.dumps(doc, sort_keys=True, indent=2), file=self.out)

    def emit(self, cfg: CliConfig, diags: Sequence[Diagnostic]) -> None:
        if cfg.json_output:
            self.report_json(diags)
        else:
            self.report(diags)

    def load(self, cfg: CliConfig):
        for f in cfg.entry_files:
            if not os.path.isfile(f):
                raise OSError(f"{f}: no such file")
        return load_model(cfg.entry_files)

    # -- subcommands --------------------------------------------------------

    def check(self, args) -> int:
        cfg = _config(args)
        try:
            model = self.load(cfg)
        except DiagnosticError as exc:
            self.emit(cfg, exc.diagnostics)
            return EXIT_PARSE
        diags = validate(model)
        self.emit(cfg, diags)
        if any(d.is_error for d in diags) or (cfg.fail_on_warning and diags):
            return EXIT_INVALID
        return EXIT_OK

    def graph(self, args) -> int:
        cfg = _config(args)
        try:
            model = self.load(cfg)
        except DiagnosticError as exc:
            self.report(exc.diagnostics)
            return EXIT_PARSE
        g = dependency_graph(model)
        self.out.write(export_json(g) if args.graph_format == "json" else export_dot(g))
        return EXIT_OK

    def generate(self, args) -> int:
        cfg = _config(args)
        try:
            model = self.load(cfg)
        except DiagnosticError as exc:
            self.report(exc.diagnostics)
            return EXIT_PARSE
        request = GenerationRequest(Target(args.target), cfg.output_dir, args.overwrite)
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", AddressUnparsable)
                written = generate(request, model)
        except GenerationRefused as exc:
            self.report(exc.diagnostics)
            return EXIT_INVALID
        except OutputConflict as exc:
            print(f"msaforge: {exc}", file=self.err)
            return EXIT_USAGE
        for w in caught:
            print(f"msaforge: warning: {w.message}", file=self.err)
        for path in written:
            print(path, file=self.out)
        return EXIT_OK

    def fmt(self, args) -> int:
        cfg = _config(args)
        units = []
        for path in cfg.entry_files:
            unit = parse_source(read_file(path), path)
            if unit.has_errors:
                self.report(unit.diagnostics)
                return EXIT_PARSE
            units.append((path, read_file(path), format_unit(unit)))
        if args.check:
            stale = [path for path, old, new in units if old != new]
            for path in stale:
                print(path, file=self.out)
            return EXIT_INVALID if stale else EXIT_OK
        for path, old, new in units:
            if args.write:
                if old != new:
                    with open(path, "w", encoding="utf-8", newline="\n") as fh:
                        fh.write(new)
            else:
                self.out.write(new)
        return EXIT_OK


def run(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        if args.command is None:
            raise UsageError(parser.format_usage().rstrip())
        session = _Session(out, err)
        return getattr(session, args.command)(args)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except OSError as exc:
        print(f"msaforge: {exc}", file=err)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
