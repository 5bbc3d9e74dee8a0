"""Command-line interface.

Verbs: run (one scenario), ablate (strategy-toggle grid), validate (trace
structure + compliance check), synth (generate a synthetic trace), report
(reformat a saved JSON report). Exit code is nonzero iff the run failed or
validation found violations. EDGESEM_OUT_DIR, when set, prefixes relative
--out paths.
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from pathlib import Path

from .config import ConfigError, Mode, load_config, load_synth_config
from .reports import emit_ablation, emit_report, parse_report
from .runner import RunError, run_ablation, run_scenario
from .semantic_io import ComplianceError, parse_semantic_output
from .synth import build_class_table, synth_trace
from .traceio import TraceFormatError, load_trace, write_trace

_MODES = {"edge": Mode.EDGE, "cloud": Mode.CLOUD, "collab": Mode.COLLAB}


def _out_path(raw: str | None) -> Path | None:
    if raw is None:
        return None
    path = Path(raw)
    base = os.environ.get("EDGESEM_OUT_DIR")
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def _write_output(data: bytes, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(data)


def _resolve_config(args: argparse.Namespace):
    config = load_config(args.config)
    if getattr(args, "mode", None):
        from dataclasses import replace

        config = replace(config, mode=_MODES[args.mode])
    if getattr(args, "trace", None):
        from dataclasses import replace

        config = replace(config, trace_path=args.trace)
    if config.trace_path is None:
        raise ConfigError("no trace file: set 'trace' in the config or pass --trace")
    return config


def _cmd_run(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    output = run_scenario(config, workers=args.workers)
    _write_output(emit_report(output.report, args.format), _out_path(args.out))
    for fid, msg in output.errors:
        print(f"warning: frame {fid} failed: {msg}", file=sys.stderr)
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    result = run_ablation(config, workers=args.workers)
    _write_output(emit_ablation(result, args.format), _out_path(args.out))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    frames = load_trace(config.trace_path, config.class_table)
    print(f"trace OK: {len(frames)} frames")
    kinds: Counter[str] = Counter()
    ok = 0
    for frame in frames:
        parsed = parse_semantic_output(frame.cloud_text, config.class_table)
        if isinstance(parsed, ComplianceError):
            kinds[parsed.kind.value] += 1
        else:
            ok += 1
    rate = ok / len(frames)
    print(f"cloud-output compliance: {ok}/{len(frames)} = {rate:.6g}")
    for kind, count in sorted(kinds.items()):
        print(f"  {kind}: {count}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = load_synth_config(args.config)
    frames = synth_trace(spec)
    out = _out_path(args.out)
    write_trace(out, frames, build_class_table(spec.class_names))
    print(f"wrote {len(frames)} frames to {out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    data = Path(args.input).read_bytes()
    report = parse_report(data)
    _write_output(emit_report(report, args.format), _out_path(args.out))
    return 0


def _add_common(parser: argparse.ArgumentParser, mode_flag: bool = True) -> None:
    parser.add_argument("--config", required=True, help="scenario config file (JSON)")
    parser.add_argument("--trace", help="trace file override (line-delimited JSON)")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--workers", type=int, default=1, help="frame worker threads")
    if mode_flag:
        parser.add_argument("--mode", choices=sorted(_MODES), help="override the config mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgesem", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and emit its report")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_ablate = sub.add_parser("ablate", help="run the 8-subset strategy ablation grid")
    _add_common(p_ablate, mode_flag=True)
    p_ablate.set_defaults(func=_cmd_ablate)

    p_validate = sub.add_parser("validate", help="validate a trace and report compliance")
    p_validate.add_argument("--config", required=True)
    p_validate.add_argument("--trace", help="trace file override")
    p_validate.set_defaults(func=_cmd_validate)

    p_synth = sub.add_parser("synth", help="generate a synthetic trace")
    p_synth.add_argument("--config", required=True, help="generator config file (JSON)")
    p_synth.add_argument("--out", required=True, help="trace output path")
    p_synth.set_defaults(func=_cmd_synth)

    p_report = sub.add_parser("report", help="reformat a saved JSON report")
    p_report.add_argument("input", help="saved report (JSON)")
    p_report.add_argument("--format", choices=("json", "csv"), default="csv")
    p_report.add_argument("--out", help="output path (default: stdout)")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceFormatError, RunError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
