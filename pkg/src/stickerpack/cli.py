"""Command-line front end.

Exit codes: 0 ok, 1 an experiment expectation failed, 2 usage or
configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import classical, experiments, machine, stats
from .album import AlbumError, PRESETS
from .experiments import EXIT_EXPECTATION, EXIT_IO, EXIT_OK, EXIT_USAGE, ExperimentSpec, IngestError
from .mixing import MixingStrategy

log = logging.getLogger("stickerpack")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _album_args(p):
    p.add_argument("--preset", choices=sorted(PRESETS), default="amici")
    p.add_argument("--config", help="JSON album file (overrides --preset)")


def _write_json(obj, path):
    text = json.dumps(experiments._jsonable(obj), indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n")


def cmd_formulas(args):
    cfg = experiments.resolve_config(args.preset, args.config)
    rows = classical.formulas(cfg, args.target)
    if args.json:
        _write_json(rows, "-")
        return EXIT_OK
    width = max(len(k) for k in rows)
    for key, value in rows.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        elif isinstance(value, int) and value >= 10**6:
            value = f"{value:,}"
        print(f"{key:<{width}}  {value}")
    return EXIT_OK


def cmd_simulate_classical(args):
    cfg = experiments.resolve_config(args.preset, args.config)
    target = cfg.buyback_target if args.target is None else args.target
    rng = np.random.default_rng(args.seed)
    counts = classical.completion_card_counts(cfg, target, args.runs, rng)
    if args.out:
        experiments.write_series_csv(args.out, {"run": list(range(1, len(counts) + 1)),
                                                "cards": counts.tolist()})
    summary = experiments._describe(counts)
    if len(counts) >= 3 and counts.std() > 0:
        summary["skewness"] = stats.sample_skewness(counts)
    summary["analytic_mean"] = classical.expected_cards_to_target(cfg.total_stickers, target)
    summary["analytic_std"] = classical.std_cards_to_target(cfg.total_stickers, target)
    _write_json({"target": target, "seed": args.seed, "completion": summary}, args.report or "-")
    return EXIT_OK


def cmd_produce(args):
    cfg = experiments.resolve_config(args.preset, args.config)
    strategy = MixingStrategy.parse(args.mix, args.seed)
    packets = machine.produce(cfg, strategy, args.packets, args.orientation)
    experiments.write_packets_csv(packets, args.out)
    log.info("wrote %d packets to %s", len(packets), args.out)
    return EXIT_OK


def cmd_pack_displays(args):
    cfg = experiments.resolve_config(args.preset, args.config)
    packets = experiments.read_packets_csv(args.input)
    displays = machine.pack_displays(packets, cfg, args.policy)
    displays = [type(d)(d.packets, str(i)) for i, d in enumerate(displays, start=1)]
    experiments.write_displays_csv(displays, args.out)
    if args.report:
        dups = [stats.count_duplicates(d.stickers).duplicates for d in displays]
        _write_json({"displays": len(displays), "duplicates": dups}, args.report)
    return EXIT_OK


def cmd_analyze_display(args):
    cfg = experiments.resolve_config(args.preset, args.config)
    displays = experiments.ingest_displays(args.input, cfg)
    if not displays:
        raise UsageError(f"{args.input}: no displays found")
    result = experiments.analyze_displays(displays, cfg, args.replicates, args.seed, not args.open)
    _write_json(result, args.report or "-")
    return EXIT_OK


def cmd_run_spec(args):
    if args.list:
        for name in experiments.bundled_specs():
            print(name)
        return EXIT_OK
    if not args.spec:
        raise UsageError("run-spec: give a spec name or path (or --list)")
    spec = ExperimentSpec.load(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    if args.replicates is not None:
        spec.replicates = args.replicates
    if args.report:
        spec.outputs["report"] = args.report
    report = experiments.run(spec, args.outdir)
    for check in report.checks:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['statistic']} = {check['value']} "
              f"[{check['min']}, {check['max']}] {check['criterion']}")
    if "report" not in spec.outputs:
        print(report.to_json())
    return EXIT_OK if report.passed else EXIT_EXPECTATION


def build_parser():
    parser = _Parser(prog="stickerpack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("formulas", help="closed-form quantities for an album")
    _album_args(p)
    p.add_argument("--target", type=int, help="distinct stickers wanted (default B - K)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_formulas)

    p = sub.add_parser("simulate-classical", help="classical collections until a target")
    _album_args(p)
    p.add_argument("--target", type=int)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV with one completion count per run")
    p.add_argument("--report", help="JSON summary path (default stdout)")
    p.set_defaults(func=cmd_simulate_classical)

    p = sub.add_parser("produce", help="run the packing machine")
    _album_args(p)
    p.add_argument("--mix", default="iid", help="cyclic|iid|block|swap:COUNT:WINDOW|twosided:BLOCK")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--packets", type=int, default=100)
    p.add_argument("--orientation", choices=machine.ORIENTATIONS, default="descending")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_produce)

    p = sub.add_parser("pack-displays", help="group produced packets into displays")
    _album_args(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--policy", choices=machine.PACKING_POLICIES, default="round-robin")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_pack_displays)

    p = sub.add_parser("analyze-display", help="duplicate statistics of observed displays")
    _album_args(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--replicates", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--open", action="store_true", help="count interval boundaries as significant")
    p.add_argument("--report")
    p.set_defaults(func=cmd_analyze_display)

    p = sub.add_parser("run-spec", help="run a bundled or custom experiment spec")
    p.add_argument("spec", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--outdir", default=".")
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_run_spec)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            log.setLevel(logging.INFO)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (AlbumError, IngestError, KeyError, json.JSONDecodeError, csv.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
