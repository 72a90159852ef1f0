"""Command-line interface.

Exit codes: 0 success, 1 usage or config error, 2 vote-data validation error,
3 oracle instance too large, 4 oracle disagreement found.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import kernels
from .certifiers import Analyzer, BudgetMode, certify, smallest_tie_cost
from .errors import (
    InvalidKError,
    InvalidPatchError,
    InvalidSchemeError,
    OracleTooLargeError,
    UnknownProfileError,
    VoteDataError,
)
from .geometry import PatchSpec, build_patch_regions
from .io import (
    NATIVE_CONFIGS,
    PROFILES,
    RunConfig,
    emit_report,
    gen_synthetic,
    load_votes,
    parse_report,
    save_votes,
)
from .metrics import dataset_minks, sweep
from .oracle import attack_feasible_at, oracle_min_push_cost
from .votes import clean_level

log = logging.getLogger("patchcert")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ORACLE_SIZE, EXIT_ORACLE_MISMATCH = 0, 1, 2, 3, 4

_GEOMETRY_FLAGS = {
    "width": "image_width", "height": "image_height", "band": "band_width", "wrap": "wrap",
    "labels": "num_labels", "patch": "patch_sides", "k": "k_values", "budget": "budget_mode",
    "analyzer": "analyzers", "seed": "seed",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _analyzers(text: str) -> list[str]:
    if text == "all":
        return [a.value for a in Analyzer]
    return [Analyzer(v).value for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", type=Path, help="JSON run config; flags override it")
    g.add_argument("--width", type=int)
    g.add_argument("--height", type=int)
    g.add_argument("--band", type=int)
    g.add_argument("--wrap", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--labels", type=int)
    g.add_argument("--patch", type=_int_list, help="patch side(s), comma-separated")
    g.add_argument("--k", type=_int_list, help="k value(s), comma-separated")
    g.add_argument("--budget", choices=[m.value for m in BudgetMode])
    g.add_argument("--analyzer", type=_analyzers,
                   help="costcert, strategy1, strategy2 or all")
    g.add_argument("--votes", type=Path, help="vote file (.jsonl or .csv)")
    g.add_argument("--out", type=Path, help="output path (default stdout)")
    g.add_argument("--seed", type=int)
    g.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="patchcert", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("certify", parents=[common], help="decide k-certification per sample")
    sub.add_parser("mink", parents=[common], help="smallest certifiable k per sample")
    sp = sub.add_parser("sweep", parents=[common], help="accuracy report over patch sizes and k")
    sp.add_argument("--format", choices=["csv", "markdown"], default="csv")
    sub.add_parser("oracle", parents=[common],
                   help="cross-check the analyzers against brute force (small inputs)")
    sy = sub.add_parser("synth", parents=[common], help="write a synthetic vote file")
    sy.add_argument("--profile", choices=PROFILES, required=True)
    sy.add_argument("--count", type=int, default=1)
    rp = sub.add_parser("report", parents=[common], help="re-render a CSV report")
    rp.add_argument("--in", dest="report_in", type=Path, required=True)
    rp.add_argument("--format", choices=["csv", "markdown"], default="markdown")
    return p


def resolve_config(args, profile: str | None = None) -> RunConfig:
    base = RunConfig.from_file(args.config).to_dict() if args.config else {}
    if profile in NATIVE_CONFIGS and not args.config and args.width is None:
        base = {**NATIVE_CONFIGS[profile], **base}
    for flag, key in _GEOMETRY_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            base[key] = value
    return RunConfig.from_dict(base)


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="") if path else sys.stdout


def _require_votes(args, config):
    if args.votes is None:
        raise _UsageError("--votes is required")
    return load_votes(args.votes, config)


class _UsageError(Exception):
    pass


def cmd_certify(args, config):
    data = _require_votes(args, config)
    out = _open_out(args.out)
    try:
        for side in config.patch_sides:
            patch = PatchSpec(side)
            for analyzer in config.analyzers:
                for k in config.k_values:
                    for s in data:
                        o = certify(analyzer, s, data.scheme, patch, k, data.num_labels,
                                    config.budget_mode)
                        rec = {"id": s.sample_id, "analyzer": analyzer.value,
                               "patch_side": side, "k": k, "certified": o.certified,
                               "mink": o.mink}
                        out.write(json.dumps(rec) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_mink(args, config):
    data = _require_votes(args, config)
    ranks = data.true_label_ranks()
    out = _open_out(args.out)
    try:
        for side in config.patch_sides:
            for analyzer in config.analyzers:
                minks = dataset_minks(data, analyzer, PatchSpec(side), config.budget_mode,
                                      ranks=ranks)
                for s, m in zip(data, minks):
                    rec = {"id": s.sample_id, "analyzer": analyzer.value,
                           "patch_side": side, "mink": int(m)}
                    out.write(json.dumps(rec) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_sweep(args, config):
    data = _require_votes(args, config)
    report = sweep(data, config.analyzers, config.patch_sides, config.k_values,
                   config.budget_mode)
    _write(args.out, emit_report(report, args.format))
    return EXIT_OK


def cmd_oracle(args, config):
    """Check every (sample, region, k): tie cost vs brute force, and exactness
    of the per-region decision against exhaustive attack enumeration."""
    data = _require_votes(args, config)
    L = data.num_labels
    checked = mismatches = 0
    out = _open_out(args.out)
    try:
        for side in config.patch_sides:
            for region in build_patch_regions(data.scheme, PatchSpec(side)):
                for s in data:
                    clean = clean_level(s, region, data.scheme, L)
                    for k in config.k_values:
                        if k >= L:
                            continue
                        cost = smallest_tie_cost(clean, s.true_label, k, L)
                        brute = oracle_min_push_cost(clean, s.true_label, k, L)
                        feasible = attack_feasible_at(clean, s.true_label, k,
                                                      clean.overlap_count, L)
                        ok = cost == brute and (cost > clean.overlap_count) == (not feasible)
                        checked += 1
                        if not ok:
                            mismatches += 1
                            out.write(json.dumps({
                                "id": s.sample_id, "patch_side": side,
                                "region": [region.col_start, region.col_end], "k": k,
                                "tie_cost": repr(cost), "oracle_cost": repr(brute),
                                "attack_feasible": feasible,
                            }) + "\n")
        out.write(json.dumps({"checked": checked, "mismatches": mismatches}) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK if mismatches == 0 else EXIT_ORACLE_MISMATCH


def cmd_synth(args, config):
    data = gen_synthetic(args.profile, config, config.seed, args.count)
    if args.out:
        save_votes(data, args.out)
    else:
        for s in data:
            sys.stdout.write(json.dumps({"id": s.sample_id, "true_label": s.true_label,
                                         "mutant_labels": s.mutant_labels.tolist()},
                                        separators=(",", ":")) + "\n")
    return EXIT_OK


def cmd_report(args, config):
    report = parse_report(args.report_in.read_text(encoding="utf-8"))
    _write(args.out, emit_report(report, args.format))
    return EXIT_OK


def _write(path, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


COMMANDS = {
    "certify": cmd_certify, "mink": cmd_mink, "sweep": cmd_sweep,
    "oracle": cmd_oracle, "synth": cmd_synth, "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        config = resolve_config(args, getattr(args, "profile", None))
        return COMMANDS[args.command](args, config)
    except OracleTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_SIZE
    except (VoteDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (_UsageError, InvalidKError, InvalidPatchError, InvalidSchemeError,
            UnknownProfileError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
