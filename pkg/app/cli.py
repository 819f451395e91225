"""
stenobench command line.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, List, Optional

from app.core.errors import BenchError, UsageError
from app.core.metrics import ScoreMode
from app.core.presets import BASELINE, known_names
from app.core.stats import PairOn, WilcoxonMode
from app.core.textdata import FitMode
from models.config import BenchConfig, SplitView
from models.experiment import (
    ExperimentSpec,
    cmd_augment,
    cmd_compare,
    cmd_preview,
    cmd_score,
    cmd_validate,
)

logger = logging.getLogger(__name__)


class BenchArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(UsageError.exit_code, f"{self.prog}: error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    common = BenchArgumentParser(add_help=False)
    common.add_argument("--manifest", type=Path, help="Dataset manifest (TSV: image, fold, split, text)")
    common.add_argument("--seed", type=int, help="Master seed (env BENCH_SEED, default 0)")
    common.add_argument("--prob", type=float, help="Augmentation probability per image (default 0.5)")
    common.add_argument("--out", type=Path, dest="out_dir", help="Output directory (default data/processed)")
    common.add_argument("--alpha", type=float, help="Significance level after correction (default 0.01)")
    common.add_argument("--n-comparisons", type=int, dest="n_comparisons",
                        help="Bonferroni comparison count (default 22)")
    common.add_argument("--pair-on", choices=[p.value for p in PairOn], default=PairOn.RUN.value,
                        help="Pairing unit for the signed-rank test")
    common.add_argument("--split", choices=[s.value for s in SplitView], default=SplitView.POOLED.value,
                        help="Dataset split view")
    common.add_argument("--epoch", type=int, default=0, help="Epoch index for the augmentation coin")
    common.add_argument("--workers", type=int, help="Worker processes for augmentation (default 1)")
    common.add_argument("--fit", choices=[f.value for f in FitMode], default=FitMode.ERROR.value,
                        help="Too-wide lines: fail (error) or downscale (shrink)")
    common.add_argument("--luma", action="store_true", help="Accept colour images via luma conversion")
    common.add_argument("--invert", action="store_true", help="Invert dark-on-light scans on read")
    common.add_argument("--alphabet", type=Path, help="Alphabet file, one symbol per line")
    common.add_argument("--custom-preset", type=Path, action="append", dest="custom_presets", default=[],
                        help="KEY=value preset file (repeatable)")
    common.add_argument("--strict", action="store_true", help="Treat missing predictions or layout deviations as errors")
    common.add_argument("--json", action="store_true", help="Machine-readable output and errors")
    common.add_argument("--log-level", default=None, help="Logging level (env BENCH_LOG_LEVEL, default INFO)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = BenchArgumentParser(
        prog="stenobench",
        description="Deterministic line-image augmentation and recognition evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    augment = sub.add_parser("augment", parents=[common], help="Augment and preprocess a manifest")
    augment.add_argument("--preset", action="append", dest="presets",
                         help=f"Preset name (repeatable; default all). Known: {', '.join(known_names())}")

    preview = sub.add_parser("preview", parents=[common], help="Render a preview contact sheet")
    preview.add_argument("--preset", required=True)
    preview.add_argument("--image", type=Path, required=True, help="Line image (PNG)")
    preview.add_argument("--count", type=int, default=5, help="Number of tiles")

    score = sub.add_parser("score", parents=[common], help="Score predictions against a manifest")
    score.add_argument("--predictions", type=Path, required=True,
                       help="TSV (record_id<TAB>hypothesis), .logits container or directory of .logits files")
    score.add_argument("--config", default=BASELINE, help="Config name written to the results CSV")
    score.add_argument("--fold", type=int, default=0)
    score.add_argument("--run", type=int, default=0)
    score.add_argument("--score-mode", choices=[m.value for m in ScoreMode], default=ScoreMode.MICRO.value,
                       help="micro pools edit counts, macro averages per-line rates")

    compare = sub.add_parser("compare", parents=[common], help="Compare configs against the baseline")
    compare.add_argument("results", type=Path, nargs="+", help="Results CSVs (config,fold,run,split,cer,wer)")
    compare.add_argument("--wilcoxon", choices=[m.value for m in WilcoxonMode], default=WilcoxonMode.AUTO.value)

    validate = sub.add_parser("validate", parents=[common], help="Check a manifest against the canonical layout")
    validate.add_argument("--no-file-check", action="store_true", help="Do not check image files exist")
    return parser


def _spec(args) -> ExperimentSpec:
    return ExperimentSpec.from_config(
        manifest=args.manifest,
        presets=getattr(args, "presets", None) if args.command == "augment" else [],
        seed=args.seed,
        prob=args.prob,
        out_dir=args.out_dir,
        alpha=args.alpha,
        n_comparisons=args.n_comparisons,
        epoch=args.epoch,
        workers=args.workers,
        fit=FitMode(args.fit),
        pair_on=PairOn(args.pair_on),
        split=SplitView(args.split),
        wilcoxon_mode=WilcoxonMode(getattr(args, "wilcoxon", WilcoxonMode.AUTO.value)),
        score_mode=ScoreMode(getattr(args, "score_mode", ScoreMode.MICRO.value)),
        luma=args.luma,
        invert=args.invert,
        strict=args.strict,
        alphabet=args.alphabet,
        custom_presets=args.custom_presets,
    )


def _emit(data: Any, as_json: bool, text: Optional[str] = None):
    if as_json:
        print(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False, default=str))
    else:
        print(text if text is not None else data)


def run(args) -> int:
    spec = _spec(args)
    if args.command == "augment":
        summary = cmd_augment(spec)
        _emit(summary, args.json, "\n".join(
            f"{p}: {r['processed']} written, {r['augmented']} augmented" for p, r in summary.items()))
    elif args.command == "preview":
        path = cmd_preview(spec, args.image, args.preset, args.count)
        _emit({"preview": str(path)}, args.json, str(path))
    elif args.command == "score":
        result = cmd_score(spec, args.predictions, args.config, args.fold, args.run)
        _emit(result, args.json, "\n".join(
            f"{r['split']}: CER {r['cer']:.4f}  WER {r['wer']:.4f}" for r in result["results"]))
    elif args.command == "compare":
        result = cmd_compare(spec, args.results)
        report = result.pop("report")
        _emit({**result, "verdicts": [v.to_row() for v in report.verdicts]}, args.json, report.text)
    elif args.command == "validate":
        report = cmd_validate(spec, check_files=not args.no_file_check)
        _emit(report.to_dict(), args.json, "\n".join([report.verdict, *report.deviations,
                                                      *(m for _, m in report.violations),
                                                      *(f"missing: {p}" for _, p in report.missing_files)]))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    level = (args.log_level or os.getenv("BENCH_LOG_LEVEL", BenchConfig.DEFAULT_LOG_LEVEL)).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return run(args)
    except BenchError as e:
        logger.error(str(e))
        if args.json:
            print(json.dumps({"error": type(e).__name__, "message": str(e), "exit_code": e.exit_code}),
                  file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Internal error: {e}", exc_info=True)
        if args.json:
            print(json.dumps({"error": type(e).__name__, "message": str(e), "exit_code": 3}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
