"""Command-line entry point: ``aoreval {evaluate,compare-annotations,plot-data}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import AorEvalError, ConfigError
from .metrics import ABSENT_POLICIES, AUC_METHODS, OVERLAP_MODES
from .ranking import NORMALIZERS
from .report import EvalConfig, cmd_compare_annotations, cmd_evaluate, cmd_plotdata

logger = logging.getLogger("aoreval")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="dataset manifest (YAML or JSON)")
    p.add_argument("--out", default="report", help="output directory (default: %(default)s)")
    p.add_argument("--absent-policy", choices=ABSENT_POLICIES, default="skip")
    p.add_argument("--thresholds", type=int, default=21, help="success-plot threshold count")
    p.add_argument(
        "--strict-success",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="count a frame as a success only if overlap > threshold",
    )
    p.add_argument("--auc", choices=AUC_METHODS, default="mean", dest="auc_method")
    p.add_argument("--skip-first-frame", action="store_true")
    p.add_argument("--mode", choices=OVERLAP_MODES, default="quad-exact")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoreval", description="Average-overlap evaluation of single-object trackers."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="score trackers, rank sequences, compute TD")
    _common(ev)
    ev.add_argument("--normalizer", choices=NORMALIZERS, default="paper")
    ev.add_argument("--top", type=int, default=None, help="rank list rows from the top")
    ev.add_argument("--bottom", type=int, default=None, help="rank list rows from the bottom")

    ca = sub.add_parser("compare-annotations", help="AOR between two annotation sets")
    _common(ca)
    ca.add_argument("--manifest-b", required=True, help="manifest of the second annotation set")

    pd = sub.add_parser("plot-data", help="write plot data for one tracker and sequence")
    _common(pd)
    pd.add_argument("--tracker", required=True)
    pd.add_argument("--sequence", required=True)
    return parser


def _config(args) -> EvalConfig:
    return EvalConfig(
        manifest=args.manifest,
        out=args.out,
        absent_policy=args.absent_policy,
        strict_success=args.strict_success,
        success_thresholds=args.thresholds,
        auc_method=args.auc_method,
        skip_first_frame=args.skip_first_frame,
        mode=args.mode,
        normalizer=getattr(args, "normalizer", "paper"),
        top=getattr(args, "top", None),
        bottom=getattr(args, "bottom", None),
        manifest_b=getattr(args, "manifest_b", None),
    )


def _summary(report) -> None:
    if report.comparison is not None:
        comp = report.comparison
        for row in comp["sequences"]:
            print(f"{row['sequence']:<20} {row['aor']:.3f}")
        print(f"pooled AOR {comp['pooled_aor']:.3f}  macro AOR {comp['macro_aor']:.3f}")
        return
    print(f"{'tracker':<16} {'pooled':>7} {'macro':>7} {'var':>7} {'auc':>7} {'p@20':>7}")
    for a in report.aggregates:
        print(
            f"{a.tracker_name:<16} {a.pooled_aor:7.3f} {a.macro_aor:7.3f} "
            f"{a.aor_variance:7.3f} {a.auc_otb:7.3f} {report.tracker_precision[a.tracker_name]:7.3f}"
        )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        config = _config(args)
        if args.command == "evaluate":
            _summary(cmd_evaluate(config))
        elif args.command == "compare-annotations":
            _summary(cmd_compare_annotations(config))
        else:
            for path in cmd_plotdata(config, args.tracker, args.sequence):
                print(path)
    except ConfigError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except AorEvalError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
