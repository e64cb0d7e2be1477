"""Evaluation pipeline and report writers.

Tables are written as CSV rounded to three decimals; ``report.txt`` is a
JSON document carrying the full-precision values and the configuration
that produced them. Every file starts with its schema version and the
configuration hash, and the output is byte-identical across reruns.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import ConfigError, TaskSetMismatch
from .ingest import DatasetManifest, align, read_manifest, read_trajectory
from .metrics import (
    ABSENT_POLICIES,
    AUC_METHODS,
    OTB_PRECISION_MAX,
    OTB_SUCCESS_THRESHOLDS,
    OVERLAP_MODES,
    PRECISION_REPORT_THRESHOLD,
    AggregateScore,
    OverlapSeries,
    PrecisionCurve,
    SequenceScore,
    SuccessCurve,
    aggregate,
    aor,
    center_errors,
    mean,
    overlap_series,
    precision_curve,
    sorted_overlap_bars,
    success_curve,
)
from .ranking import NORMALIZERS, RankList, TdMatrix, rank_list, td_matrix

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "aoreval-report/1"
OUTPUT_FORMATS = ("csv", "text")


@dataclass(frozen=True)
class EvalConfig:
    manifest: str
    out: str = "report"
    absent_policy: str = "skip"
    strict_success: bool = True
    success_thresholds: int = OTB_SUCCESS_THRESHOLDS
    precision_max: int = OTB_PRECISION_MAX
    auc_method: str = "mean"
    skip_first_frame: bool = False
    normalizer: str = "paper"
    mode: str = "quad-exact"
    top: Optional[int] = None
    bottom: Optional[int] = None
    formats: Tuple[str, ...] = OUTPUT_FORMATS
    manifest_b: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "formats", tuple(self.formats))
        choices = {
            "absent_policy": ABSENT_POLICIES,
            "auc_method": AUC_METHODS,
            "normalizer": NORMALIZERS,
            "mode": OVERLAP_MODES,
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.success_thresholds < 2:
            raise ConfigError("success_thresholds must be at least 2")
        if self.precision_max < 0:
            raise ConfigError("precision_max must be non-negative")
        for name in ("top", "bottom"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{name} must be non-negative")
        bad = [f for f in self.formats if f not in OUTPUT_FORMATS]
        if bad or not self.formats:
            raise ConfigError(f"formats must be a non-empty subset of {OUTPUT_FORMATS}")

    def provenance(self) -> dict:
        # output location is not part of what was computed
        d = asdict(self)
        d.pop("out")
        d["formats"] = list(self.formats)
        return d

    @property
    def hash(self) -> str:
        blob = json.dumps(self.provenance(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class PlotData:
    success: SuccessCurve
    precision: Optional[PrecisionCurve]
    bars: Tuple[float, ...]


@dataclass
class Report:
    config: EvalConfig
    dataset_name: str
    aggregates: List[AggregateScore] = field(default_factory=list)
    tracker_precision: Dict[str, float] = field(default_factory=dict)
    sequence_scores: List[SequenceScore] = field(default_factory=list)
    skipped: Dict[Tuple[str, str], int] = field(default_factory=dict)
    sequence_precision: Dict[Tuple[str, str], float] = field(default_factory=dict)
    rank_lists: List[RankList] = field(default_factory=list)
    td: Optional[TdMatrix] = None
    comparison: Optional[dict] = None
    plots: Dict[Tuple[str, str], PlotData] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


@dataclass
class _PairResult:
    tracker: str
    sequence: str
    series: OverlapSeries
    score: SequenceScore
    errors: Tuple[float, ...]
    plot: PlotData
    warnings: Tuple[str, ...]


def _evaluate_pair(config: EvalConfig, manifest: DatasetManifest, tracker: str, seq) -> _PairResult:
    gt = read_trajectory(seq.gt, seq.name, seq.format)
    result_path = manifest.tracker(tracker).result_path(seq.name)
    pred = read_trajectory(result_path, seq.name, seq.format)
    pair = align(gt, pred)
    series = overlap_series(
        pair, config.absent_policy, tracker, config.mode, config.skip_first_frame
    )
    errors = center_errors(pair, config.skip_first_frame)
    precision = (
        precision_curve(pair, config.precision_max, config.skip_first_frame) if errors else None
    )
    plot = PlotData(
        success_curve(series, config.success_thresholds, config.strict_success, config.auc_method),
        precision,
        sorted_overlap_bars(series),
    )
    return _PairResult(tracker, seq.name, series, aor(series), errors, plot, pair.warnings)


def _fraction_within(errors, threshold) -> float:
    return sum(1 for e in errors if e <= threshold) / len(errors) if errors else 0.0


def evaluate(config: EvalConfig, max_workers: Optional[int] = None) -> Report:
    """Score every tracker of the manifest on every sequence."""
    manifest = read_manifest(config.manifest)
    if not manifest.trackers:
        raise ConfigError(f"{config.manifest}: no trackers listed")
    jobs = [
        (t.name, seq)
        for t in sorted(manifest.trackers, key=lambda t: t.name)
        for seq in sorted(manifest.sequences, key=lambda s: s.name)
    ]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(lambda job: _evaluate_pair(config, manifest, *job), jobs))

    report = Report(config, manifest.dataset_name)
    by_tracker: Dict[str, List[_PairResult]] = {}
    for r in results:
        by_tracker.setdefault(r.tracker, []).append(r)
        report.sequence_scores.append(r.score)
        report.skipped[(r.tracker, r.sequence)] = r.series.skipped
        report.sequence_precision[(r.tracker, r.sequence)] = _fraction_within(
            r.errors, PRECISION_REPORT_THRESHOLD
        )
        report.plots[(r.tracker, r.sequence)] = r.plot
        report.warnings.extend(r.warnings)

    for tracker, rs in by_tracker.items():
        report.aggregates.append(
            aggregate(
                [r.score for r in rs],
                [r.series for r in rs],
                OTB_SUCCESS_THRESHOLDS,
                config.strict_success,
            )
        )
        errors = [e for r in rs for e in r.errors]
        report.tracker_precision[tracker] = _fraction_within(errors, PRECISION_REPORT_THRESHOLD)
        report.rank_lists.append(rank_list([r.score for r in rs], manifest.sequence_names))

    if len(report.rank_lists) >= 2 and len(manifest.sequences) >= 2:
        report.td = td_matrix(report.rank_lists, config.normalizer)
    elif len(report.rank_lists) >= 2:
        report.warnings.append("tracker distance needs at least 2 sequences; TD matrix omitted")
    return report


def compare_annotations(config: EvalConfig) -> Report:
    """AOR between two annotation sets of the same sequences.

    ``config.manifest`` supplies set A (treated as ground truth) and
    ``config.manifest_b`` supplies set B.
    """
    if not config.manifest_b:
        raise ConfigError("compare-annotations needs a second manifest")
    ma = read_manifest(config.manifest)
    mb = read_manifest(config.manifest_b)
    names_a, names_b = set(ma.sequence_names), set(mb.sequence_names)
    if names_a != names_b:
        raise TaskSetMismatch(
            "annotation sets cover different sequences: "
            f"only in A {sorted(names_a - names_b)}, only in B {sorted(names_b - names_a)}"
        )
    report = Report(config, f"{ma.dataset_name} vs {mb.dataset_name}")
    rows = []
    series_all = []
    for name in sorted(names_a):
        sa, sb = ma.sequence(name), mb.sequence(name)
        pair = align(read_trajectory(sa.gt, name, sa.format), read_trajectory(sb.gt, name, sb.format))
        report.warnings.extend(pair.warnings)
        series = overlap_series(
            pair, config.absent_policy, "annotations", config.mode, config.skip_first_frame
        )
        score = aor(series)
        series_all.append(series)
        rows.append(
            {
                "sequence": name,
                "aor": score.aor,
                "frames": score.frame_count,
                "skipped": series.skipped,
            }
        )
    pooled = [v for s in series_all for v in s.values]
    report.comparison = {
        "set_a": str(config.manifest),
        "set_b": str(config.manifest_b),
        "mode": config.mode,
        "sequences": rows,
        "pooled_aor": mean(pooled),
        "macro_aor": mean([r["aor"] for r in rows]),
        "frame_count": len(pooled),
    }
    return report


def _header(config: EvalConfig, kind: str) -> str:
    return f"# schema: {SCHEMA_VERSION} {kind}\n# config_hash: {config.hash}\n"


def _csv_text(config: EvalConfig, kind: str, header, rows) -> str:
    buf = io.StringIO()
    buf.write(_header(config, kind))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _r3(value: float) -> str:
    return f"{value:.3f}"


def _rank_rows(lists: List[RankList], top: Optional[int], bottom: Optional[int]):
    n = max(r.n for r in lists)
    if top is None and bottom is None:
        indices = list(range(n))
    else:
        head = list(range(min(top or 0, n)))
        tail = [i for i in range(max(n - (bottom or 0), 0), n) if i not in head]
        indices = head + ([None] if tail and head and tail[0] > head[-1] + 1 else []) + tail
    rows = []
    for i in indices:
        if i is None:
            rows.append(["..."] + ["...", "..."] * len(lists))
            continue
        row = [i + 1]
        for r in lists:
            row += [r.tasks[i], _r3(r.scores[i])] if i < r.n else ["", ""]
        rows.append(row)
    return rows


def write_plot_files(config: EvalConfig, out: Path, tracker: str, sequence: str, plot: PlotData):
    base = out / "plots" / tracker
    paths = [
        _write(
            base / f"{sequence}.success.csv",
            _csv_text(
                config,
                "success",
                ["threshold", "success_rate"],
                [[repr(t), repr(s)] for t, s in zip(plot.success.thresholds, plot.success.success_rates)],
            ),
        ),
        _write(
            base / f"{sequence}.bars.csv",
            _csv_text(
                config,
                "bars",
                ["rank", "overlap"],
                [[i, repr(v)] for i, v in enumerate(plot.bars, start=1)],
            ),
        ),
    ]
    if plot.precision is not None:
        paths.insert(
            1,
            _write(
                base / f"{sequence}.precision.csv",
                _csv_text(
                    config,
                    "precision",
                    ["threshold", "precision"],
                    [
                        [repr(t), repr(p)]
                        for t, p in zip(plot.precision.thresholds, plot.precision.precisions)
                    ],
                ),
            ),
        )
    return paths


def _report_document(report: Report) -> dict:
    config = report.config
    doc = {
        "schema": SCHEMA_VERSION,
        "config_hash": config.hash,
        "config": config.provenance(),
        "dataset": report.dataset_name,
        "warnings": list(report.warnings),
    }
    if report.comparison is not None:
        doc["annotation_comparison"] = report.comparison
        return doc
    n = OTB_SUCCESS_THRESHOLDS
    doc["aggregates"] = [
        dict(
            asdict(a),
            precision_at_20=report.tracker_precision[a.tracker_name],
            auc_gap=a.auc_otb - a.pooled_aor,
            auc_gap_bound=1.0 / (n - 1) + 1.0 / a.frame_count,
        )
        for a in report.aggregates
    ]
    doc["sequence_scores"] = [
        dict(
            asdict(s),
            skipped=report.skipped[(s.tracker_name, s.sequence_name)],
            precision_at_20=report.sequence_precision[(s.tracker_name, s.sequence_name)],
        )
        for s in report.sequence_scores
    ]
    doc["rank_lists"] = [
        {"tracker": r.tracker_name, "tasks": list(r.tasks), "scores": list(r.scores), "ties": r.has_ties}
        for r in report.rank_lists
    ]
    doc["rank_ties"] = [r.tracker_name for r in report.rank_lists if r.has_ties]
    if report.td is not None:
        doc["td_matrix"] = {
            "normalizer": config.normalizer,
            "trackers": list(report.td.trackers),
            "values": [list(row) for row in report.td.values],
        }
    return doc


def write_report(report: Report, out=None) -> List[Path]:
    """Write all report files under ``out`` (default ``config.out``)."""
    config = report.config
    out = Path(out if out is not None else config.out)
    written: List[Path] = []
    if "csv" in config.formats:
        if report.comparison is not None:
            comp = report.comparison
            rows = [[r["sequence"], _r3(r["aor"]), r["frames"], r["skipped"]] for r in comp["sequences"]]
            rows.append(["*pooled*", _r3(comp["pooled_aor"]), comp["frame_count"], ""])
            rows.append(["*macro*", _r3(comp["macro_aor"]), len(comp["sequences"]), ""])
            written.append(
                _write(
                    out / "annotation_comparison.csv",
                    _csv_text(config, "annotation_comparison", ["sequence", "aor", "frames", "skipped"], rows),
                )
            )
        else:
            written += _write_evaluation_tables(report, out)
    if "text" in config.formats:
        text = json.dumps(_report_document(report), indent=2, sort_keys=True) + "\n"
        written.append(_write(out / "report.txt", text))
    return written


def _write_evaluation_tables(report: Report, out: Path) -> List[Path]:
    config = report.config
    written = []
    agg_rows = [
        [
            a.tracker_name,
            a.sequence_count,
            a.frame_count,
            _r3(a.pooled_aor),
            _r3(a.macro_aor),
            _r3(a.aor_variance),
            _r3(a.auc_otb),
            _r3(report.tracker_precision[a.tracker_name]),
        ]
        for a in report.aggregates
    ]
    written.append(
        _write(
            out / "aggregate.csv",
            _csv_text(
                config,
                "aggregate",
                ["tracker", "sequences", "frames", "pooled_aor", "macro_aor", "aor_variance", "auc_otb", "precision_at_20"],
                agg_rows,
            ),
        )
    )
    ranks = {
        (r.tracker_name, task): i for r in report.rank_lists for i, task in enumerate(r.tasks, start=1)
    }
    seq_rows = [
        [
            s.tracker_name,
            s.sequence_name,
            _r3(s.aor),
            s.frame_count,
            report.skipped[(s.tracker_name, s.sequence_name)],
            _r3(report.sequence_precision[(s.tracker_name, s.sequence_name)]),
            ranks[(s.tracker_name, s.sequence_name)],
        ]
        for s in report.sequence_scores
    ]
    written.append(
        _write(
            out / "sequence_scores.csv",
            _csv_text(
                config,
                "sequence_scores",
                ["tracker", "sequence", "aor", "frames", "skipped", "precision_at_20", "rank"],
                seq_rows,
            ),
        )
    )
    header = ["rank"]
    for r in report.rank_lists:
        header += [r.tracker_name, "aor"]
    written.append(
        _write(
            out / "rank_lists.csv",
            _csv_text(config, "rank_lists", header, _rank_rows(report.rank_lists, config.top, config.bottom)),
        )
    )
    if report.td is not None:
        td = report.td
        written.append(
            _write(
                out / "td_matrix.csv",
                _csv_text(
                    config,
                    "td_matrix",
                    [""] + list(td.trackers),
                    [[name] + [_r3(v) for v in row] for name, row in zip(td.trackers, td.values)],
                ),
            )
        )
    for (tracker, sequence), plot in sorted(report.plots.items()):
        written += write_plot_files(config, out, tracker, sequence, plot)
    return written


def cmd_evaluate(config: EvalConfig) -> Report:
    report = evaluate(config)
    write_report(report)
    return report


def cmd_compare_annotations(config: EvalConfig) -> Report:
    report = compare_annotations(config)
    write_report(report)
    return report


def cmd_plotdata(config: EvalConfig, tracker: str, sequence: str) -> List[Path]:
    """Write success, precision and sorted-bar files for one pair."""
    manifest = read_manifest(config.manifest)
    manifest.tracker(tracker)
    seq = manifest.sequence(sequence)
    result = _evaluate_pair(config, manifest, tracker, seq)
    return write_plot_files(config, Path(config.out), tracker, sequence, result.plot)
