"""Tracker evaluation by average overlap ratio (AOR), rank lists and tracker distance."""

from .errors import AorEvalError
from .geometry import BoundingBox, QuadAnnotation, center_error, quad_iou, quad_to_rect, rect_iou
from .ingest import (
    ABSENT,
    AlignedPair,
    DatasetManifest,
    Trajectory,
    align,
    load_manifest,
    parse_quad_file,
    parse_rect_file,
    read_manifest,
)
from .metrics import (
    AggregateScore,
    OverlapSeries,
    SequenceScore,
    aggregate,
    aor,
    auc_aor_gap,
    overlap_series,
    precision_curve,
    sorted_overlap_bars,
    success_curve,
)
from .ranking import RankList, TdMatrix, count_inversions, rank_list, td_matrix, to_permutation, tracker_distance
from .report import EvalConfig, compare_annotations, evaluate, write_report

__version__ = "0.1.0"
