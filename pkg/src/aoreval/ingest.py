"""Trajectory parsing, dataset manifests and frame alignment.

Rect files hold one ``x,y,w,h`` frame per line; quad files hold eight
corner coordinates per line (VOT style) and fall back to rectangles on
four-value lines. Separators may be commas, tabs or runs of spaces, mixed
freely. A frame with no valid annotation is written as ``absent``, as all
``NaN`` values, or as all zeros; every such line parses to :data:`ABSENT`.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import yaml

from .errors import AlignmentError, GeometryError, ManifestError, ParseError
from .geometry import BoundingBox, QuadAnnotation

logger = logging.getLogger(__name__)

_SPLIT = re.compile(r"[,\t ]+")

DEFAULT_MISMATCH_TOLERANCE = 0.05
FORMATS = ("rect", "quad")


class _Absent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABSENT"

    def __reduce__(self):
        return (_Absent, ())


ABSENT = _Absent()

FrameAnnotation = Union[BoundingBox, QuadAnnotation, _Absent]


def is_absent(frame) -> bool:
    return frame is ABSENT


@dataclass(frozen=True)
class Trajectory:
    sequence_name: str
    frames: Tuple[FrameAnnotation, ...]
    source: str = "<memory>"

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise ParseError(0, "trajectory has no frames", self.source)

    def __len__(self):
        return len(self.frames)


@dataclass(frozen=True)
class SequenceEntry:
    name: str
    gt: Path
    format: str = "rect"


@dataclass(frozen=True)
class TrackerEntry:
    name: str
    results_dir: Path

    def result_path(self, sequence: str) -> Path:
        return self.results_dir / f"{sequence}.txt"


@dataclass(frozen=True)
class DatasetManifest:
    dataset_name: str
    sequences: Tuple[SequenceEntry, ...]
    trackers: Tuple[TrackerEntry, ...] = ()
    source: str = "<memory>"

    @property
    def sequence_names(self):
        return [s.name for s in self.sequences]

    def sequence(self, name: str) -> SequenceEntry:
        for s in self.sequences:
            if s.name == name:
                return s
        raise ManifestError(f"unknown sequence {name!r}")

    def tracker(self, name: str) -> TrackerEntry:
        for t in self.trackers:
            if t.name == name:
                return t
        raise ManifestError(f"unknown tracker {name!r}")


@dataclass(frozen=True)
class AlignedPair:
    sequence_name: str
    frames: Tuple[Tuple[FrameAnnotation, FrameAnnotation], ...]
    warnings: Tuple[str, ...] = field(default=())

    @property
    def evaluated_count(self) -> int:
        return sum(1 for g, p in self.frames if g is not ABSENT and p is not ABSENT)

    def __len__(self):
        return len(self.frames)


def _decode(text) -> str:
    if isinstance(text, (bytes, bytearray)):
        return text.decode("utf-8")
    return text


def _parse_values(tokens, lineno, source):
    values = []
    for tok in tokens:
        try:
            values.append(float(tok))
        except ValueError:
            raise ParseError(lineno, f"not a number: {tok!r}", source) from None
    return values


def _is_absent_values(values) -> bool:
    return all(math.isnan(v) for v in values) or all(v == 0.0 for v in values)


def _parse_line(line, lineno, source, allow_quad):
    tokens = [t for t in _SPLIT.split(line.strip()) if t]
    if len(tokens) == 1 and tokens[0].lower() == "absent":
        return ABSENT
    arities = (4, 8) if allow_quad else (4,)
    if len(tokens) not in arities:
        expected = " or ".join(str(a) for a in arities)
        raise ParseError(lineno, f"expected {expected} values, got {len(tokens)}", source)
    values = _parse_values(tokens, lineno, source)
    if _is_absent_values(values):
        return ABSENT
    if not all(math.isfinite(v) for v in values):
        raise ParseError(lineno, "partially missing or infinite values", source)
    if allow_quad and len(values) == 4 and (values[2] <= 0 or values[3] <= 0):
        # in polygon files a flat 4-tuple is a truncated quad, not a box
        raise ParseError(lineno, "4-value line with zero width or height", source)
    try:
        if len(values) == 4:
            return BoundingBox(*values)
        return QuadAnnotation.from_flat(values)
    except GeometryError as exc:
        if len(values) == 8:
            raise GeometryError(f"{source}:{lineno}: {exc}") from exc
        raise ParseError(lineno, str(exc), source) from exc


def _parse(text, sequence_name, source, allow_quad) -> Trajectory:
    frames = []
    for lineno, line in enumerate(_decode(text).splitlines(), start=1):
        if not line.strip():
            continue
        frames.append(_parse_line(line, lineno, source, allow_quad))
    if not frames:
        raise ParseError(0, "file contains no frames", source)
    return Trajectory(sequence_name, tuple(frames), source)


def parse_rect_file(text, sequence_name: str = "", source: str = "<memory>") -> Trajectory:
    """Parse an OTB-style ``x,y,w,h`` trajectory."""
    return _parse(text, sequence_name, source, allow_quad=False)


def parse_quad_file(text, sequence_name: str = "", source: str = "<memory>") -> Trajectory:
    """Parse a VOT-style polygon trajectory (8 values per line, or 4)."""
    return _parse(text, sequence_name, source, allow_quad=True)


def read_trajectory(path, sequence_name: str, fmt: str = "rect") -> Trajectory:
    path = Path(path)
    parser = parse_quad_file if fmt == "quad" else parse_rect_file
    return parser(path.read_bytes(), sequence_name, str(path))


def format_trajectory(traj: Trajectory) -> str:
    """Serialize a trajectory so that re-parsing yields identical frames."""
    lines = []
    for frame in traj.frames:
        if frame is ABSENT:
            lines.append("absent")
        elif isinstance(frame, QuadAnnotation):
            lines.append(",".join(repr(v) for v in frame.flat()))
        else:
            lines.append(",".join(repr(v) for v in frame.as_tuple()))
    return "\n".join(lines) + "\n"


def _require(node, key, where):
    if not isinstance(node, dict) or key not in node:
        raise ManifestError(f"{where}: missing key {key!r}")
    return node[key]


def load_manifest(text, base_dir=".", source: str = "<memory>") -> DatasetManifest:
    """Parse a YAML (or JSON) manifest; relative paths resolve against ``base_dir``.

    Every ground-truth file and every tracker result file must exist.
    """
    try:
        doc = yaml.safe_load(_decode(text))
    except yaml.YAMLError as exc:
        raise ManifestError(f"{source}: malformed manifest: {exc}") from exc
    base = Path(base_dir)
    name = _require(doc, "dataset_name", source)
    raw_seqs = _require(doc, "sequences", source)
    if not isinstance(raw_seqs, list) or not raw_seqs:
        raise ManifestError(f"{source}: 'sequences' must be a non-empty list")

    sequences: List[SequenceEntry] = []
    seen = set()
    for i, item in enumerate(raw_seqs):
        where = f"{source}: sequences[{i}]"
        seq_name = str(_require(item, "name", where))
        if seq_name in seen:
            raise ManifestError(f"{where}: duplicate sequence name {seq_name!r}")
        seen.add(seq_name)
        fmt = item.get("format", "rect")
        if fmt not in FORMATS:
            raise ManifestError(f"{where}: format must be one of {FORMATS}, got {fmt!r}")
        gt = base / str(_require(item, "gt", where))
        if not gt.is_file():
            raise ManifestError(f"{where}: ground-truth file not found: {gt}")
        sequences.append(SequenceEntry(seq_name, gt, fmt))

    trackers: List[TrackerEntry] = []
    tracker_names = set()
    for i, item in enumerate(doc.get("trackers") or []):
        where = f"{source}: trackers[{i}]"
        tname = str(_require(item, "name", where))
        if tname in tracker_names:
            raise ManifestError(f"{where}: duplicate tracker name {tname!r}")
        tracker_names.add(tname)
        entry = TrackerEntry(tname, base / str(_require(item, "results_dir", where)))
        for seq in sequences:
            path = entry.result_path(seq.name)
            if not path.is_file():
                raise ManifestError(f"{where}: result file not found: {path}")
        trackers.append(entry)

    return DatasetManifest(str(name), tuple(sequences), tuple(trackers), source)


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    return load_manifest(data, path.parent, str(path))


def align(
    gt: Trajectory, pred: Trajectory, tolerance: float = DEFAULT_MISMATCH_TOLERANCE
) -> AlignedPair:
    """Pair frames index by index.

    A length difference of at most ``tolerance`` times the ground-truth
    length is absorbed by dropping the tail of the longer trajectory;
    anything larger raises :class:`AlignmentError`.
    """
    if gt.sequence_name and pred.sequence_name and gt.sequence_name != pred.sequence_name:
        raise AlignmentError(
            f"sequence mismatch: {gt.sequence_name!r} vs {pred.sequence_name!r}"
        )
    warnings = []
    n_gt, n_pred = len(gt), len(pred)
    if n_gt != n_pred:
        diff = abs(n_gt - n_pred)
        if diff > tolerance * n_gt:
            raise AlignmentError(
                f"{gt.sequence_name}: {pred.source} has {n_pred} frames, "
                f"{gt.source} has {n_gt} (mismatch {diff / n_gt:.1%} exceeds "
                f"{tolerance:.0%})"
            )
        msg = (
            f"{gt.sequence_name}: length mismatch {n_gt} (gt) vs {n_pred} (pred), "
            f"truncated to {min(n_gt, n_pred)}"
        )
        logger.warning(msg)
        warnings.append(msg)
    pairs = tuple(zip(gt.frames, pred.frames))
    return AlignedPair(gt.sequence_name or pred.sequence_name, pairs, tuple(warnings))


def frames_from_boxes(boxes: Sequence[Sequence[float]]) -> Tuple[FrameAnnotation, ...]:
    """Build frames from raw ``x,y,w,h`` rows; NaN or all-zero rows become ABSENT."""
    out = []
    for row in boxes:
        row = [float(v) for v in row]
        out.append(ABSENT if _is_absent_values(row) else BoundingBox(*row))
    return tuple(out)
