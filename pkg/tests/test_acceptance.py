"""Exit criteria for the package; each test reports one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -rA`` to see the summary section.
"""

import itertools
import json
import math
import os
import random
import time
from pathlib import Path

import numpy as np
import pytest

from aoreval.cli import main
from aoreval.geometry import BoundingBox, QuadAnnotation, quad_iou, rect_iou
from aoreval.metrics import OverlapSeries, aor, auc_aor_gap, sorted_overlap_bars
from aoreval.ranking import RankList, count_inversions, tracker_distance
from conftest import FIXTURES, write_manifest
from oracles import (
    brute_inversions,
    brute_inversions_np,
    raster_convex_iou,
    raster_rect_iou,
    random_convex_quad,
)


def test_1_iou_oracle_suite(criterion):
    with criterion(1, "IoU oracle suite (rect 1e-2 @1000^2, quad 1e-3 @2000^2, < 30 s)"):
        start = time.perf_counter()
        rng = np.random.default_rng(1)
        worst_rect = 0.0
        for _ in range(1000):
            a = (*rng.uniform(0, 60, 2), *rng.uniform(1, 50, 2))
            b = (*rng.uniform(0, 60, 2), *rng.uniform(1, 50, 2))
            got = rect_iou(BoundingBox(*a), BoundingBox(*b))
            worst_rect = max(worst_rect, abs(got - raster_rect_iou(a, b, 1000)))
        worst_quad = 0.0
        for _ in range(200):
            pa = random_convex_quad(rng, scale=40)
            pb = random_convex_quad(rng, center=tuple(rng.uniform(-30, 30, 2)), scale=40)
            got = quad_iou(QuadAnnotation(pa), QuadAnnotation(pb))
            worst_quad = max(worst_quad, abs(got - raster_convex_iou(pa, pb, 2000)))
        elapsed = time.perf_counter() - start
        assert worst_rect <= 1e-2, worst_rect
        assert worst_quad <= 1e-3, worst_quad
        assert elapsed < 30, elapsed


def test_2_auc_approximates_aor(criterion):
    with criterion(2, "AUC vs AOR gap (N=10001 <= 2e-4, mean gap non-increasing, adversarial >= 0.02, < 10 s)"):
        start = time.perf_counter()
        rng = np.random.default_rng(2)
        ns = (21, 101, 1001, 10001)
        gaps = np.zeros((100, len(ns)))
        for i in range(100):
            values = rng.uniform(0, 1, rng.integers(50, 2001)).tolist()
            s = OverlapSeries("s", "t", values)
            gaps[i] = [abs(auc_aor_gap(s, n)) for n in ns]
        assert gaps[:, -1].max() <= 2e-4, gaps[:, -1].max()
        mean_gap = gaps.mean(axis=0)
        assert all(a >= b for a, b in zip(mean_gap, mean_gap[1:])), mean_gap
        # every overlap sits between the first two OTB thresholds
        adversarial = OverlapSeries("adv", "t", [0.024] * 100)
        assert abs(auc_aor_gap(adversarial, 21)) >= 0.02
        assert time.perf_counter() - start < 10


def test_3_inversion_count_equivalence(criterion):
    with criterion(3, "merge-sort inversions == O(n^2) oracle; TD(identity)=0, TD(reverse)=0.5 (< 20 s)"):
        start = time.perf_counter()
        cases = 0
        for n in range(1, 9):
            for p in itertools.permutations(range(1, n + 1)):
                assert count_inversions(p) == brute_inversions(p)
                cases += 1
        assert cases == sum(math.factorial(n) for n in range(1, 9))
        rng = random.Random(3)
        for _ in range(500):
            p = list(range(1, rng.randint(2, 1000) + 1))
            rng.shuffle(p)
            assert count_inversions(p) == brute_inversions_np(p)
        tasks = tuple(f"t{i}" for i in range(50))
        ref = RankList("a", tasks, tuple(range(50, 0, -1)))
        rev = RankList("b", tasks[::-1], tuple(range(50, 0, -1)))
        assert tracker_distance(ref, ref) == 0.0
        assert tracker_distance(ref, rev) == 0.5
        assert time.perf_counter() - start < 20


def _six_tracker_fixture(root):
    rng = np.random.default_rng(4)
    sequences, trackers = {}, {}
    gts = {}
    for k in range(12):
        n = int(rng.integers(30, 80))
        x = 100 + np.cumsum(rng.normal(0, 2, n))
        y = 100 + np.cumsum(rng.normal(0, 2, n))
        w = np.full(n, rng.uniform(20, 60))
        h = np.full(n, rng.uniform(20, 60))
        gts[f"seq{k:02d}"] = np.stack([x, y, w, h], 1)
    for name in ["GOTURN", "SiameseFC", "CFNet", "ECO", "STCT", "MDNet"]:
        results = {}
        for seq, gt in gts.items():
            noise = rng.uniform(1, 15)
            pred = gt + rng.normal(0, noise, gt.shape) * [1, 1, 0.3, 0.3]
            pred[:, 2:] = np.maximum(pred[:, 2:], 1)
            results[seq] = "".join(",".join(f"{v:.3f}" for v in row) + "\n" for row in pred)
        trackers[name] = results
    for seq, gt in gts.items():
        sequences[seq] = "".join(",".join(f"{v:.3f}" for v in row) + "\n" for row in gt)
    return write_manifest(root, sequences, trackers, name="six")


def test_4_td_matrix_structure(criterion, tmp_path):
    with criterion(4, "TD matrix on 6 trackers: symmetric, zero diagonal, entries in [0, 0.5]"):
        manifest = _six_tracker_fixture(tmp_path)
        out = tmp_path / "out"
        assert main(["evaluate", "--manifest", str(manifest), "--out", str(out)]) == 0
        td = json.loads((out / "report.txt").read_text())["td_matrix"]
        values = np.array(td["values"])
        assert values.shape == (6, 6)
        assert sorted(td["trackers"]) == sorted(["GOTURN", "SiameseFC", "CFNet", "ECO", "STCT", "MDNet"])
        assert np.all(np.diag(values) == 0.0)
        assert np.array_equal(values, values.T)
        assert values.min() >= 0.0 and values.max() <= 0.5
        assert values[~np.eye(6, dtype=bool)].max() > 0.0


def _shifted_sets(root):
    a, b = {}, {}
    for name, n, side in [("bolt1", 25, 10.0), ("marching", 40, 6.0), ("fish4", 33, 21.0)]:
        la, lb = [], []
        for i in range(n):
            x, y, s = 5.0 + 1.5 * i, 7.0 - 0.5 * i, side * (1 + 0.01 * i)
            la.append(f"{x},{y},{x + s},{y},{x + s},{y + s},{x},{y + s}")
            lb.append(f"{x + s / 2},{y + s / 2},{s},{s}")
        a[name], b[name] = "\n".join(la) + "\n", "\n".join(lb) + "\n"
    return (
        write_manifest(root / "A", a, fmt="quad", name="A"),
        write_manifest(root / "B", b, fmt="quad", name="B"),
    )


def _compare(ma, mb, out, mode="quad-exact"):
    code = main(["compare-annotations", "--manifest", str(ma), "--manifest-b", str(mb),
                 "--out", str(out), "--mode", mode])
    assert code == 0
    return json.loads((out / "report.txt").read_text())["annotation_comparison"]


def test_5_annotation_comparison(criterion, tmp_path):
    with criterion("5a", "compare-annotations: identity -> 1.0, half-side shift -> 1/7 (1e-9)"):
        ma, mb = _shifted_sets(tmp_path)
        same = _compare(ma, ma, tmp_path / "same")
        assert all(abs(r["aor"] - 1.0) <= 1e-9 for r in same["sequences"])
        for mode in ("quad-exact", "rect-envelope"):
            shifted = _compare(ma, mb, tmp_path / mode, mode)
            assert len(shifted["sequences"]) == 3
            assert all(abs(r["aor"] - 1 / 7) <= 1e-9 for r in shifted["sequences"])
            assert abs(shifted["pooled_aor"] - 1 / 7) <= 1e-9
            assert abs(shifted["macro_aor"] - 1 / 7) <= 1e-9


def test_5_vot_annotation_comparison(criterion, tmp_path):
    """Optional: set AOREVAL_VOT2015_MANIFEST and AOREVAL_VOT2016_MANIFEST."""
    with criterion("5b", "VOT2015 vs VOT2016 overall AOR within 0.772 +/- 0.02 (user data)"):
        m15 = os.environ.get("AOREVAL_VOT2015_MANIFEST")
        m16 = os.environ.get("AOREVAL_VOT2016_MANIFEST")
        if not (m15 and m16):
            pytest.skip("VOT2015/VOT2016 manifests not provided")
        result = _compare(m15, m16, tmp_path / "vot")
        assert len(result["sequences"]) == 60
        closest = min(abs(result["pooled_aor"] - 0.772), abs(result["macro_aor"] - 0.772))
        assert closest <= 0.02, (result["pooled_aor"], result["macro_aor"])


def test_6_sorting_invariance(criterion, tmp_path):
    with criterion(6, "mean(sorted bars) == AOR (<= 1e-12) on 1000 series; bar files non-increasing"):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            s = OverlapSeries("s", "t", rng.uniform(0, 1, rng.integers(1, 2000)).tolist())
            bars = OverlapSeries("s", "t", sorted_overlap_bars(s))
            assert abs(aor(bars).aor - aor(s).aor) <= 1e-12
        out = tmp_path / "out"
        assert main(["evaluate", "--manifest", str(FIXTURES / "demo" / "manifest.yaml"), "--out", str(out)]) == 0
        files = sorted((out / "plots").rglob("*.bars.csv"))
        assert len(files) == 6
        for path in files:
            rows = [l.split(",") for l in path.read_text().splitlines()[3:]]
            col = [float(r[1]) for r in rows]
            assert all(a >= b for a, b in zip(col, col[1:])), path


def _tree(root: Path):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_7_end_to_end_determinism(criterion, tmp_path):
    with criterion(7, "two evaluate runs on the bundled fixture are byte-identical (< 5 s)"):
        start = time.perf_counter()
        manifest = str(FIXTURES / "demo" / "manifest.yaml")
        for run in ("run1", "run2"):
            assert main(["evaluate", "--manifest", manifest, "--out", str(tmp_path / run)]) == 0
        elapsed = time.perf_counter() - start
        first, second = _tree(tmp_path / "run1"), _tree(tmp_path / "run2")
        assert len(first) == 4 + 1 + 18
        assert first == second
        assert elapsed < 5, elapsed
