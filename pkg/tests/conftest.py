import contextlib
import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

_criteria = []


@contextlib.contextmanager
def _criterion(number, title):
    try:
        yield
    except BaseException as exc:
        if not isinstance(exc, pytest.skip.Exception):
            _criteria.append((number, "FAIL", title, str(exc).splitlines()[0] if str(exc) else ""))
        else:
            _criteria.append((number, "SKIP", title, str(exc)))
        raise
    _criteria.append((number, "PASS", title, ""))


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, detail in sorted(_criteria, key=lambda c: str(c[0])):
        line = f"[{status}] {number}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def demo_dir(tmp_path):
    """Writable copy of the bundled 2-tracker / 3-sequence fixture."""
    dst = tmp_path / "demo"
    shutil.copytree(FIXTURES / "demo", dst)
    return dst


def write_manifest(root, sequences, trackers=(), fmt="rect", name="synthetic"):
    """Write trajectories and a manifest under ``root``.

    ``sequences`` maps sequence name to ground-truth text; ``trackers`` maps
    tracker name to a dict of sequence name to result text.
    """
    root = Path(root)
    lines = [f"dataset_name: {name}", "sequences:"]
    for seq, text in sequences.items():
        (root / "gt").mkdir(parents=True, exist_ok=True)
        (root / "gt" / f"{seq}.txt").write_text(text)
        lines.append(f"  - {{name: {seq}, gt: gt/{seq}.txt, format: {fmt}}}")
    if trackers:
        lines.append("trackers:")
    for trk, results in dict(trackers).items():
        d = root / "results" / trk
        d.mkdir(parents=True, exist_ok=True)
        for seq, text in results.items():
            (d / f"{seq}.txt").write_text(text)
        lines.append(f"  - {{name: {trk}, results_dir: results/{trk}}}")
    path = root / "manifest.yaml"
    path.write_text("\n".join(lines) + "\n")
    return path
