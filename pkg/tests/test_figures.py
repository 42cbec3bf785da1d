import numpy as np

from peelclust.figures import save_heatmap_png, save_peel_png, write_pgm
from peelclust.peeling import PeelReport, RoundRecord


def test_pgm_deterministic(tmp_path):
    K = np.random.default_rng(0).random((20, 20))
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    write_pgm(K, a)
    write_pgm(K, b)
    assert a.read_bytes() == b.read_bytes()


def test_heatmap_png_deterministic(tmp_path):
    K = np.random.default_rng(1).random((15, 15))
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    save_heatmap_png(K, a, title="t")
    save_heatmap_png(K, b, title="t")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_peel_png_renders_rounds(tmp_path):
    rounds = (
        RoundRecord(step=1, knob=1.0, nodes_before=50, clusters=((0, 1),),
                    iterations=10, attempts=1),
        RoundRecord(step=2, knob=1.1, nodes_before=30, clusters=((2, 3),),
                    iterations=12, attempts=2),
    )
    report = PeelReport(rounds=rounds, leftover=(9,))
    path = tmp_path / "peel.png"
    save_peel_png(report, path, title="demo")
    assert path.stat().st_size > 500


def test_peel_png_empty_report(tmp_path):
    report = PeelReport(rounds=(), leftover=())
    path = tmp_path / "peel.png"
    save_peel_png(report, path)
    assert path.exists()
