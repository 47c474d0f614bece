import json
import math
import time

import numpy as np
import pytest

from gicand.cli import main
from gicand.cost_volume import extract_descriptors, regularize_box, variance_volume
from gicand.io import read_pfm, save_rig
from gicand.candidates import Kind, candidate_for_rig
from gicand.rig import polygon_rig
from gicand.scenes import default_intrinsics, demo_scenes, training_rig
from gicand.sweep import build_warp_table, sweep_views
from gicand.synth import render_rig, scene_to_dict

ROOM = demo_scenes()[0]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 else None), err


@pytest.fixture(scope="module")
def small(tmp_path_factory):
    """A 128 px triangle rig and the room scene written to disk."""
    d = tmp_path_factory.mktemp("small")
    save_rig(d / "rig.json", polygon_rig(default_intrinsics(128), 3, 0.3))
    (d / "scene.json").write_text(json.dumps(scene_to_dict(ROOM)))
    return d


@pytest.fixture(scope="module")
def rendered(small):
    out = small / "render"
    assert main(["render-scene", "--scene", str(small / "scene.json"), "--rig", str(small / "rig.json"),
                 "--height", "32", "--out-dir", str(out)]) == 0
    return out


def test_render_file_contract(rendered):
    names = sorted(p.name for p in rendered.iterdir())
    assert len([n for n in names if n.endswith("_mask.png")]) == 3
    assert len([n for n in names if n.endswith(".png")]) == 6
    assert [n for n in names if n.endswith(".pfm")] == ["gt_distance.pfm"]
    assert not [n for n in names if n.startswith(".")]  # no temp files left behind


def test_render_rerun_bit_identical(small, rendered, tmp_path):
    assert main(["render-scene", "--scene", str(small / "scene.json"), "--rig", str(small / "rig.json"),
                 "--height", "32", "--out-dir", str(tmp_path)]) == 0
    for p in rendered.iterdir():
        assert (tmp_path / p.name).read_bytes() == p.read_bytes(), p.name


def test_render_missing_scene(capsys, small, tmp_path):
    missing = tmp_path / "nope.json"
    code, _, err = run(capsys, "render-scene", "--scene", missing, "--rig", small / "rig.json",
                       "--out-dir", tmp_path / "o")
    assert code != 0
    assert str(missing) in err


def _estimate_args(small, rendered, out):
    imgs = [rendered / f"cam{i}.png" for i in range(3)]
    masks = [rendered / f"cam{i}_mask.png" for i in range(3)]
    return ["estimate", "--rig", small / "rig.json", "--images", *imgs, "--masks", *masks,
            "--height", 32, "--n", 16, "--out-dir", out]


def test_estimate_range_and_outputs(capsys, small, rendered, tmp_path):
    code, res, err = run(capsys, *_estimate_args(small, rendered, tmp_path))
    assert code == 0, err
    d = read_pfm(tmp_path / "distance.pfm")
    assert d.shape == (32, 64)
    assert d.min() >= 0.5 and d.max() <= 100.0
    c = read_pfm(tmp_path / "confidence.pfm")
    assert np.all((c >= 0) & (c <= 1))
    manifest = json.loads((tmp_path / "candidates.json").read_text())
    assert len(manifest["distances"]) == 16
    assert manifest == res["candidates"]
    summary = json.loads((tmp_path / "probability_summary.json").read_text())
    assert sum(summary["argmax_histogram"]) == 32 * 64


def test_estimate_candidates_from_rig(capsys, small, rendered, tmp_path):
    # baseline override first, then recompute from the rig
    args = _estimate_args(small, rendered, tmp_path)
    code, stale, _ = run(capsys, *args, "--baseline", 1.0)
    assert code == 0
    code, adj, _ = run(capsys, *args, "--baseline", 1.0, "--candidates-from-rig")
    assert code == 0
    b = 0.3 / np.sqrt(3)
    assert adj["candidates"]["spec"]["baseline"] == pytest.approx(b, rel=1e-12)
    assert stale["candidates"]["spec"]["baseline"] == 1.0
    assert adj["candidates"]["distances"] != stale["candidates"]["distances"]


def test_estimate_synthetic_mode_matches_file_mode(capsys, small, rendered, tmp_path):
    code, _, _ = run(capsys, *_estimate_args(small, rendered, tmp_path / "f"))
    assert code == 0
    code, _, err = run(capsys, "estimate", "--rig", small / "rig.json", "--scene", small / "scene.json",
                       "--height", 32, "--n", 16, "--out-dir", tmp_path / "s")
    assert code == 0, err
    np.testing.assert_array_equal(read_pfm(tmp_path / "f" / "distance.pfm"),
                                  read_pfm(tmp_path / "s" / "distance.pfm"))


def test_estimate_rejects_both_modes(capsys, small, rendered, tmp_path):
    code, _, err = run(capsys, *_estimate_args(small, rendered, tmp_path), "--scene", small / "scene.json")
    assert code == 2 and "either" in err


def test_estimate_size_mismatch(capsys, rendered, tmp_path):
    # built-in 512 px layout vs 128 px images
    imgs = [rendered / f"cam{i}.png" for i in range(3)]
    code, _, err = run(capsys, "estimate", "--rig", "train", "--images", *imgs, "--out-dir", tmp_path)
    assert code == 2 and "error" in err


def test_eval_identity(capsys, rendered, tmp_path):
    gt = rendered / "gt_distance.pfm"
    code, rep, _ = run(capsys, "eval", "--pred", gt, "--gt", gt, "--out-dir", tmp_path)
    assert code == 0
    assert (rep["mae"], rep["rmse"], rep["ssim"]) == (0.0, 0.0, 1.0)
    assert json.loads((tmp_path / "report.json").read_text()) == rep
    assert set(rep) == {"mae", "rmse", "ssim", "pixels", "config"}


def test_eval_missing_file(capsys, rendered, tmp_path):
    code, _, err = run(capsys, "eval", "--pred", tmp_path / "x.pfm", "--gt", rendered / "gt_distance.pfm")
    assert code != 0 and "x.pfm" in err


def test_eval_echoes_candidates(capsys, rendered, tmp_path):
    code, res, _ = run(capsys, "gen-candidates", "--kind", "GI", "--baseline", 0.3, "--out-dir", tmp_path)
    assert code == 0
    gt = rendered / "gt_distance.pfm"
    code, rep, _ = run(capsys, "eval", "--pred", gt, "--gt", gt, "--candidates", tmp_path / "candidates.json")
    assert rep["config"]["candidates"] == res["spec"]


def test_gen_candidates_examples(capsys, tmp_path):
    code, res, _ = run(capsys, "gen-candidates", "--kind", "EV", "--d-min", 1, "--d-max", 3, "--n", 3)
    assert code == 0
    np.testing.assert_allclose(res["distances"], [1.0, 1.5, 3.0], rtol=1e-12)

    lo, hi = 1 / math.tan(math.radians(60)), 1 / math.tan(math.radians(30))
    code, res, _ = run(capsys, "gen-candidates", "--kind", "GI", "--baseline", 1, "--d-min", repr(lo),
                       "--d-max", repr(hi), "--n", 3)
    np.testing.assert_allclose(res["distances"], [lo, 1.0, hi], rtol=1e-12)

    code, res, _ = run(capsys, "gen-candidates", "--kind", "GI", "--baseline", 1, "--n", 16,
                       "--out-dir", tmp_path, "--plot")
    steps = np.array(res["angular_steps"])
    assert np.std(steps) / np.mean(steps) < 1e-9
    rows = (tmp_path / "candidates.csv").read_text().splitlines()
    assert len(rows) == 17
    assert (tmp_path / "candidate_steps.png").stat().st_size > 0


def test_gen_candidates_from_rig(capsys):
    code, res, _ = run(capsys, "gen-candidates", "--rig", "train")
    assert res["spec"]["baseline"] == pytest.approx(0.3 / np.sqrt(3), rel=1e-12)


def test_config_file_relative_paths(capsys, small, tmp_path):
    cfg = {"scene": "scene.json", "rig": "rig.json", "height": 16, "out_dir": str(tmp_path)}
    (small / "cfg.json").write_text(json.dumps(cfg))
    code, res, err = run(capsys, "render-scene", "--config", small / "cfg.json")
    assert code == 0, err
    assert read_pfm(tmp_path / "gt_distance.pfm").shape == (16, 32)


def test_init_demo(capsys, tmp_path):
    code, res, _ = run(capsys, "init-demo", "--out-dir", tmp_path)
    assert code == 0
    assert (tmp_path / "rigs" / "wide.json").is_file()
    assert len(list((tmp_path / "scenes").glob("*.json"))) == 10


def _volume_stage(images, rig, cset, H):
    desc = [extract_descriptors(i) for i in images]
    t0 = time.perf_counter()
    table = build_warp_table(rig, cset, H, 2 * H)
    regularize_box(variance_volume(sweep_views(desc, table)), 6)
    return time.perf_counter() - t0


def test_volume_stage_scales_with_candidates():
    """Halving the candidate count roughly halves the warp + cost-volume time."""
    rig = training_rig()
    images, _, masks = render_rig(ROOM, rig, supersample=1)
    rig = rig.with_masks(masks)
    times = {}
    for n in (8, 16):
        cset = candidate_for_rig(rig, 0.5, 100.0, n, Kind.GI)
        _volume_stage(images, rig, cset, 64)  # warm-up
        times[n] = min(_volume_stage(images, rig, cset, 160) for _ in range(3))
    ratio = times[16] / times[8]
    assert 1.4 <= ratio <= 2.6, ratio
