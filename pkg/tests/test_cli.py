import json
import subprocess
import sys

import pytest

from evmod.cli import main
from evmod.render import read_ppm


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scene")
    assert main(["synth", "--preset", "two_objects", "--seed", "0", "--out", str(out)]) == 0
    return out


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_synth_outputs_deterministic(scene_dir, tmp_path):
    assert main(["synth", "--preset", "two_objects", "--seed", "0", "--out", str(tmp_path)]) == 0
    assert _files(tmp_path) == _files(scene_dir)
    assert set(_files(scene_dir)) == {"events.csv", "truth.json", "frames.txt", "script.json"}


def test_synth_binary_and_script(scene_dir, tmp_path):
    assert main(["synth", str(scene_dir / "script.json"), "--format", "binary",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "events.evb").read_bytes()[:4] == b"EVM1"
    assert (tmp_path / "truth.json").read_bytes() == (scene_dir / "truth.json").read_bytes()


def test_detect_eval_round_trip(scene_dir, tmp_path, capsys):
    det = tmp_path / "det"
    args = ["detect", str(scene_dir / "events.csv"), "--frames", str(scene_dir / "frames.txt"),
            "--out", str(det), "--render"]
    assert main(args) == 0
    rep = json.loads((det / "partition_0001.json").read_text())
    assert rep["chosen_k"] == 2 and len(rep["detections"]) == 2
    img = read_ppm((det / "partition_0001.ppm").read_bytes())
    assert img.shape == (260, 346, 3) and img.any()
    capsys.readouterr()
    assert main(["eval", str(det), str(scene_dir / "truth.json"), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out == "100.00 100.00 100.00\n"
    assert json.loads((tmp_path / "eval.json").read_text())["tp"] == 2


def test_detect_rerun_byte_identical(scene_dir, tmp_path):
    runs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main(["detect", str(scene_dir / "events.csv"), "--out", str(d), "--render",
                     "--seed", "7"]) == 0
        runs.append(_files(d))
    assert runs[0] == runs[1]


def test_sweep_single_k(scene_dir, tmp_path):
    assert main(["sweep", str(scene_dir / "events.csv"), "--k-range", "3..3",
                 "--frames", str(scene_dir / "frames.txt"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "sweep_0001.csv").read_text().splitlines()
    assert lines[0] == "k,mean_silhouette" and len(lines) == 2 and lines[1].startswith("3,")


def test_sweep_full_range(scene_dir, tmp_path):
    assert main(["sweep", str(scene_dir / "events.csv"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "sweep_0001.csv").read_text().splitlines()
    assert [int(l.split(",")[0]) for l in lines[1:]] == list(range(2, 11))


def _hands_fixture(tmp_path):
    # 662 TP, 61 FP, 68 FN: precision 91.56%, recall 90.68%
    tp, fp, fn = 662, 61, 68
    per = 80
    det_dir = tmp_path / "det"
    det_dir.mkdir()
    truth, k = {}, 0
    n_parts = -(-(tp + fn) // per)
    for idx in range(1, n_parts + 1):
        truth[idx], dets = [], []
        for slot in range(per):
            if k >= tp + fn:
                break
            x, y = 12 * (slot % 20), 12 * (slot // 20)
            box = [x, y, x + 9, y + 9]
            truth[idx].append(box)
            if k < tp:
                dets.append(box)
            k += 1
        for j in range(fp // n_parts + (idx <= fp % n_parts)):
            dets.append([300 + j, 200, 300 + j, 200])
        (det_dir / f"partition_{idx:04d}.json").write_text(json.dumps(
            {"partition": idx, "detections": [{"box": b} for b in dets]}))
    (tmp_path / "truth.json").write_text(json.dumps(
        {"partitions": [{"index": i, "boxes": b} for i, b in truth.items()]}))
    return det_dir, tmp_path / "truth.json"


def test_eval_hands_summary(tmp_path, capsys):
    det_dir, truth = _hands_fixture(tmp_path)
    assert main(["eval", str(det_dir), str(truth), "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out == "90.68 91.56 91.12\n"
    rep = json.loads((tmp_path / "eval.json").read_text())
    assert (rep["tp"], rep["fp"], rep["fn"]) == (662, 61, 68)


def test_exit_codes(scene_dir, tmp_path, capsys):
    ev = str(scene_dir / "events.csv")
    assert main(["detect", ev, "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"knn_k": -3}')
    assert main(["detect", ev, "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert main(["detect", ev, "--k-range", "x", "--out", str(tmp_path)]) == 1
    assert main(["synth", "--preset", "nope", "--out", str(tmp_path)]) == 1
    assert main(["eval", str(tmp_path), str(scene_dir / "truth.json"),
                 "--iou-threshold", "2"]) == 1
    assert main(["detect", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == 2
    garbage = tmp_path / "g.csv"
    garbage.write_text("# evmod-events v1 width=10 height=10\n1,2,oops,1\n")
    assert main(["detect", str(garbage), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "g.csv:2" in err
    assert main(["eval", str(tmp_path / "empty"), str(scene_dir / "truth.json")]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "evmod", "synth", "--preset", "near_touching",
                        "--out", str(tmp_path), "-v"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == ""
    assert "wrote" in r.stderr
