import csv
import json
import struct
from pathlib import Path

import pytest

import germdeform as gd
from germdeform.cli import main

QUAD = {"coeffs": [[2, 0], [1, 0]], "radius_U": 3.0}
QUAD_TIGHT = {"coeffs": [[2, 0], [1, 0]]}


def write_cfg(tmp_path: Path, name: str, obj) -> str:
    p = tmp_path / name
    p.write_text(json.dumps(obj), encoding="utf-8")
    return str(p)


def run(tmp_path, command, cfg_name, cfg, out="out", extra=()):
    cfg_path = write_cfg(tmp_path, cfg_name, cfg)
    out_dir = tmp_path / out
    rc = main([command, "--config", cfg_path, "--out", str(out_dir), *extra])
    return rc, out_dir


def read_csv(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_cycles_command(tmp_path):
    rc, out = run(tmp_path, "cycles", "c.json", {"germ": QUAD, "orders": [1, 2]})
    assert rc == 0
    rows = read_csv(out / "cycles.csv")
    assert rows[0] == ["order", "point_index", "re", "im", "mult_re", "mult_im", "kind"]
    assert len(rows) == 1 + 2 + 2
    for row in rows[1:]:
        float(row[2]), float(row[3])
    summary = json.loads((out / "cycles.json").read_text())
    assert summary["count"] == 3
    assert summary["kinds"]["repelling"] == 2
    assert summary["critical"] == 1


def test_koenigs_command(tmp_path):
    rc, out = run(tmp_path, "koenigs", "k.json", {"germ": QUAD_TIGHT, "order": 1})
    assert rc == 0
    data = json.loads((out / "chart.json").read_text())
    assert data["radius"] == pytest.approx(0.2025)
    assert data["coeffs"][0] == [1.0, 0.0]


def test_deform_local_command(tmp_path):
    rc, out = run(
        tmp_path,
        "deform-local",
        "d.json",
        {"germ": QUAD_TIGHT, "order": 1, "target": [3.0, 0.0]},
    )
    assert rc == 0
    rep = json.loads((out / "deform_local.json").read_text())
    assert rep["relative_error"] < 1e-5
    assert rep["deformed_map_residual"] < 1e-5
    assert rep["measured"][0] == pytest.approx(3.0, rel=1e-5)


def test_straighten_command_and_reload(tmp_path):
    rc, out = run(
        tmp_path,
        "straighten",
        "s.json",
        {
            "germ": QUAD_TIGHT,
            "deformations": [{"order": 1, "target": [3.0, 0.0]}],
            "grid": 128,
        },
    )
    assert rc == 0
    raw = (out / "gridmap.bin").read_bytes()
    n = struct.unpack("<I", raw[:4])[0]
    assert n == 128
    gm = gd.GridMap.from_bytes(raw)
    assert gm.samples.shape == (128, 128)
    side = json.loads((out / "gridmap.json").read_text())
    assert side["n"] == 128
    assert side["deformations"][0]["order"] == 1


def test_motion_command(tmp_path):
    rc, out = run(
        tmp_path,
        "motion",
        "m.json",
        {
            "germ": QUAD_TIGHT,
            "t_values": [[0.4, 0.0]],
            "points": [[0.1, 0.0], [0.0, 0.1]],
            "grid": 64,
        },
    )
    assert rc == 0
    rows = read_csv(out / "motion.csv")
    assert rows[0][0] == "t_re"
    assert len(rows) == 1 + 2
    for row in rows[1:]:
        assert all(abs(float(v)) < 10 for v in row)


def test_cremer_command(tmp_path):
    rc, out = run(
        tmp_path,
        "cremer",
        "cr.json",
        {"preset": "golden", "degree": 2, "count": 40},
    )
    assert rc == 0
    rep = json.loads((out / "cremer.json").read_text())
    assert rep["margin"] < 0
    assert rep["satisfied"] is False
    rows = read_csv(out / "cremer.csv")
    assert rows[0] == ["n", "q_n", "ratio", "margin"]


def test_cremer_tower_satisfied(tmp_path):
    rc, out = run(
        tmp_path,
        "cremer",
        "tw.json",
        {"preset": "tower", "degree": 2, "count": 8},
    )
    assert rc == 0
    rep = json.loads((out / "cremer.json").read_text())
    assert rep["satisfied"] is True


def test_render_command(tmp_path):
    rc, out = run(
        tmp_path,
        "render",
        "r.json",
        {
            "germ": QUAD_TIGHT,
            "deformations": [{"order": 1, "target": [3.0, 0.0]}],
            "grid": 64,
            "field_csv": True,
        },
    )
    assert rc == 0
    for name in ("field.ppm", "mesh.ppm"):
        head = (out / name).read_bytes()[:20].split()
        assert head[0] == b"P6"
        assert int(head[1]) == 64 and int(head[2]) == 64
    rows = read_csv(out / "field.csv")
    assert rows[0] == ["re", "im", "mu_re", "mu_im"]
    assert len(rows) == 1 + 64 * 64


def test_unknown_config_key_exits_2(tmp_path):
    rc, _ = run(tmp_path, "cycles", "bad.json", {"germ": QUAD, "orders": [1], "oops": 1})
    assert rc == 2


def test_missing_key_exits_2(tmp_path):
    rc, _ = run(tmp_path, "cycles", "bad2.json", {"germ": QUAD})
    assert rc == 2


def test_invalid_json_exits_2(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json", encoding="utf-8")
    assert main(["cycles", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file_exits_2(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert main(["cycles", "--config", missing, "--out", str(tmp_path / "o")]) == 2


def test_numerical_failure_exits_3(tmp_path):
    # target inside the unit circle cannot be reached by the shear
    rc, _ = run(
        tmp_path,
        "deform-local",
        "bad3.json",
        {"germ": QUAD_TIGHT, "order": 1, "target": [0.5, 0.0]},
    )
    assert rc == 3


def test_grid_flag_overrides_config(tmp_path):
    rc, out = run(
        tmp_path,
        "straighten",
        "s2.json",
        {
            "germ": QUAD_TIGHT,
            "deformations": [{"order": 1, "target": [3.0, 0.0]}],
            "grid": 512,
        },
        extra=("--grid", "64"),
    )
    assert rc == 0
    raw = (out / "gridmap.bin").read_bytes()
    assert struct.unpack("<I", raw[:4])[0] == 64


def test_determinism_byte_identical(tmp_path):
    cfg = {"germ": QUAD, "orders": [1, 2]}
    _, out1 = run(tmp_path, "cycles", "da.json", cfg, out="run1")
    _, out2 = run(tmp_path, "cycles", "db.json", cfg, out="run2")
    for name in ("cycles.csv", "cycles.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    scfg = {
        "germ": QUAD_TIGHT,
        "deformations": [{"order": 1, "target": [3.0, 0.0]}],
        "grid": 64,
    }
    _, s1 = run(tmp_path, "straighten", "sa.json", scfg, out="srun1")
    _, s2 = run(tmp_path, "straighten", "sb.json", scfg, out="srun2")
    for name in ("gridmap.bin", "gridmap.json"):
        assert (s1 / name).read_bytes() == (s2 / name).read_bytes()
