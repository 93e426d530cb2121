import csv
import json
import math

import numpy as np
import pytest

from fraccolloc.cli import main


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, [line for line in out.splitlines() if line], err


def test_points_chebyshev(tmp_path, capsys):
    code, paths, _ = _run(capsys, "points", "--family", "chebyshev", "--n", 4, "--out-dir", tmp_path)
    assert code == 0
    rows = _read(paths[0])
    assert len(rows) == 5 and list(rows[0]) == ["i", "x"]
    np.testing.assert_allclose([float(r["x"]) for r in rows], [-1, -math.sqrt(0.5), 0, math.sqrt(0.5), 1], atol=1e-16)
    meta = json.loads((tmp_path / (paths[0].split("/")[-1] + ".meta.json")).read_text())
    assert meta["command"] == "points" and meta["parameters"]["n"] == 4


def test_points_legendre_weights(tmp_path, capsys):
    code, paths, _ = _run(capsys, "points", "--family", "legendre", "--n", 2, "--out-dir", tmp_path)
    assert code == 0
    np.testing.assert_allclose([float(r["w"]) for r in _read(paths[0])], [1 / 3, 4 / 3, 1 / 3], rtol=1e-15)


def test_points_rejects_zero(tmp_path, capsys):
    code, paths, err = _run(capsys, "points", "--n", 0, "--out-dir", tmp_path)
    assert code != 0 and paths == []
    lines = err.strip().splitlines()
    assert len(lines) == 1
    assert "n must be" in json.loads(lines[0])["message"]


def test_diffmat_first_order(tmp_path, capsys):
    code, paths, _ = _run(capsys, "diffmat", "--kind", "first", "--family", "legendre", "--n", 4, "--out-dir", tmp_path)
    assert code == 0
    assert float(_read(paths[0])[0]["c0"]) == pytest.approx(-5.0, abs=1e-14)


def test_diffmat_undefined_row(tmp_path, capsys):
    code, paths, _ = _run(capsys, "diffmat", "--kind", "rl-left", "--alpha", 1.5, "--n", 8, "--out-dir", tmp_path)
    assert code == 0
    rows = _read(paths[0])
    assert all(rows[0][f"c{i}"] == "inf" for i in range(9))
    assert all(rows[1][f"c{i}"] != "inf" for i in range(9))


def test_diffmat_rejects_integer_alpha(tmp_path, capsys):
    code, _, err = _run(capsys, "diffmat", "--kind", "rl-left", "--alpha", 2.0, "--n", 8, "--out-dir", tmp_path)
    assert code != 0
    assert "non-integer" in json.loads(err)["message"]


def test_converge_example5_alpha19(tmp_path, capsys):
    code, paths, _ = _run(
        capsys, "converge", "--example", "example5", "--alpha", 1.9, "--n", 8, "--out-dir", tmp_path
    )
    assert code == 0
    (row,) = _read(paths[0])
    assert row["N"] == "8"
    assert float(row["Linf"]) == pytest.approx(2.103e-3, rel=0.05)


def test_converge_empty_n_list(tmp_path, capsys):
    code, _, err = _run(capsys, "converge", "--n", "--out-dir", tmp_path)
    assert code != 0
    assert "N list must not be empty" in json.loads(err)["message"]


def test_converge_unknown_example(tmp_path, capsys):
    code, _, err = _run(capsys, "converge", "--example", "example9", "--n", 6, "--out-dir", tmp_path)
    assert code != 0
    assert json.loads(err)["error"] == "DomainError"


def test_eigens_dimension_and_stability(tmp_path, capsys):
    code, paths, _ = _run(capsys, "eigens", "--example", "example1", "--n", 6, "--out-dir", tmp_path)
    assert code == 0
    rows = _read(paths[0])
    assert len(rows) == 5
    assert max(abs(complex(float(r["re"]), float(r["im"]))) for r in rows) <= 1 + 1e-10


def test_eigens_identity_limit(tmp_path, capsys):
    code, paths, _ = _run(
        capsys, "eigens", "--n", 10, "--theta", 1.0, "--tau", 1e-12, "--out-dir", tmp_path
    )
    assert code == 0
    ev = np.array([complex(float(r["re"]), float(r["im"])) for r in _read(paths[0])])
    np.testing.assert_allclose(ev, 1.0, atol=1e-8)


def test_levy_feller_six_snapshots(tmp_path, capsys):
    code, paths, _ = _run(capsys, "levy-feller", "--alpha", 1.8, "--vartheta", 0.1, "--n", 20, "--out-dir", tmp_path)
    assert code == 0
    assert len(paths) == 6
    maxima = [max(float(r["u"]) for r in _read(p)) for p in paths]
    assert all(b < a for a, b in zip(maxima, maxima[1:]))


def test_levy_feller_rejects_large_vartheta(tmp_path, capsys):
    code, _, err = _run(capsys, "levy-feller", "--alpha", 1.6, "--vartheta", 0.5, "--out-dir", tmp_path)
    assert code != 0
    assert "vartheta" in json.loads(err)["message"]


def test_levy_feller_mirror_without_advection(tmp_path, capsys):
    code, paths, _ = _run(
        capsys, "levy-feller", "--alpha", 1.6, "--vartheta", -0.3, 0, 0.3, "--nu", 0, "--snapshots", "--out-dir", tmp_path
    )
    assert code == 0 and len(paths) == 3
    u = {p: np.array([float(r["u"]) for r in _read(p)]) for p in paths}
    minus = next(v for p, v in u.items() if "th-0.3" in p)
    plus = next(v for p, v in u.items() if "th0.3" in p)
    assert np.max(np.abs(minus - plus[::-1])) <= 1e-8


def test_solve_commands(tmp_path, capsys):
    code, paths, _ = _run(capsys, "solve1d", "--n", 8, "--snapshots", 0.5, "--out-dir", tmp_path)
    assert code == 0 and len(paths) == 2
    meta = json.loads(open(paths[-1] + ".meta.json").read())
    assert meta["Linf"] == pytest.approx(1.6e-4, rel=0.5)
    code, paths, _ = _run(capsys, "solve2d", "--example", "example5", "--n", 6, "--out-dir", tmp_path)
    assert code == 0
    meta = json.loads(open(paths[-1] + ".meta.json").read())
    assert len(meta["newton_iterations"]) == 10
    code, _, err = _run(capsys, "solve2d", "--example", "example1", "--out-dir", tmp_path)
    assert code != 0 and "not a 2D example" in err


def test_coeff_report_methods(tmp_path, capsys):
    for method in ("henrici", "vandermonde"):
        code, paths, _ = _run(capsys, "coeff-report", "--n", 15, "--method", method, "--out-dir", tmp_path)
        assert code == 0
        (row,) = _read(paths[0])
        assert 0 < float(row["max_abs_error"]) < 1e-3


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "chebyshev", "n": 3}))
    code, paths, _ = _run(capsys, "points", "--config", cfg, "--n", 5, "--out-dir", tmp_path)
    assert code == 0
    assert paths[0].endswith("points_chebyshev_N5.csv")
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = _run(capsys, "points", "--config", cfg, "--out-dir", tmp_path)
    assert code != 0 and "bogus" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["diffmat", "--kind", "caputo-right", "--alpha", 1.3, "--n", 7, "--family", "chebyshev"],
        ["converge", "--example", "example2", "--n", 6, 8, "--alpha", 1.2, 1.8],
        ["eigens", "--example", "example3", "--n", 5],
    ],
)
def test_outputs_are_byte_identical(tmp_path, capsys, argv):
    outputs = []
    for run in ("a", "b"):
        code, paths, _ = _run(capsys, *argv, "--out-dir", tmp_path / run)
        assert code == 0
        outputs.append({p.split("/")[-1]: open(p, "rb").read() for p in paths})
    assert outputs[0] == outputs[1]
    for blob in outputs[0].values():
        assert b"\r" not in blob


def test_unknown_command_is_json_error(capsys):
    code, _, err = _run(capsys, "frobnicate")
    assert code == 2
    assert set(json.loads(err)) == {"error", "message"}
