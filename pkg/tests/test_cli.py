"""Tests for the command-line interface."""

import json

import pytest

from commexp.cli import main
from commexp.schemes import catalog_get, catalog_names, save_scheme


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_arguments_is_usage_error(capsys):
    code, _, err = run(capsys, )
    assert code == 2
    assert "usage" in err.lower()


def test_help_exits_cleanly(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    assert "commexp" in out


# ---------------------------------------------------------------------------
# schemes
# ---------------------------------------------------------------------------


def test_schemes_list_covers_catalog(capsys):
    code, out, _ = run(capsys, "schemes", "list")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == len(catalog_names())
    for name, line in zip(catalog_names(), lines):
        assert line.startswith(name)
        assert "order=" in line and "E/s" in line


def test_schemes_list_is_deterministic(capsys):
    _, first, _ = run(capsys, "schemes", "list")
    _, second, _ = run(capsys, "schemes", "list")
    assert first == second


def test_schemes_show_prints_slots(capsys):
    code, out, _ = run(capsys, "schemes", "show", "strang")
    assert code == 0
    assert "order 2, 3 exponentials" in out
    assert out.count("slot") == 3
    assert "0.5" in out


def test_schemes_show_unknown_name(capsys):
    code, _, err = run(capsys, "schemes", "show", "nosuch")
    assert code == 2
    assert "unknown scheme" in err
    assert "schemes list" in err


def test_schemes_export_then_verify_roundtrip(capsys, tmp_path):
    path = tmp_path / "ncp6.scheme.json"
    code, out, _ = run(capsys, "schemes", "export", "NCP6_3", str(path))
    assert code == 0
    assert str(path) in out
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["name"] == "NCP6_3"
    assert len(doc["slots"]) == 6

    code, out, _ = run(capsys, "verify", "--scheme", str(path))
    assert code == 0
    assert "order 3 verified" in out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["U21", "PCP16_5", "suzuki4"])
def test_verify_catalog_schemes(capsys, name):
    code, out, _ = run(capsys, "verify", "--scheme", name)
    assert code == 0
    assert f"order {catalog_get(name).order} verified" in out
    assert out.count("max residual") == catalog_get(name).order


def test_verify_reports_effective_error(capsys):
    code, out, _ = run(capsys, "verify", "--scheme", "PCP16_5")
    assert code == 0
    assert "E/s = 0.505208" in out


def test_verify_order_six_notes_word_norm(capsys):
    code, out, _ = run(capsys, "verify", "--scheme", "PCP26_6")
    assert code == 0
    assert "(word-coefficient norm)" in out


def test_verify_corrupted_file_fails_with_degree(capsys, tmp_path):
    scheme = catalog_get("PCP16_5")
    slots = list(scheme.slots)
    slots[3] = type(slots[3])(slots[3].generator, slots[3].coefficient + 1e-3)
    broken = type(scheme)(
        name=scheme.name, slots=tuple(slots), target=scheme.target,
        order=scheme.order, family=scheme.family)
    path = tmp_path / "broken.scheme.json"
    save_scheme(broken, path)
    code, out, _ = run(capsys, "verify", "--scheme", str(path))
    assert code == 1
    assert "NOT verified" in out
    assert "first failure at degree 1" in out


def test_verify_loose_tolerance_accepts_corruption(capsys, tmp_path):
    scheme = catalog_get("NCP6_3")
    slots = list(scheme.slots)
    slots[0] = type(slots[0])(slots[0].generator, slots[0].coefficient + 1e-9)
    nudged = type(scheme)(
        name="nudged", slots=tuple(slots), target=scheme.target,
        order=scheme.order)
    path = tmp_path / "nudged.scheme.json"
    save_scheme(nudged, path)
    assert run(capsys, "verify", "--scheme", str(path))[0] == 1
    code, out, _ = run(capsys, "verify", "--scheme", str(path), "--tol", "1e-6")
    assert code == 0
    assert "verified" in out


def test_verify_unknown_scheme(capsys):
    code, _, err = run(capsys, "verify", "--scheme", "missing")
    assert code == 2
    assert "neither a catalog scheme nor a scheme file" in err


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def test_bench_figure_writes_csv(capsys, tmp_path):
    out = tmp_path / "fig6.csv"
    code, text, _ = run(capsys, "bench", "--figure", "fig6", "--out", str(out))
    assert code == 0
    assert out.exists()
    assert "fig6: wrote" in text


def test_bench_custom_error_curve(capsys, tmp_path):
    out = tmp_path / "curve.csv"
    code, text, _ = run(
        capsys, "bench", "--custom", "--schemes", "NCP6_3", "--pair", "pauli",
        "--t", "0.5", "--n", "4,8,16", "--out", str(out))
    assert code == 0
    assert "3 data rows" in text
    lines = out.read_text(encoding="utf-8").splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "scheme,pair,t_total,n,gates,error"
    assert len(data) == 4
    assert data[1].split(",")[:5] == ["NCP6_3", "pauli", "0.5", "4", "24"]


def test_bench_custom_cost_table(capsys, tmp_path):
    out = tmp_path / "cost.csv"
    code, _, _ = run(
        capsys, "bench", "--custom", "--schemes", "NCP6_3,U21",
        "--x", "0.3,0.5", "--tol", "1e-3", "--out", str(out))
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "scheme,x,tol,gates"
    assert len(data) == 5


def test_bench_custom_usage_errors(capsys, tmp_path):
    out = str(tmp_path / "x.csv")
    assert run(capsys, "bench", "--custom", "--n", "4", "--out", out)[0] == 2
    assert run(capsys, "bench", "--custom", "--schemes", "NCP6_3",
               "--out", out)[0] == 2
    assert run(capsys, "bench", "--custom", "--schemes", "NCP6_3",
               "--n", "4", "--x", "0.5", "--out", out)[0] == 2
    assert run(capsys, "bench", "--custom", "--schemes", "NCP6_3",
               "--pair", "toeplitz", "--n", "4", "--out", out)[0] == 2
    assert run(capsys, "bench", "--custom", "--schemes", "nosuch",
               "--n", "4", "--out", out)[0] == 2
    assert run(capsys, "bench", "--custom", "--schemes", "NCP6_3",
               "--n", "0", "--out", out)[0] == 2


def test_bench_figure_and_custom_exclusive(capsys):
    code, _, err = run(capsys, "bench", "--figure", "fig6", "--custom")
    assert code == 2
    assert "not allowed" in err


def test_bench_out_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("COMMEXP_OUT_DIR", str(tmp_path / "exports"))
    code, text, _ = run(
        capsys, "bench", "--custom", "--schemes", "U21", "--pair", "pauli",
        "--n", "2,4")
    assert code == 0
    assert (tmp_path / "exports" / "custom.csv").exists()
    assert str(tmp_path / "exports") in text


def test_bench_random_pair_spec(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(
        capsys, "bench", "--custom", "--schemes", "U21", "--pair", "random:4",
        "--n", "2,4", "--out", str(out))
    assert code == 0
    rows = [l for l in out.read_text(encoding="utf-8").splitlines()
            if not l.startswith("#")]
    assert rows[1].split(",")[1] == "random:4"


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------


def test_optimize_aor4(capsys):
    code, out, _ = run(capsys, "optimize", "--family", "aor4",
                       "--range", "0.25:0.4")
    assert code == 0
    assert "minimizer d2 = 0.301895" in out
    assert "deviation" in out
    deviation = float(out.rsplit("deviation", 1)[1])
    assert deviation < 1e-6


def test_optimize_negative_range_survives_argparse(capsys):
    code, out, _ = run(capsys, "optimize", "--family", "third_order",
                       "--range", "-1.0:-0.5")
    assert code == 0
    assert "minimizer c5 = -0.786151" in out
    assert "reference c5* = -0.7861513778" in out


def test_optimize_rejects_malformed_range(capsys):
    code, _, err = run(capsys, "optimize", "--family", "aor4", "--range", "x:y")
    assert code == 2
    assert "numeric bounds" in err


def test_optimize_rejects_empty_range(capsys):
    code, _, err = run(capsys, "optimize", "--family", "aor4", "--range", "2:2")
    assert code == 2
    assert "empty parameter range" in err


def test_optimize_unknown_family(capsys):
    code, _, err = run(capsys, "optimize", "--family", "nosuch", "--range", "0:1")
    assert code == 2
    assert "invalid choice" in err
