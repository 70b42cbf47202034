import csv
import math

import numpy as np
import pytest

from seqplic import cli
from seqplic.bench import (
    TABLE_HEADER,
    TOPOLOGIES,
    emit_report,
    fraction_set,
    generate_grid,
    normal_set,
    run_experiment,
)


def test_normal_set_sizes():
    for m in (2, 3, 6, 10):
        normals = normal_set(m)
        assert len(normals) == 2 + 2 * m * (m - 1)
        np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-15)
        assert len(np.unique(np.round(normals, 12), axis=0)) == len(normals)
    octahedral = np.round(normal_set(2), 12)
    expected = np.vstack([np.eye(3), -np.eye(3)])
    assert sorted((octahedral + 0.0).tolist()) == sorted(expected.tolist())


def test_fraction_set_layout():
    fr = fraction_set(10)
    assert len(fr) == 20
    for k in range(-9, -4):
        assert 10.0**k in fr
    assert 1 - 1e-5 in fr and 1 - 2e-9 in fr
    linear = fr[(fr >= 1e-4) & (fr <= 1 - 1e-4)]
    np.testing.assert_allclose(linear, np.linspace(1e-4, 1 - 1e-4, 10))


def test_grid_sizes():
    reduced = generate_grid(6, 10)
    assert len(reduced.normals) == 62
    assert reduced.n_instances == len(reduced.pairs) * 62**2
    full = generate_grid(10, 20)
    assert len(full.normals) == 182
    assert full.n_instances == pytest.approx(1.45e7, rel=0.01)
    eps = full.eps1
    for a1, a2 in full.pairs:
        assert eps <= a1 <= 1 - 2 * eps and eps <= a2 <= 1 - 2 * eps
        assert a1 + a2 <= 1 - eps + 1e-15
    with pytest.raises(ValueError):
        generate_grid(1, 10)


@pytest.fixture(scope="module")
def small_report():
    return run_experiment(generate_grid(2, 3), "cube", "both", threads=1)


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_small_run_summary(small_report):
    summary = small_report.summary()
    assert summary["defects"] == 0
    assert summary["instances"] == small_report.grid.n_instances
    assert 1.0 <= summary["proposed_n_av"] <= 2.0
    assert summary["max_residual_primary"] <= 1e-12
    assert summary["max_residual_secondary"] <= 1e-12
    assert summary["max_audit_error"] <= 1e-12
    assert summary["audited"] > 0
    assert summary["triple_cells_proposed_exceeds_baseline"] == 0


def test_emitted_tables(small_report, tmp_path):
    files = {p.name for p in emit_report(small_report, tmp_path)}
    for topo in TOPOLOGIES:
        assert f"proposed_{topo}.csv" in files
    for topo in ("triple", "fully_wetted", "non_wetted"):
        assert f"baseline_{topo}.csv" in files
    assert {"mismatch_matrix.csv", "mismatch_cells.csv", "triple_comparison.csv", "summary.csv"} <= files
    per_cell = {}
    saw_marker = False
    for topo in TOPOLOGIES:
        rows = _read(tmp_path / f"proposed_{topo}.csv")
        assert tuple(rows[0]) == TABLE_HEADER
        for a1, a2, nav, pct, count in rows[1:]:
            per_cell[(a1, a2)] = per_cell.get((a1, a2), 0.0) + float(pct)
            if int(count) == 0:
                assert nav == "x"
                saw_marker = True
            else:
                assert 1.0 <= float(nav)
    assert saw_marker
    for total in per_cell.values():
        assert total == pytest.approx(100.0, abs=1e-9)
    summary = dict(_read(tmp_path / "summary.csv")[1:])
    assert "proposed_triple_n_av" in summary


def test_output_is_deterministic(tmp_path):
    grid = generate_grid(2, 3)
    a = emit_report(run_experiment(grid, "dodeca", "proposed", threads=1), tmp_path / "a")
    b = emit_report(run_experiment(grid, "dodeca", "proposed", threads=2), tmp_path / "b")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_baseline_needs_the_cube():
    with pytest.raises(ValueError):
        run_experiment(generate_grid(2, 3), "dodeca", "baseline")
    with pytest.raises(ValueError):
        run_experiment(generate_grid(2, 3), "cube", "fastest")


def test_cli_runs(tmp_path, capsys):
    code = cli.main(["--shape", "notched", "--m-normal", "2", "--m-vof", "3", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "proposed_n_av" in out
    assert (tmp_path / "summary.csv").exists()


def test_cli_reports_defects(tmp_path, monkeypatch):
    real = cli.run_experiment

    def flawed(*args, **kwargs):
        report = real(*args, **kwargs)
        report.defects.append("injected")
        return report

    monkeypatch.setattr(cli, "run_experiment", flawed)
    code = cli.main(["--m-normal", "2", "--m-vof", "2", "--out", str(tmp_path)])
    assert code == 2
    assert (tmp_path / "defects.csv").exists()


def test_cli_bad_shape(tmp_path):
    assert cli.main(["--shape", "torus", "--m-normal", "2", "--m-vof", "2", "--out", str(tmp_path)]) == 1


def test_threads_from_environment(monkeypatch):
    from seqplic.bench import resolve_threads

    monkeypatch.setenv("PLICBENCH_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    assert math.isfinite(resolve_threads(0))
