import json

import pytest

from randcomplex.cli import main
from randcomplex.faces import load_complex
from randcomplex.sweep import (
    CSV_HEADER, STATISTICS, SweepConfig, SweepRow, emit, read_config_file, read_rows, run_sweep,
    theory_value,
)
from randcomplex.thresholds import regime_densities


def small_cfg(**kw):
    base = dict(d=2, n=[25], c_min=0.0, c_max=3.0, c_step=1.5, trials=2, stats=list(STATISTICS), seed=3)
    base.update(kw)
    return SweepConfig(**base)


def test_zero_c_gives_zero_densities():
    rows = run_sweep(small_cfg(c_max=0.0, trials=1))
    for r in rows:
        if r.stat in ("collapsible_fraction", "gravel_fraction"):
            assert r.mean == 1.0
        else:
            assert r.mean == 0.0


def test_sweep_is_reproducible_and_thread_independent():
    a = emit(run_sweep(small_cfg()))
    b = emit(run_sweep(small_cfg(threads=3)))
    assert a == b


def test_csv_format_and_roundtrip():
    rows = run_sweep(small_cfg(stats=["core_f1", "betti"]))
    text = emit(rows, "csv")
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert all(len(ln.split(",")) == 8 for ln in lines)
    assert read_rows(text, "csv") == rows
    assert read_rows(emit(rows, "json"), "json") == rows
    assert emit([], "csv") == ",".join(CSV_HEADER) + "\n"


def test_theory_column_matches_thresholds():
    rows = run_sweep(small_cfg(c_min=3.0, c_max=3.0, trials=1, stats=["core_f1", "core_f2", "betti", "r_shadow"]))
    r = regime_densities(3.0, 2)
    expect = {"core_f1": r.core_dminus1_density, "core_f2": r.core_d_density,
              "betti": r.betti_density, "r_shadow": r.r_shadow_density}
    for row in rows:
        assert abs(row.theory - expect[row.stat]) < 1e-10


def test_stderr_definition():
    rows = run_sweep(small_cfg(c_min=3.0, c_max=3.0, trials=4, stats=["core_f2"]))
    assert rows[0].trials == 4 and rows[0].stderr >= 0


def test_r_shadow_cap():
    with pytest.raises(RuntimeError):
        run_sweep(small_cfg(n=[500], stats=["r_shadow"]))


def test_config_validation():
    with pytest.raises(ValueError):
        small_cfg(trials=0)
    with pytest.raises(ValueError):
        small_cfg(stats=["bogus"])
    with pytest.raises(ValueError):
        small_cfg(c_step=0.0)


def test_config_file(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("# sweep\nd = 2\nn = 20,30\nc_min = 1\nc_max = 2\nc_step = 0.5\nstats = core_f1\nforce = yes\n")
    cfg = SweepConfig.from_mapping(read_config_file(str(p)))
    assert cfg.n == [20, 30] and cfg.c_grid == [1.0, 1.5, 2.0] and cfg.force
    with pytest.raises(ValueError):
        SweepConfig.from_mapping({"nonsense": "1"})


def test_theory_delta_and_fractions():
    assert theory_value("delta_k", 3.0, 2, 1) == pytest.approx(3.0 * (1 - 0.049787068) ** 2, rel=1e-6)
    assert theory_value("gravel_fraction", 2.0, 2) == 1.0
    assert theory_value("collapsible_fraction", 3.0, 2) == 0.0


def test_cli_commands(tmp_path, capsys):
    y = tmp_path / "y.json"
    assert main(["--seed", "2", "sample", "--n", "30", "--c", "3", "--out", str(y)]) == 0
    Y = load_complex(str(y))
    assert Y.n == 30 and Y.d == 2

    main(["betti", "--in", str(y), "--via-core"])
    out = json.loads(capsys.readouterr().out)
    assert {"betti", "rank", "f_d", "f_dminus1"} <= set(out)
    main(["betti", "--in", str(y), "--field", "prime"])
    assert json.loads(capsys.readouterr().out)["betti"] == out["betti"]

    main(["rshadow", "--in", str(y)])
    assert "shadow_size" in json.loads(capsys.readouterr().out)

    main(["collapse", "--in", str(y)])
    assert "phases" in json.loads(capsys.readouterr().out)

    main(["thresholds", "--d", "2,3"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("d,gamma_d,c_d") and len(lines) == 3

    main(["curves", "--c-min", "2", "--c-max", "3", "--c-step", "0.5", "--boundary-points"])
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 3 + 2

    main(["tree", "--c", "3", "--depth", "3", "--trials", "500", "--stat", "collapse_prob"])
    assert json.loads(capsys.readouterr().out)["k"] == 2

    cfg = tmp_path / "s.txt"
    cfg.write_text("n = 20\nc_min = 3\nc_max = 3\ntrials = 1\nstats = core_f1\n")
    out_csv = tmp_path / "s.csv"
    main(["--format", "csv", "sweep", "--config", str(cfg), "--trials", "2", "--out", str(out_csv)])
    rows = read_rows(out_csv.read_text())
    assert rows[0].trials == 2 and rows[0].n == 20


def test_cli_text_sample(capsys):
    main(["sample", "--n", "8", "--p", "0.5", "--format", "csv", "--seed", "1"])
    first = capsys.readouterr().out.splitlines()[0]
    assert first == "8 2"
