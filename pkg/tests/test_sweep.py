from __future__ import annotations

import csv
import json

import pytest

from fraclap.sweep import (
    EXIT_INVALID,
    EXIT_OK,
    ConfigError,
    SweepRow,
    chart,
    chart_data,
    parse_config,
    plan,
    run_config,
)

MINIMAL = """
[sweep]
schema_version = 1
seed = 3
tasks = simulate

[grid]
n = 128
L = 20

[sim]
t_max = 30

[problem]
N = 1
beta = 1
p = 1
q_list = 1.5
initial = gaussian:1,1

[output]
directory = {out}
"""

RANGE = """
[sweep]
schema_version = 1
tasks =

[problem]
N = 1
beta = 1
p = 1
q_range = 1.1, 3.0, 0.1
"""


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text.format(out=tmp_path / "out"))
    return p


def test_minimal_config(tmp_path):
    code, out = run_config(_write(tmp_path, MINIMAL))
    assert code == EXIT_OK
    rows = list(csv.DictReader(open(out / "rows.csv")))
    assert len(rows) == 1 and rows[0]["outcome"] == "blowup"
    runs = list((out / "runs").glob("*.json"))
    assert len(runs) == 1
    assert json.loads(runs[0].read_text())["diagnostics"]["classification"] == "blowup"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["agreement"] == 1.0 and summary["seed"] == 3


def test_q_range_classification_only():
    cfg = parse_config(RANGE)
    jobs = plan(cfg)
    assert len(jobs) == 20
    assert [q for _, _, q in jobs][:3] == [1.1, 1.2, 1.3] and jobs[-1][2] == 3.0
    from fraclap.sweep import _execute

    rows = [_execute(cfg, prob, i, q) for prob, i, q in jobs]
    for r in rows:
        assert r.predicted_regime.startswith("T1_") == (r.q <= 2.0)
        assert r.outcome == ""


def test_gamma_constraint_exit_code(tmp_path, caplog):
    bad = MINIMAL.replace("p = 1\n", "p = 1\ngamma = 1.0\n")
    code, out = run_config(_write(tmp_path, bad))
    assert code == EXIT_INVALID and out is None
    assert "0<γ<N" in caplog.text
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize(
    "edit, where",
    [(("schema_version = 1", "schema_version = 9"), "schema_version"), (("n = 128", "n = 100"), "grid"),
     (("beta = 1", "beta = 2.5"), "beta"), (("t_max = 30", "t_max = -1"), "sim"),
     (("initial = gaussian:1,1", "initial = sinc:1"), "initial"), (("q_list = 1.5", "q_list ="), "q_list")],
)
def test_validation_names_field(edit, where):
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace(*edit).format(out="x"))
    assert where in str(exc.value)


def test_unreadable_config(tmp_path):
    assert run_config(tmp_path / "missing.ini")[0] == EXIT_INVALID
    p = tmp_path / "junk.ini"
    p.write_text("no sections here")
    assert run_config(p)[0] == EXIT_INVALID


def test_skipped_combinations_logged(caplog):
    cfg = parse_config(RANGE.replace("q_range = 1.1, 3.0, 0.1", "q_list = 0.9, 1.0, 1.5"))
    assert [q for _, _, q in plan(cfg)] == [1.5]
    assert caplog.text.count("skipping") == 2


def test_determinism_with_threads(tmp_path):
    cfg_text = MINIMAL.replace("q_list = 1.5", "q_list = 1.3, 1.5, 1.7")
    a = run_config(_write(tmp_path, cfg_text.replace("{out}", str(tmp_path / "a")), "a.ini"))[1]
    b = run_config(_write(tmp_path, cfg_text.replace("{out}", str(tmp_path / "b")), "b.ini"), {"threads": 2})[1]
    assert (a / "rows.csv").read_bytes() == (b / "rows.csv").read_bytes()
    assert (a / "chart.dat").read_bytes() == (b / "chart.dat").read_bytes()


def _row(q, outcome, regime="T1_nonexistence_strict"):
    return SweepRow("main", 0, 1.0, q, 1.0, 1, None, "gaussian:1,1", regime, regime == "outside_theorems", outcome)


def test_chart_examples():
    assert chart([_row(1.5, "blowup"), _row(1.8, "blowup")])["agreement"] == 1.0
    s = chart([_row(1.5, "undecided"), _row(1.8, "undecided")])
    assert s["agreement"] == "not-applicable" and s["decided"] == 0
    s = chart([_row(1.2, "blowup"), _row(1.5, "decay"), _row(1.8, "undecided"), _row(3.0, "decay", "outside_theorems")])
    assert s["decided"] == 2 and s["agreement"] == 0.5
    assert [d["q"] for d in s["disagreements"]] == [1.5]
    assert s["exploratory"][0]["q"] == 3.0
    with pytest.raises(ValueError, match="empty"):
        chart([])


def test_chart_data_markers():
    rows = [_row(1.5, "blowup")]
    rows[0].gamma = 0.5
    data, markers = chart_data(rows)
    assert data.splitlines()[1].split()[:3] == ["1.5", "1", "1"]
    assert "# q_star\n2.0 -1\n2.0 1" in markers
    assert "# q_star_star\n3.0 -1" in markers
