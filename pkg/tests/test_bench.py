import json

import pytest

from gapa import bench
from gapa.bench import (
    ALGORITHMS,
    FIELDS,
    ConfigError,
    ResultRow,
    config_from_dict,
    fingerprint,
    load_configs,
    parse_rows,
    report,
    run_experiment,
    sweep,
    sweep_table,
)


def quick(**extra):
    raw = {"algorithm": "cutoff-pc", "dataset": "karate", "iterations": 4, "pop_size": 8}
    raw.update(extra)
    return config_from_dict(raw)


def test_defaults_follow_parameter_table():
    cfg = config_from_dict({"algorithm": "qattack", "dataset": "karate"})
    assert (cfg.params.pc, cfg.params.pm, cfg.params.s, cfg.params.iterations, cfg.rate) == (0.8, 0.1, 100, 1500, 0.1)
    assert set(ALGORITHMS) == {"qattack", "cda-eda", "sixdst", "cutoff-pc", "lpa-ga", "lpa-eda"}


@pytest.mark.parametrize("raw", [
    {"algorithm": "qattack", "dataset": "karate", "pool_kind": "node-removal"},
    {"algorithm": "sixdst", "dataset": "karate", "pool_kind": "edge-removal"},
    {"algorithm": "nope", "dataset": "karate"},
    {"algorithm": "qattack"},
    {"algorithm": "qattack", "dataset": "karate", "colour": "red"},
    {"algorithm": "qattack", "dataset": "karate", "repetitions": 0},
    {"algorithm": "qattack", "dataset": "karate", "pc": 2},
    {"algorithm": "qattack", "dataset": "karate", "mode": "GPU"},
    {"algorithm": "qattack", "dataset": "karate", "rate": 0},
])
def test_config_rejections(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_load_configs_list_and_errors():
    text = json.dumps([{"algorithm": "sixdst", "dataset": "ba100"}, {"algorithm": "lpa-ga", "dataset": "karate"}])
    assert [c.algorithm for c in load_configs(text)] == ["sixdst", "lpa-ga"]
    for bad in ("{", "[]", "3"):
        with pytest.raises(ConfigError):
            load_configs(bad)


def test_repetitions_give_distinct_seeds():
    rows = run_experiment(quick(repetitions=3, seed=10))
    assert [r.seed for r in rows] == [10, 11, 12]
    assert all(r.pc_attacked <= r.pc_unattacked for r in rows)
    assert all(r.q_attacked is None and r.auc_attacked is None for r in rows)


def test_metric_columns_per_task():
    cda = run_experiment(config_from_dict({"algorithm": "qattack", "dataset": "karate",
                                           "iterations": 2, "pop_size": 4}))[0]
    assert cda.q_unattacked == pytest.approx(0.3806706, abs=1e-6)
    assert 0.0 <= cda.nmi <= 1.0 and cda.mcn_attacked is None
    lpa = run_experiment(config_from_dict({"algorithm": "lpa-eda", "dataset": "karate",
                                           "iterations": 2, "pop_size": 4}))[0]
    assert lpa.auc_unattacked is not None and lpa.precision_attacked is not None
    cnd = run_experiment(config_from_dict({"algorithm": "sixdst", "dataset": "ba100",
                                           "iterations": 2, "pop_size": 4}))[0]
    assert cnd.mcn_unattacked == 100 and cnd.pc_unattacked == 4950


def test_report_round_trip():
    rows = run_experiment(quick(repetitions=2))
    text = report(rows)
    assert text.splitlines()[0] == ",".join(FIELDS)
    assert parse_rows(text) == rows


def test_header_only_csv():
    assert report([]) == ",".join(FIELDS) + "\n"
    assert parse_rows(report([])) == []
    with pytest.raises(ValueError):
        parse_rows("a,b\n")


def test_table_widths_fit_cells():
    rows = [ResultRow("cnd-pc", "cutoff-pc", "a-very-long-dataset-name", "S", 1, 1, 8, 4, 0, 0.123456789)]
    lines = report(rows, "table").splitlines()
    header, body = lines
    col = FIELDS.index("dataset")
    starts = [i for i in range(len(header)) if header[i] != " " and (i == 0 or header[i - 1] == " ")]
    assert body[starts[col]:].startswith("a-very-long-dataset-name")
    assert len(body[starts[col]:starts[col + 1]].rstrip()) <= starts[col + 1] - starts[col] - 2
    with pytest.raises(ValueError):
        report(rows, "xml")


def test_fingerprint_ignores_wall_time():
    rows = run_experiment(quick())
    again = run_experiment(quick())
    assert report(rows) != report(again) or rows[0].wall_time_s == again[0].wall_time_s
    assert fingerprint(report(rows)) == fingerprint(report(again))
    again[0].pc_attacked += 1
    assert fingerprint(report(rows)) != fingerprint(report(again))


def test_sweep_rules():
    cfg = quick()
    with pytest.raises(ConfigError):
        sweep(cfg, "pop_size", [])
    with pytest.raises(ConfigError):
        sweep(cfg, "pop_size", [40, 20])
    with pytest.raises(ConfigError):
        sweep(cfg, "iterations", [1])


def test_sweep_pop_size_trend():
    cfg = config_from_dict({"algorithm": "sixdst", "dataset": "ba100", "iterations": 5, "mode": "serial",
                            "repetitions": 3})
    rows = sweep(cfg, "pop_size", [20, 40, 60])
    assert len(rows) == 9
    assert [r.pop_size for r in rows] == [20] * 3 + [40] * 3 + [60] * 3
    medians = [t for _, t in sweep_table(rows, "pop_size")]
    assert medians == sorted(medians)


def test_sweep_pn_rows(tmp_path):
    pytest.importorskip("matplotlib")
    rows = sweep(quick(mode="M"), "pn", [1, 2], plot=str(tmp_path / "scaling.png"))
    assert [r.pn for r in rows] == [1, 2]
    assert rows[0].pc_attacked == rows[1].pc_attacked
    assert (tmp_path / "scaling.png").stat().st_size > 0


def write_config(tmp_path, raw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return str(path)


def test_cli_run_and_report(tmp_path, capsys):
    cfg = write_config(tmp_path, {"algorithm": "cutoff-pc", "dataset": "karate", "iterations": 3, "pop_size": 6})
    out = tmp_path / "rows.csv"
    assert bench.main(["run", cfg, "-o", str(out)]) == 0
    rows = parse_rows(out.read_text())
    assert len(rows) == 1 and rows[0].dataset == "karate"
    assert bench.main(["report", str(out)]) == 0
    assert "pc_attacked" in capsys.readouterr().out


def test_cli_sweep(tmp_path):
    cfg = write_config(tmp_path, {"algorithm": "cutoff-pc", "dataset": "karate", "iterations": 2})
    out = tmp_path / "sweep.csv"
    assert bench.main(["sweep", cfg, "--axis", "pop_size", "--values", "4,8", "-o", str(out)]) == 0
    assert [r.pop_size for r in parse_rows(out.read_text())] == [4, 8]
    assert bench.main(["sweep", cfg, "--axis", "pop_size", "--values", "8,4"]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    bad = write_config(tmp_path, {"algorithm": "qattack", "dataset": "karate", "pool_kind": "node-removal"})
    assert bench.main(["run", bad]) == 2
    assert "config error" in capsys.readouterr().err
    missing = write_config(tmp_path, {"algorithm": "sixdst", "dataset": "no-such-graph"})
    assert bench.main(["run", missing]) == 3
    broken = tmp_path / "broken.txt"
    broken.write_text("0 1\n1 2 3\n")
    assert bench.main(["run", write_config(tmp_path, {"algorithm": "sixdst", "dataset": str(broken)})]) == 3
    assert bench.main(["run", str(tmp_path / "absent.json")]) == 2
    with pytest.raises(SystemExit):
        bench.main([])
