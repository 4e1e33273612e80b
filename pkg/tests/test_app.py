import pytest

import app
from app import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

FIXED_RUN = ["--fixture", "no_local_minimum", "--no-randomize-start-target"]


def test_run_writes_one_row(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["run", *FIXED_RUN, "--out", str(out)]) == EXIT_OK
    header, row = out.read_text(encoding="utf-8").splitlines()
    assert header == "run,solved,st_ms,comm_pct_x,comm_pct_y,seed"
    assert row.startswith("0,true,")


def test_trace_goes_to_stdout(capsys):
    assert main(["run", *FIXED_RUN, "--trace"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("tick,x,y,")
    assert len(lines) > 10


def test_batch_with_overrides(capsys):
    assert main(["batch", "--barriers", "1", "--nruns", "3", "--seed", "5", "--coop-x", "0110", "--coop-y", "0110"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 4


def test_too_many_barriers_is_a_configuration_error(capsys):
    assert main(["batch", "--barriers", "4"]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_bad_coop_level(capsys):
    assert main(["batch", "--nruns", "1", "--coop-x", "01x0"]) == EXIT_CONFIG


def test_unknown_fixture():
    assert main(["run", "--fixture", "maze"]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["batch", "--config", str(tmp_path / "absent.toml")]) == EXIT_CONFIG


def test_config_file_error_names_the_line(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text('[world]\ntarget = [0.8, 0.7]\nvehicle_start = [0.2, 0.3]\n[agents.x]\ncoop = "0110"\n'
                    '[agents.y]\ncoop = "0110"\n[experiment]\nnbarriers = 4\n', encoding="utf-8")
    assert main(["batch", "--config", str(path)]) == EXIT_CONFIG
    assert "line 9" in capsys.readouterr().err


def test_flags_override_the_config_file(tmp_path, capsys):
    path = tmp_path / "exp.toml"
    path.write_text('[world]\ntarget = [0.8, 0.7]\nvehicle_start = [0.2, 0.3]\n[agents.x]\ncoop = "0110"\n'
                    '[agents.y]\ncoop = "1111"\n[experiment]\nnruns = 50\nnbarriers = 0\n', encoding="utf-8")
    args = app.build_parser().parse_args(["batch", "--config", str(path), "--nruns", "2"])
    config, coop_x, coop_y = app.build_experiment(args)
    assert config.nruns == 2
    assert config.nbarriers == 0
    assert (str(coop_x), str(coop_y)) == ("0110", "1111")

    assert main(["batch", "--config", str(path), "--nruns", "2"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_runtime_failure_exit_code(monkeypatch, capsys):
    def broken(*args, **kwargs):
        raise RuntimeError("worker died")

    monkeypatch.setattr(app, "run_batch", broken)
    assert main(["batch", "--nruns", "1"]) == EXIT_RUNTIME
    assert "worker died" in capsys.readouterr().err


def test_oracle_labels_unsolvable_fixture(capsys):
    assert main(["oracle", "--fixture", "unsolvable", "--nruns", "2", "--no-randomize-start-target"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1:] == ["0,3,false", "1,3,false"]


def test_sweep_barriers_pair_must_parse():
    assert main(["sweep-barriers", "--nruns", "1", "--pair-a", "0110+0110+0110"]) == EXIT_CONFIG


def test_command_is_required():
    with pytest.raises(SystemExit):
        main([])


def test_sweep_full_grid(capsys):
    assert main(["sweep-full", "--barriers", "0", "--nruns", "1", "--grid", "dnf"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 17
    assert lines[0].startswith("coop_y,0000,1000,0100,")
    assert lines[1] == "0000," + ",".join(["0"] * 16)
