from __future__ import annotations

import subprocess
import sys

import pytest

from helmray.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, build_parser, main
from helmray.output import CSV_HEADER

SMALL = (
    "scenario.n_rays = 51\n"
    "scenario.z_max = 2000\n"
    "scenario.snapshot_every = 20\n"
)


def _cfg(tmp_path, text=SMALL, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", str(_cfg(tmp_path)), "--output-dir", str(out)])
    assert code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["run.cfg", "trajectories.csv", "trajectories.svg"]
    assert (out / "trajectories.csv").read_text().startswith(CSV_HEADER + "\n")
    assert "wrote trajectories" in capsys.readouterr().err


def test_run_with_comparator(tmp_path):
    text = SMALL + "output.emit_svg = false\ncomparator.steps = 20\ncomparator.history_every = 10\n"
    out = tmp_path / "out"
    assert main(["run", str(_cfg(tmp_path, text)), "--output-dir", str(out), "--quiet"]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["comparator.csv", "run.cfg", "trajectories.csv"]
    rows = (out / "comparator.csv").read_text().splitlines()
    assert len(rows) == 1 + 3 * 3
    assert rows[1].endswith(",bohm")


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["run", str(_cfg(tmp_path, SMALL + "output.dir = from_cfg\n")), "--quiet"]) == EXIT_OK
    assert (tmp_path / "from_cfg" / "trajectories.csv").exists()


def test_quiet_suppresses_info(tmp_path, capsys):
    assert main(["validate", str(_cfg(tmp_path)), "--quiet"]) == EXIT_OK
    assert capsys.readouterr().err == ""
    assert main(["validate", str(_cfg(tmp_path))]) == EXIT_OK
    assert "valid" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["validate", str(_cfg(tmp_path, "units.lambda0_over_w0 = 0\n"))]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "units.lambda0_over_w0" in err and "line 1" in err
    assert main(["run", str(_cfg(tmp_path, "scenario.nrays_ = 3\n"))]) == EXIT_CONFIG
    assert "scenario.n_rays" in capsys.readouterr().err


def test_run_time_failures(tmp_path):
    # an unresolvable comparator grid is a configuration error found during the run
    text = SMALL + "comparator.n_points = 64\ncomparator.packet_sigma = 0.05\ncomparator.steps = 2\n"
    assert main(["run", str(_cfg(tmp_path, text)), "--output-dir", str(tmp_path / "o"), "--quiet"]) == EXIT_CONFIG
    text = SMALL + "comparator.packet_x0 = 12\ncomparator.packet_k = 10\ncomparator.dt = 0.01\n"
    assert main(["run", str(_cfg(tmp_path, text)), "--output-dir", str(tmp_path / "o"), "--quiet"]) == EXIT_NUMERICAL


def test_io_errors_exit_4(tmp_path):
    assert main(["validate", str(tmp_path / "missing.cfg"), "--quiet"]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", str(_cfg(tmp_path)), "--output-dir", str(blocker / "sub"), "--quiet"]) == EXIT_IO


def test_figure_command(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(_cfg(tmp_path)), "--output-dir", str(out), "--quiet"]) == EXIT_OK
    svg = tmp_path / "again.svg"
    assert main(["figure", str(out / "trajectories.csv"), str(svg)]) == EXIT_OK
    assert svg.read_bytes() == (out / "trajectories.svg").read_bytes()
    assert main(["figure", str(out / "trajectories.csv"), "x.svg", "--output-dir", str(tmp_path / "figs"),
                 "--quiet"]) == EXIT_OK
    assert (tmp_path / "figs" / "x.svg").exists()
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    assert main(["figure", str(bad), str(svg), "--quiet"]) == EXIT_CONFIG
    assert main(["figure", str(tmp_path / "none.csv"), str(svg), "--quiet"]) == EXIT_IO


def test_figure_warns_without_overlay(tmp_path, capsys):
    out = tmp_path / "out"
    text = "scenario.name = single_slit\nscenario.n_rays = 51\nscenario.z_max = 100\n"
    assert main(["run", str(_cfg(tmp_path, text)), "--output-dir", str(out), "--quiet"]) == EXIT_OK
    assert "waist-lines" not in (out / "trajectories.svg").read_text()
    capsys.readouterr()
    assert main(["figure", str(out / "trajectories.csv"), str(tmp_path / "f.svg")]) == EXIT_OK
    assert "overlay" in capsys.readouterr().err


def test_parser_requires_command():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args([])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "helmray", "validate", str(_cfg(tmp_path)), "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert proc.stderr == ""
