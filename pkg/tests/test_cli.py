import numpy as np
import pytest

from nlplasmon import cli
from nlplasmon.errors import ResonanceError
from nlplasmon.tables import SweepTable


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_spectrum_tables(tmp_path):
    assert run("spectrum", "--out", tmp_path, "--lmax", 120) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["eps_local.tsv", "eps_nonlocal_0.0005.tsv", "eps_nonlocal_0.01.tsv",
                     "eps_nonlocal_0.02.tsv", "eps_nonlocal_0.05.tsv"]
    counts = [SweepTable.read(tmp_path / f"eps_nonlocal_{h}.tsv").abscissa.size
              for h in ("0.0005", "0.01", "0.02", "0.05")]
    assert counts == sorted(counts, reverse=True) and len(set(counts)) == 4
    local = SweepTable.read(tmp_path / "eps_local.tsv")
    assert local.column("eps")[0] == -2.0


def test_outputs_are_byte_identical(tmp_path):
    for sub in ("a", "b"):
        assert run("absorption", "--out", tmp_path / sub, "--omega", "0.3:1.5:50") == 0
        assert run("nearfield", "--out", tmp_path / sub, "--omega", "0.4:1.0:30", "--d", "0.1") == 0
    for name in ("ffext_nonlocal.tsv", "ffext_local.tsv", "nfext_nonlocal_0.1.tsv", "nfext_local_0.1.tsv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        assert b"\r" not in a


def test_absorption_defaults(tmp_path):
    assert run("absorption", "--out", tmp_path) == 0
    t = SweepTable.read(tmp_path / "ffext_nonlocal.tsv")
    assert t.columns == ("omega_hat", "absorption")
    assert t.abscissa[0] == pytest.approx(0.3) and t.abscissa[-1] == pytest.approx(1.5)


def test_nearfield_defaults(tmp_path):
    assert run("nearfield", "--out", tmp_path) == 0
    for d in ("0.1", "0.3", "0.5"):
        t = SweepTable.read(tmp_path / f"nfext_nonlocal_{d}.tsv")
        assert t.abscissa[0] == pytest.approx(0.4) and t.abscissa[-1] == pytest.approx(1.0)


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\ngamma = 0.5\nomega = 0.3:1.5:40\n")
    assert run("absorption", "--config", cfg, "--out", tmp_path / "cfg") == 0
    assert run("absorption", "--config", cfg, "--gamma", 0.05, "--out", tmp_path / "cli") == 0
    broad = SweepTable.read(tmp_path / "cfg" / "ffext_local.tsv").column("absorption").max()
    sharp = SweepTable.read(tmp_path / "cli" / "ffext_local.tsv").column("absorption").max()
    assert sharp > 5 * broad


@pytest.mark.parametrize("argv", [
    ("absorption", "--h", "-1"),
    ("absorption", "--omega", "0.3:1.5"),
    ("absorption", "--omega", "0:1:10"),
    ("absorption", "--h", "0.01,0.02"),
    ("nearfield", "--d", "x"),
    ("spectrum", "--lmax", "0"),
    ("spectrum", "--geometry", "no/such/file.off"),
    ("spectrum", "--geometry", "icosphere:9"),
    ("spectrum", "--geometry", "icosphere:1", "--contour", "imag:2"),
    ("bogus",),
    ("absorption", "--unknown", "1"),
])
def test_configuration_errors(tmp_path, argv):
    assert run(*argv, "--out", tmp_path) == 1


def test_config_errors_carry_line_numbers(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gamma = 0.1\ngama = 2\n")
    assert run("absorption", "--config", cfg, "--out", tmp_path) == 1
    assert "bad.cfg:2" in capsys.readouterr().err
    assert run("absorption", "--config", tmp_path / "missing.cfg") == 1


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise ResonanceError("on a root", estimate=0.0)

    monkeypatch.setattr(cli.so, "absorption_spectrum", boom)
    assert run("absorption", "--out", tmp_path) == 3


@pytest.mark.parametrize("command, phrase", [
    ("spectrum", "eigenvalue-index plot"),
    ("absorption", "absorption-spectrum plot"),
    ("nearfield", "near-field plot"),
    ("validate", "validate_report.tsv"),
])
def test_help_describes_the_output(capsys, command, phrase):
    with pytest.raises(SystemExit) as info:
        run(command, "--help")
    assert info.value.code == 0
    assert phrase in " ".join(capsys.readouterr().out.split())


def test_mesh_spectrum(tmp_path):
    argv = ("spectrum", "--geometry", "icosphere:1", "--h", 0.2, "--contour", "imag:0.5:1.3", "--out", tmp_path)
    assert run(*argv) == 0
    lines = (tmp_path / "poles_0.2.tsv").read_text().splitlines()
    assert len(lines) == 2
    fields = lines[1].split("\t")
    assert fields[4:] == ["Surface", "3"]
    assert abs(float(fields[1]) - 0.6136) < 1e-3


def test_validate_analytic_subset(tmp_path, capsys):
    assert run("validate", "--skip-bem", "--out", tmp_path) == 0
    rows = (tmp_path / "validate_report.tsv").read_text().splitlines()
    assert rows[0] == "#check\tvalue\tthreshold\tstatus"
    assert all(r.endswith("\tpass") for r in rows[1:])
    assert capsys.readouterr().out.splitlines() == rows
