import pytest

from rfhom.cli import main
from rfhom.config import ConfigError, parse_config
from rfhom.decomposition import load_record
from rfhom.experiment import read_curve_csv

FAST = """
[pulse]
cycles_per_pulse = 10
[sweep]
delays = 13
shots = 4
phase_count = 8
[noise]
seed = 5
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(FAST)
    return p


def test_fit_writes_record(tmp_path, capsys):
    out = tmp_path / "dec.txt"
    assert main(["fit", "--output", str(out)]) == 0
    dec = load_record(out.read_text())
    assert dec.fidelity >= 0.99
    assert "fidelity=" in capsys.readouterr().out


def test_fit_infeasible_bounds_exit_code(tmp_path, capsys):
    rc = main(["fit", "--grid", "0.1,0.5", "--bounds", "0.3", "--output", str(tmp_path / "d.txt")])
    assert rc == 2
    assert "type=InfeasibleBounds" in capsys.readouterr().err
    assert not (tmp_path / "d.txt").exists()


def test_bounds_count_mismatch(tmp_path, capsys):
    assert main(["fit", "--bounds", "1,2", "--output", str(tmp_path / "d.txt")]) == 2
    assert "ConfigError" in capsys.readouterr().err


def test_sweep_phac_multiple_curves_and_plot(tmp_path, cfg):
    out = tmp_path / "hom.csv"
    svg = tmp_path / "hom.svg"
    rc = main(["sweep-phac", "--config", str(cfg), "--amplitude", "0.2,0.8", "--output", str(out),
               "--plot", str(svg)])
    assert rc == 0
    for label in ("alpha0.2", "alpha0.8"):
        curve = read_curve_csv(tmp_path / f"hom_{label}.csv")
        assert len(curve.delays) == 13 and curve.shots[0] == 4
    assert svg.read_text().lstrip().startswith("<?xml")


def test_sweep_byte_identical_rerun(tmp_path, cfg):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["sweep-phac", "--config", str(cfg), "--amplitude", "0.4", "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_conditional_from_record(tmp_path, cfg):
    dec = tmp_path / "dec.txt"
    assert main(["fit", "--output", str(dec)]) == 0
    out = tmp_path / "cond.csv"
    assert main(["sweep-conditional", "--config", str(cfg), "--noiseless", "--decomposition", str(dec),
                 "--output", str(out)]) == 0
    curve = read_curve_csv(out)
    assert curve.g2_normalized.min() < 0.02
    assert curve.metadata["fidelity"] == pytest.approx(load_record(dec.read_text()).fidelity)


def test_oracle_all_kinds(tmp_path, cfg):
    dec = tmp_path / "dec.txt"
    main(["fit", "--output", str(dec)])
    out = tmp_path / "o.csv"
    assert main(["oracle", "--config", str(cfg), "--decomposition", str(dec), "--output", str(out)]) == 0
    for kind in ("phac", "single", "conditional"):
        assert (tmp_path / f"o_{kind}.csv").exists()


def test_oracle_conditional_needs_record(tmp_path, capsys):
    assert main(["oracle", "--kind", "conditional", "--output", str(tmp_path / "o.csv")]) == 2
    assert "ValueError" in capsys.readouterr().err


def test_snr_report(capsys):
    assert main(["snr", "--snr-db", "25@0.4", "--amplitude", "0.4,1.45"]) == 0
    out = capsys.readouterr().out
    assert "amplitude=0.4 snr_db=25.0000" in out and "amplitude=1.45 snr_db=36.1862" in out


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        parse_config("[sweep]\nshotz = 3\n")
    with pytest.raises(ConfigError):
        parse_config("[extra]\na = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[sweep]\ngate = maybe\n")
    s = parse_config("[fit]\ngrid = 0.1, 0.2\nbounds = 3\n")
    assert s.grid == (0.1, 0.2) and s.bounds_for(2) == (3.0, 3.0)


def test_missing_config_file(tmp_path, capsys):
    assert main(["fit", "--config", str(tmp_path / "nope.ini")]) == 2
    assert "FileNotFoundError" in capsys.readouterr().err
