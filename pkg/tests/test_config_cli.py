import numpy as np
import pytest

from simboot.cli import main
from simboot.config import DEFAULT_ALPHAS, dump_config, parse_config, replace
from simboot.csvio import read_csv
from simboot.errors import ConfigError
from simboot.experiments import BAND_HEADER, BIAS_HEADER, CORRECTION_HEADER, COVERAGE_HEADER

SMALL = ["--n", "60", "--k", "5", "--b", "100", "--m", "10", "--reps", "2", "--alpha", "0.1", "--alpha", "0.3"]


def test_defaults():
    cfg = parse_config()
    assert (cfg.n, cfg.k, cfg.h, cfg.b, cfg.m, cfg.scheme, cfg.seed) == (400, 71, 0.3, 10000, 5000, "gauss", 42)
    assert cfg.alphas == DEFAULT_ALPHAS
    desk = parse_config(overrides={"preset": "desk"})
    assert (desk.b, desk.m) == (2000, 500)


def test_precedence(tmp_path):
    path = tmp_path / "run.config"
    path.write_text("# comment\npreset = desk\nb = 300\nh = 0.12  # inline comment\n")
    cfg = parse_config(path, {"b": 50})
    assert (cfg.preset, cfg.m, cfg.h, cfg.b) == ("desk", 500, 0.12, 50)


def test_round_trip(tmp_path):
    cfg = parse_config(overrides={"family": "lq", "alphas": [0.1, 0.2], "centers": [0.1, 0.3, 0.9], "h": 0.2})
    assert cfg.k == 3
    path = tmp_path / "again.config"
    path.write_text(dump_config(cfg))
    assert parse_config(path) == cfg


@pytest.mark.parametrize(
    "text,key",
    [
        ("alphas = 1.5\n", "alphas"),
        ("h = -1\n", "h"),
        ("colour = red\n", "colour"),
        ("family = cubic\n", "family"),
        ("n = many\n", "n"),
        ("family = qt\nscheme = exp\n", "dgp"),
        ("family = qt\ndgp = flat\n", "scheme"),
    ],
)
def test_config_errors_name_key_and_line(tmp_path, text, key):
    path = tmp_path / "bad.config"
    path.write_text("seed = 1\n" + text)
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert err.value.key == key
    assert f"'{key}'" in str(err.value)


def test_config_error_line_number(tmp_path):
    path = tmp_path / "bad.config"
    path.write_text("seed = 1\n\nalphas = 0.1, 1.5\n")
    with pytest.raises(ConfigError, match="line 3"):
        parse_config(path)
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.config")
    with pytest.raises(ConfigError):
        replace(parse_config(), band_alpha=0.0)


def test_cli_band(tmp_path):
    assert main(["band", "--preset", "desk", "--b", "200", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "band.csv")
    assert header == BAND_HEADER
    rows = np.array(rows)
    assert rows.shape == (71, 6)
    assert np.all(rows[:, 2] <= rows[:, 1]) and np.all(rows[:, 1] <= rows[:, 3])
    assert parse_config(tmp_path / "band.config").b == 200


def test_cli_band_single_model_halfwidth(tmp_path):
    assert main(["band", "--n", "50", "--k", "1", "--h", "0.5", "--b", "100", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "band.csv")
    center, est, lo, hi, z, _ = rows[0]
    x = np.linspace(0, 1, 50)
    w = np.maximum(0.75 * (1 - ((x - center) / 0.5) ** 2), 0)
    assert (hi - lo) / 2 == pytest.approx(z / np.sqrt(w.sum()), rel=1e-10)


def test_cli_band_from_data_file(tmp_path):
    data = tmp_path / "xy.txt"
    x = np.linspace(0, 1, 40)
    np.savetxt(data, np.column_stack([x, np.sin(6 * x)]), delimiter=",", header="x,y")
    assert main(["band", "--data", str(data), "--k", "4", "--b", "100", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "band.csv")
    assert len(rows) == 4 and all(np.isnan(r[5]) for r in rows)


@pytest.mark.parametrize(
    "command,header",
    [("coverage", COVERAGE_HEADER), ("correction", CORRECTION_HEADER), ("bias", BIAS_HEADER)],
)
def test_cli_experiments(tmp_path, command, header):
    assert main([command, *SMALL, "--out", str(tmp_path)]) == 0
    got, rows = read_csv(tmp_path / f"{command}.csv")
    assert got == header
    rows = np.array(rows)
    if command == "bias":
        assert rows.shape == (5, 4) and np.all(rows[:, 1:] >= 0)
    else:
        assert rows[:, 0].tolist() == [0.1, 0.3]
        assert np.all((rows[:, 1:] >= 0) & (rows[:, 1:] <= 1))


def test_cli_quantile(tmp_path):
    args = ["--family", "qt", "--dgp", "flat", "--scheme", "exp", *SMALL, "--out", str(tmp_path)]
    assert main(["band", *args]) == 0
    assert main(["coverage", *args]) == 0
    assert main(["bias", *args]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["coverage", "--alpha", "1.5", "--out", str(tmp_path)]) == 2
    assert "alphas" in capsys.readouterr().err
    # centers between design points with nothing inside the kernel support
    assert main(["band", "--n", "5", "--k", "40", "--h", "0.01", "--b", "50", "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_coverage_byte_identical_across_threads(tmp_path):
    outputs = []
    for t in (1, 3):
        out = tmp_path / f"t{t}"
        assert main(["coverage", *SMALL, "--threads", str(t), "--out", str(out)]) == 0
        outputs.append((out / "coverage.csv").read_bytes())
    assert outputs[0] == outputs[1]
