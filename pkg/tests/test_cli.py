"""Command-line workflows: artifacts, determinism, seed precedence, CDFs."""

import numpy as np
import pytest

from isacsim import cli
from isacsim.config import load_run_config
from isacsim.env import mrt_warm_start
from isacsim.metrics import sensing_sinr, sum_spectral_efficiency
from isacsim.scenario import draw_channel

TINY_TOML = """
[run]
desk_scale = true
episodes = 3
eval_episodes = 2
seeds = [0]

[ddpg]
hidden_sizes = [16, 8]

[dqn]
hidden_sizes = [16, 8]
codebook_size = 32
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML, encoding="utf-8")
    return path


def read_lines(path):
    return path.read_text(encoding="utf-8").splitlines()


def test_compute_cdf_contract():
    values, cdf = cli.compute_cdf([3.0, 1.0, 2.0])
    assert np.array_equal(values, [1.0, 2.0, 3.0])
    assert np.allclose(cdf, [1 / 3, 2 / 3, 1.0])
    values, cdf = cli.compute_cdf([4.2])
    assert np.array_equal(values, [4.2]) and np.array_equal(cdf, [1.0])
    values, cdf = cli.compute_cdf([1.0, 1.0])
    assert np.array_equal(values, [1.0, 1.0])
    assert np.allclose(cdf, [0.5, 1.0])
    with pytest.raises(ValueError):
        cli.compute_cdf([])
    with pytest.raises(ValueError):
        cli.compute_cdf([1.0, np.nan])
    with pytest.raises(ValueError):
        cli.compute_cdf([np.inf])


def test_csv_round_trip(tmp_path):
    path = tmp_path / "x.csv"
    rows = [(0, 0.1 + 0.2, -1.2345678901234567e-8), (1, 2.0, 3.0)]
    cli.write_csv(path, ("a", "b", "c"), rows)
    lines = read_lines(path)
    assert lines[0] == "# schema=1"
    assert lines[1] == "a,b,c"
    columns, parsed = cli.read_csv(path)
    assert columns == ("a", "b", "c")
    for want, got in zip(rows, parsed):
        assert [float(w) for w in want] == got  # repr floats read back exactly


def test_train_writes_artifacts(tmp_path, tiny_config):
    out = tmp_path / "run"
    assert cli.main(["train", "--config", str(tiny_config), "--out", str(out)]) == 0
    assert (out / "resolved.toml").exists()
    seed_dir = out / "seed_0"
    for name in ("train_log.csv", "episodes.csv", "eval.csv", "eval_summary.csv"):
        assert read_lines(seed_dir / name)[0] == "# schema=1"
    assert (seed_dir / "checkpoint.npz").exists()
    _, steps = cli.read_csv(seed_dir / "train_log.csv")
    assert len(steps) == 3 * 10
    _, eps = cli.read_csv(seed_dir / "episodes.csv")
    assert len(eps) == 3
    _, ev = cli.read_csv(seed_dir / "eval.csv")
    assert len(ev) == 2
    columns, summary = cli.read_csv(seed_dir / "eval_summary.csv")
    assert columns == ("stat", "reward", "sum_rate", "sensing_sinr")
    assert [row[0] for row in summary] == ["mean", "median", "p5", "p95"]


def drop_last_column(path):
    lines = read_lines(path)
    return [ln.rsplit(",", 1)[0] for ln in lines]


def test_train_is_deterministic(tmp_path, tiny_config):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert cli.main(["train", "--config", str(tiny_config), "--out", str(out)]) == 0
    # wall-clock is the last column; everything else must match bitwise
    assert drop_last_column(out1 / "seed_0" / "episodes.csv") == drop_last_column(
        out2 / "seed_0" / "episodes.csv"
    )
    ev1 = read_lines(out1 / "seed_0" / "eval.csv")
    ev2 = read_lines(out2 / "seed_0" / "eval.csv")
    assert ev1 == ev2


def test_seed_precedence(tmp_path, tiny_config, monkeypatch):
    out = tmp_path / "env_seed"
    monkeypatch.setenv("ISAC_SEED", "7")
    args = ["train", "--config", str(tiny_config), "--episodes", "1"]
    assert cli.main(args + ["--out", str(out)]) == 0
    assert (out / "seed_7").is_dir() and not (out / "seed_0").exists()
    out2 = tmp_path / "flag_seed"
    assert cli.main(args + ["--out", str(out2), "--seed", "9"]) == 0
    assert (out2 / "seed_9").is_dir() and not (out2 / "seed_7").exists()
    monkeypatch.setenv("ISAC_SEED", "not-a-number")
    assert cli.main(args + ["--out", str(tmp_path / "bad")]) == 2


def test_eval_matches_train_side_eval(tmp_path, tiny_config):
    out = tmp_path / "run"
    cli.main(["train", "--config", str(tiny_config), "--out", str(out)])
    ev_dir = tmp_path / "reeval"
    code = cli.main(
        [
            "eval",
            "--config",
            str(tiny_config),
            "--checkpoint",
            str(out / "seed_0" / "checkpoint.npz"),
            "--out",
            str(ev_dir),
        ]
    )
    assert code == 0
    # the checkpoint carries the normalizer, so re-evaluation reproduces the
    # training-side eval bitwise
    assert read_lines(ev_dir / "eval.csv") == read_lines(out / "seed_0" / "eval.csv")


def test_eval_zero_episodes(tmp_path, tiny_config):
    out = tmp_path / "ev"
    code = cli.main(
        ["eval", "--config", str(tiny_config), "--mrt", "--episodes", "0",
         "--out", str(out)]
    )
    assert code == 0
    assert read_lines(out / "eval.csv") == ["# schema=1", "episode,reward,sum_rate,sensing_sinr"]


def test_eval_architecture_mismatch(tmp_path, tiny_config, capsys):
    out = tmp_path / "run"
    cli.main(["train", "--config", str(tiny_config), "--out", str(out)])
    # full-scale scenario (16 antennas, 4 users) against the desk checkpoint
    code = cli.main(
        ["eval", "--checkpoint", str(out / "seed_0" / "checkpoint.npz"),
         "--out", str(tmp_path / "ev")]
    )
    assert code == 2
    assert "does not match" in capsys.readouterr().err


def test_eval_requires_checkpoint_or_mrt(tmp_path, tiny_config, capsys):
    code = cli.main(
        ["eval", "--config", str(tiny_config), "--out", str(tmp_path / "ev")]
    )
    assert code == 2
    assert "--checkpoint" in capsys.readouterr().err


def test_mrt_eval_matches_closed_form(tmp_path, tiny_config):
    out = tmp_path / "mrt"
    code = cli.main(
        ["eval", "--config", str(tiny_config), "--mrt", "--episodes", "2",
         "--out", str(out)]
    )
    assert code == 0
    _, rows = cli.read_csv(out / "eval.csv")
    cfg = load_run_config(path=tiny_config)
    scen = cfg.scenario_for_seed(0)
    for i, row in enumerate(rows):
        snap = draw_channel(scen, cli.EVAL_OFFSET + i)
        action = mrt_warm_start(snap, scen.p_max)
        rate = sum_spectral_efficiency(snap, action)
        sinr = sensing_sinr(snap, action)
        assert row[2] == pytest.approx(rate, rel=1e-12)
        assert row[3] == pytest.approx(sinr, rel=1e-12)


def test_sweep_rho_artifacts(tmp_path, tiny_config):
    out = tmp_path / "sweep"
    code = cli.main(
        ["sweep-rho", "--config", str(tiny_config), "--rhos", "0.1,0.9",
         "--out", str(out)]
    )
    assert code == 0
    for tag in ("0.1", "0.9"):
        for stem in ("cdf_sumrate", "cdf_sinr"):
            columns, rows = cli.read_csv(out / f"{stem}_{tag}.csv")
            assert columns[1] == "cdf"
            values = [r[0] for r in rows]
            cdf = [r[1] for r in rows]
            assert len(rows) == 2  # one seed x two eval episodes
            assert values == sorted(values)
            assert all(b > a for a, b in zip(cdf, cdf[1:]))
            assert cdf[-1] == pytest.approx(1.0)
        assert (out / f"rho_{tag}" / "seed_0" / "episodes.csv").exists()
    columns, rows = cli.read_csv(out / "sweep_summary.csv")
    assert columns == ("rho", "mean_sum_rate", "mean_sensing_sinr")
    assert [r[0] for r in rows] == [0.1, 0.9]


def test_sweep_rejects_bad_rhos(tmp_path, tiny_config, capsys):
    base = ["sweep-rho", "--config", str(tiny_config), "--out", str(tmp_path / "s")]
    assert cli.main(base + ["--rhos", "1.5"]) == 2
    assert "outside" in capsys.readouterr().err
    assert cli.main(base + ["--rhos", "0.1,banana"]) == 2
    assert cli.main(base + ["--rhos", ""]) == 2


def test_bench_artifacts(tmp_path, tiny_config):
    out = tmp_path / "bench"
    assert cli.main(["bench", "--config", str(tiny_config), "--out", str(out)]) == 0
    columns, rows = cli.read_csv(out / "bench_summary.csv")
    assert [r[0] for r in rows] == ["ddpg", "dqn", "random"]
    assert all(r[2] > 0.0 for r in rows)  # sum rates
    for policy in ("ddpg", "dqn", "random"):
        assert (out / policy / "seed_0" / "episodes.csv").exists()
    columns, rows = cli.read_csv(out / "latency.csv")
    assert [r[0] for r in rows] == ["desk", "full"]
    by_scale = {r[0]: dict(zip(columns, r)) for r in rows}
    assert by_scale["full"]["state_dim"] == 322
    assert by_scale["full"]["action_dim"] == 160
    assert 0.0 < by_scale["full"]["median_us"] <= by_scale["full"]["p95_us"]


def test_unknown_config_key_is_reported(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[run]\nfuo = 3\n", encoding="utf-8")
    code = cli.main(["train", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "run.fuo" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    code = cli.main(
        ["train", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path / "o")]
    )
    assert code == 2
