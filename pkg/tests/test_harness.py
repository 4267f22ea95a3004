import json

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from polecart import cli
from polecart.harness import runner
from polecart.harness.compare import compare_runs, episodes_to_threshold
from polecart.harness.config import (
    ConfigError,
    ExperimentConfig,
    dump_config,
    parse_config,
    save_config,
)
from polecart.harness.figures import FIGURES, figure_configs
from polecart.harness.io import HEADER, read_records, read_run_dir, write_csv, write_records
from polecart.harness.plot import emit_plot, render_svg
from polecart.harness.runner import RunAborted, RunSummary, moving_average, run_experiment, run_seed
from polecart.records import EpisodeRecord

SMALL = ExperimentConfig().replace(
    episodes=4, seeds=(1, 2, 3), **{"dqn.warmup": 16, "dqn.batch_size": 8}
)


def summary(seed, returns, wall_ms=0.0, window=100):
    recs = [EpisodeRecord(i, float(r), int(r) + 1, 0.5, wall_ms, i) for i, r in enumerate(returns)]
    return RunSummary(seed, recs, moving_average(returns, window), "x", 0.0)


def brute_moving_average(xs, w):
    return [sum(xs[max(0, i - w + 1) : i + 1]) / len(xs[max(0, i - w + 1) : i + 1]) for i in range(len(xs))]


class TestConfig:
    def test_defaults_round_trip(self):
        cfg = ExperimentConfig()
        assert parse_config(dump_config(cfg)) == cfg

    def test_dotted_keys(self):
        cfg = parse_config('algorithm = tabular\n# comment\ndqn.gamma = 0.9\nseeds = [4]\n')
        assert cfg.algorithm == "tabular" and cfg.dqn.gamma == 0.9 and cfg.seeds == (4,)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("dqn.momentum = 0.9")
        assert err.value.key == "dqn.momentum"

    @pytest.mark.parametrize(
        "line,key",
        [
            ("algorithm = sarsa", "algorithm"),
            ("episodes = 0", "episodes"),
            ("replay.strategy = rank", "replay.strategy"),
            ("dqn.widths = [3, 8, 2]", "dqn.widths"),
            ("schedule.kind = cosine", "schedule.kind"),
            ("tabular.alpha = 0", "tabular.alpha"),
            ("dqn.batch_size = 2.5", "dqn.batch_size"),
            ("env.reward_on_termination = 1", "env.reward_on_termination"),
        ],
    )
    def test_invalid_value_names_field(self, line, key):
        with pytest.raises(ConfigError) as err:
            parse_config(line)
        assert err.value.key == key

    @settings(max_examples=40)
    @given(
        st.sampled_from(["tabular", "dqn"]),
        st.sampled_from(["none", "uniform", "prioritized"]),
        st.sampled_from(["exponential", "linear", "logarithmic", "inverse", "sinusoidal"]),
        st.floats(0.0, 1.0),
        st.floats(1e-6, 1.0),
        st.lists(st.integers(0, 10**6), min_size=1, max_size=5, unique=True),
        st.lists(st.integers(1, 64), min_size=0, max_size=3),
    )
    def test_round_trip_lossless(self, algo, strategy, kind, beta, lr, seeds, hidden):
        cfg = ExperimentConfig().replace(
            algorithm=algo,
            seeds=tuple(seeds),
            **{
                "replay.strategy": strategy,
                "schedule.kind": kind,
                "schedule.beta": beta,
                "dqn.lr": lr,
                "dqn.widths": (4, *hidden, 2),
            },
        )
        again = parse_config(dump_config(cfg))
        assert again == cfg
        assert again.fingerprint() == cfg.fingerprint()

    def test_fingerprint_changes(self):
        assert ExperimentConfig().fingerprint() != ExperimentConfig().replace(episodes=7).fingerprint()


class TestMovingAverage:
    def test_window_one_is_identity(self):
        assert moving_average([3.0, 1.0, 4.0], 1) == [3.0, 1.0, 4.0]

    def test_hand_example(self):
        assert moving_average([1, 2, 3], 2) == [1.0, 1.5, 2.5]

    def test_constant(self):
        assert moving_average([7.0] * 50, 10) == [7.0] * 50

    def test_rejects_zero_window(self):
        with pytest.raises(ValueError):
            moving_average([1.0], 0)

    @given(st.lists(st.integers(0, 500), max_size=80), st.integers(1, 30))
    def test_matches_brute_force(self, xs, w):
        np.testing.assert_allclose(moving_average(xs, w), brute_moving_average(xs, w), rtol=1e-12)
        assert len(moving_average(xs, w)) == len(xs)


class TestCsv:
    def test_golden_header(self, tmp_path):
        write_records([], tmp_path / "a.csv")
        assert (tmp_path / "a.csv").read_text() == "episode,return,length,epsilon,wall_ms,global_step\n"
        assert HEADER == ("episode", "return", "length", "epsilon", "wall_ms", "global_step")

    def test_round_trip_exact(self, tmp_path, rng):
        recs = [
            EpisodeRecord(i, float(rng.integers(0, 500)), i + 3, float(rng.random()), float(rng.random() * 100), 10 * i)
            for i in range(20)
        ]
        write_records(recs, tmp_path / "r.csv")
        assert read_records(tmp_path / "r.csv") == recs

    def test_three_seeds_three_files(self, tmp_path):
        s = [summary(k, [1.0, 2.0]) for k in (1, 2, 3)]
        write_csv(s, tmp_path, ExperimentConfig())
        assert sorted(p.name for p in tmp_path.iterdir()) == [
            "manifest.json",
            "seed_1.csv",
            "seed_2.csv",
            "seed_3.csv",
        ]
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["prng"] == "numpy.random.PCG64"
        assert manifest["fingerprint"] == ExperimentConfig().fingerprint()
        assert "schedule.log_base" in manifest["config"]

    def test_unwritable_path(self, tmp_path):
        (tmp_path / "file").write_text("")
        with pytest.raises(OSError, match="file"):
            write_csv([summary(1, [1.0])], tmp_path / "file" / "sub")


class TestPlot:
    def test_structure(self, tmp_path):
        emit_plot([summary(1, list(range(10)))], tmp_path / "p.svg")
        svg = (tmp_path / "p.svg").read_text()
        assert svg.count("<circle") == 10
        assert svg.count("<polyline") == 1
        assert "episode" in svg and "return" in svg

    def test_deterministic(self):
        s = [summary(1, [5.0, 9.0, 20.0])]
        assert render_svg(s) == render_svg(s)

    def test_legend_per_seed(self):
        svg = render_svg([summary(k, [1.0, 2.0]) for k in (3, 4, 5)])
        assert svg.count('class="legend"') == 3

    def test_needs_a_summary(self):
        with pytest.raises(ValueError):
            render_svg([])


class TestCompare:
    def test_identical_groups(self):
        a = [summary(1, list(range(300)), wall_ms=2.0), summary(2, [50.0] * 300, wall_ms=2.0)]
        c = compare_runs(a, a)
        assert c.final_average_delta == 0.0
        assert c.episodes_to_threshold_delta == 0.0
        assert c.wall_time_ratio == 1.0

    def test_threshold_never_reached_is_absent(self):
        c = compare_runs([summary(1, [10.0] * 50)], [summary(2, [20.0] * 50)])
        assert c.a.episodes_to_threshold == (None,)
        assert c.a.median_episodes_to_threshold is None
        assert c.episodes_to_threshold_delta is None
        assert any("absent" in line for line in c.lines())

    def test_episodes_to_threshold(self):
        assert episodes_to_threshold([0, 400, 400], 200, 2) == 1

    def test_wall_ratio(self):
        c = compare_runs([summary(1, [1.0] * 5, wall_ms=6.0)], [summary(2, [1.0] * 5, wall_ms=2.0)])
        assert c.wall_time_ratio == pytest.approx(3.0)

    def test_untimed_ratio_absent(self):
        c = compare_runs([summary(1, [1.0])], [summary(2, [1.0])])
        assert c.wall_time_ratio is None

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            compare_runs([], [summary(1, [1.0])])


class TestRunExperiment:
    def test_default_config_is_runnable(self):
        s = run_seed(ExperimentConfig().replace(episodes=2), 0)
        assert len(s.records) == 2 and s.aborted is None

    def test_one_summary_per_seed_in_order(self):
        out = run_experiment(SMALL)
        assert [s.seed for s in out] == [1, 2, 3]
        assert all(len(s.records) == 4 and len(s.moving_average) == 4 for s in out)

    @pytest.mark.parametrize("algo,strategy", [("tabular", "uniform"), ("dqn", "none"), ("dqn", "prioritized")])
    def test_byte_identical_outputs(self, tmp_path, algo, strategy):
        cfg = SMALL.replace(algorithm=algo, **{"replay.strategy": strategy})
        run_experiment(cfg, tmp_path / "a")
        run_experiment(cfg, tmp_path / "b")
        for name in ("seed_1.csv", "seed_2.csv", "seed_3.csv", "returns.svg", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_isolation(self):
        alone = run_experiment(SMALL.replace(seeds=(2,)))[0]
        together = run_experiment(SMALL.replace(seeds=(1, 2, 3)))[1]
        assert alone.records == together.records

    def test_read_back(self, tmp_path):
        out = run_experiment(SMALL, tmp_path)
        cfg, back = read_run_dir(tmp_path)
        assert cfg == SMALL
        assert [s.records for s in back] == [s.records for s in out]

    def test_parallel_matches_serial(self):
        serial = run_experiment(SMALL)
        parallel = run_experiment(SMALL, jobs=2)
        assert [s.records for s in serial] == [s.records for s in parallel]

    def test_abort_flushes_partial_csv(self, tmp_path, monkeypatch):
        def exploding(env, agent, episodes, lr, rng, clock, on_episode):
            on_episode(EpisodeRecord(0, 9.0, 10, 1.0, 0.0, 10))
            raise FloatingPointError("non-finite loss at global step 10; aborting run")

        monkeypatch.setattr(runner, "train_dqn", exploding)
        with pytest.raises(RunAborted) as err:
            run_experiment(SMALL.replace(seeds=(1,)), tmp_path)
        assert 1 in err.value.failures
        assert read_records(tmp_path / "seed_1.csv") == [EpisodeRecord(0, 9.0, 10, 1.0, 0.0, 10)]
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert "non-finite" in manifest["runs"][0]["aborted"]


class TestFigures:
    @pytest.mark.parametrize("fig", FIGURES)
    def test_every_figure_materializes(self, fig):
        configs = figure_configs(fig)
        assert configs
        for cfg in configs.values():
            assert parse_config(dump_config(cfg)) == cfg

    def test_fig7_is_per_exponential(self):
        cfg = figure_configs("7")["beta_0.9999"]
        assert (cfg.algorithm, cfg.replay.strategy, cfg.schedule.kind, cfg.schedule.beta) == (
            "dqn",
            "prioritized",
            "exponential",
            0.9999,
        )
        assert cfg.episodes == 600

    def test_fig10_tabular(self):
        cfg = figure_configs("10")["tabular"]
        assert cfg.algorithm == "tabular" and cfg.episodes == 10000

    def test_unknown_figure(self):
        with pytest.raises(ValueError):
            figure_configs("9")


class TestCli:
    def test_run_plot_compare(self, tmp_path, capsys):
        cfg_path = tmp_path / "c.txt"
        save_config(SMALL, cfg_path)
        assert cli.main(["run", "--config", str(cfg_path), "--seeds", "1,2", "--out", str(tmp_path / "a")]) == 0
        assert sorted(p.name for p in (tmp_path / "a").iterdir()) == [
            "manifest.json",
            "returns.svg",
            "seed_1.csv",
            "seed_2.csv",
        ]
        assert cli.main(["plot", "--in", str(tmp_path / "a"), "--out", str(tmp_path / "p.svg")]) == 0
        assert (tmp_path / "p.svg").read_text().count('class="legend"') == 2
        assert cli.main(["compare", "--a", str(tmp_path / "a"), "--b", str(tmp_path / "a")]) == 0
        out = capsys.readouterr().out
        assert "delta=0" in out and "ratio=absent" in out

    def test_run_twice_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "c.txt"
        save_config(SMALL.replace(seeds=(5,)), cfg_path)
        for d in ("x", "y"):
            assert cli.main(["run", "--config", str(cfg_path), "--out", str(tmp_path / d)]) == 0
        for name in ("seed_5.csv", "returns.svg"):
            assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()

    def test_env_default_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv("POLECART_OUT", str(tmp_path / "envout"))
        cfg_path = tmp_path / "c.txt"
        save_config(SMALL.replace(seeds=(1,), episodes=1), cfg_path)
        assert cli.main(["run", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "envout" / "seed_1.csv").exists()

    def test_replicate_dry_run(self, tmp_path):
        assert cli.main(["replicate", "--figure", "8c", "--dry-run", "--out", str(tmp_path)]) == 0
        cfg = parse_config((tmp_path / "figure_8c" / "inverse" / "config.txt").read_text())
        assert cfg.replay.strategy == "prioritized" and cfg.schedule.kind == "inverse"

    def test_replicate_runs(self, tmp_path):
        args = ["replicate", "--figure", "6", "--episodes", "2", "--seeds", "3", "--out", str(tmp_path)]
        assert cli.main(args) == 0
        assert (tmp_path / "figure_6" / "no_replay" / "seed_3.csv").exists()

    @pytest.mark.parametrize(
        "argv,code",
        [
            (["run", "--config", "/nonexistent/cfg"], 1),
            (["frobnicate"], 2),
            (["replicate", "--figure", "99"], 2),
        ],
    )
    def test_errors_are_one_json_line(self, argv, code, capsys):
        assert cli.main(argv) == code
        err = capsys.readouterr().err.strip().splitlines()
        assert len(err) == 1
        assert set(json.loads(err[0])) == {"error", "message"}

    def test_bad_config_key_reported(self, tmp_path, capsys):
        p = tmp_path / "bad.txt"
        p.write_text("dqn.momentum = 0.9\n")
        assert cli.main(["run", "--config", str(p), "--out", str(tmp_path)]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ConfigError" and "dqn.momentum" in err["message"]
