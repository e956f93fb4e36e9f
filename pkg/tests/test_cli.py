"""Command-line entry point: subcommands, outputs, exit codes."""

import json

import pytest

from b92sim.cli import main


def test_version(capsys):
    assert main(["version"]) == 0
    out = capsys.readouterr().out
    assert out.strip()


def test_run_smoke(tmp_path, capsys):
    out_json = tmp_path / "run.json"
    code = main(
        [
            "run",
            "--profile",
            "enhanced",
            "--slots",
            "300000",
            "--seed",
            "5",
            "--out",
            str(out_json),
        ]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "# prediction" in text
    assert "# simulation" in text
    report = json.loads(out_json.read_text())
    assert report["n_slots"] == 300_000
    assert report["config"]["detector"]["profile"] == "enhanced"
    assert 0.0 <= report["qber"] <= 1.0
    assert report["prediction"]["detected_rate_cps"] > 0.0


def test_run_with_config_file(tmp_path, capsys):
    cfg = tmp_path / "link.toml"
    cfg.write_text('[channel]\nlength_km = 0.1\n\n[detector]\nprofile = "enhanced"\n')
    assert main(["run", "--config", str(cfg), "--slots", "200000"]) == 0
    assert "length_km = 0.1" in capsys.readouterr().out


def test_run_mode_override(tmp_path, capsys):
    assert main(["run", "--mode", "attenuator", "--slots", "200000"]) == 0
    assert 'mode = "attenuator"' in capsys.readouterr().out


def test_sweep_writes_results(tmp_path, capsys):
    sweep_toml = tmp_path / "sweep.toml"
    sweep_toml.write_text(
        "\n".join(
            [
                "[sweep]",
                'name = "mini"',
                'axis = "clock_hz"',
                "points = [1.0e9, 2.0e9]",
                'profiles = ["standard"]',
                "target_sifted_bits = 100",
                "min_slots = 50000",
                "max_slots = 400000",
                "",
                "[channel]",
                "length_km = 0.1",
            ]
        )
    )
    out_dir = tmp_path / "results"
    code = main(["sweep", "--config", str(sweep_toml), "--out", str(out_dir)])
    assert code == 0
    csv_text = (out_dir / "mini.csv").read_text()
    assert csv_text.startswith("axis_value,")
    assert len(csv_text.splitlines()) == 3
    assert (out_dir / "mini.gp").exists()


def test_sweep_seed_override(tmp_path):
    sweep_toml = tmp_path / "sweep.toml"
    sweep_toml.write_text(
        "\n".join(
            [
                "[sweep]",
                'name = "mini"',
                'axis = "clock_hz"',
                "points = [1.0e9]",
                'profiles = ["standard"]',
                "target_sifted_bits = 100",
                "min_slots = 50000",
                "max_slots = 400000",
                "",
                "[channel]",
                "length_km = 0.1",
            ]
        )
    )
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--config", str(sweep_toml), "--out", str(a_dir)]) == 0
    assert (
        main(
            ["sweep", "--config", str(sweep_toml), "--out", str(b_dir), "--seed", "3"]
        )
        == 0
    )
    assert (a_dir / "mini.csv").read_text() != (b_dir / "mini.csv").read_text()


def test_calibrate_from_defaults(tmp_path, capsys):
    out_toml = tmp_path / "fitted.toml"
    code = main(["calibrate", "--slots", "400000", "--out", str(out_toml)])
    assert code == 0
    assert out_toml.exists()
    text = capsys.readouterr().out
    assert "[ok]" in text
    assert "anchor standard" in text and "anchor enhanced" in text


def test_usage_errors_exit_1(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["run", "--bogus-flag"]) == 1
    assert main(["run", "--config", "/nonexistent/link.toml"]) == 1
    assert main(["sweep", "--preset", "fig4"]) == 1


def test_bad_config_value_exits_1(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[gate]\ngate_fraction = 1.5\n")
    assert main(["run", "--config", str(cfg)]) == 1
    assert "gate_fraction" in capsys.readouterr().err


def test_runtime_failure_exits_2(tmp_path, capsys, monkeypatch):
    import b92sim.cli as cli_mod

    def boom(*args, **kwargs):
        raise RuntimeError("injected fault")

    monkeypatch.setattr(cli_mod, "run_link", boom)
    assert main(["run", "--slots", "50000"]) == 2
    assert "runtime failure" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert main(["run", "--help"]) == 0
