"""CLI behavior: formats, manifests, byte-identical replay, and exit codes.

Everything except the console-script smoke test runs in-process through
``cli.main`` so coverage and debugging stay simple.
"""

import csv
import json
import shutil
import subprocess

import pytest

from qpuflab import cli


def run_cli(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestForgeSweep:
    def test_csv_to_stdout(self, capsys):
        code, out, err = run_cli(
            ["forge-sweep", "--qubits", "2", "--mu-steps", "4", "--trials", "2"],
            capsys,
        )
        assert code == 0
        assert err == ""
        rows = list(csv.DictReader(out.splitlines()))
        assert len(rows) == 4
        assert [float(r["mu"]) for r in rows] == [0.0, 0.25, 0.5, 0.75]
        for r in rows:
            assert float(r["mean_fidelity"]) >= float(r["theory_bound"]) - 1e-8
            assert r["trials"] == "2"

    def test_json_format(self, capsys):
        code, out, _ = run_cli(
            [
                "forge-sweep", "--qubits", "2", "--mu-steps", "3",
                "--trials", "1", "--format", "json",
            ],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["rows"]) == 3
        assert set(payload["rows"][0]) == {
            "mu", "mean_fidelity", "theory_bound", "p_succ_stage1", "trials",
        }

    def test_writes_file_and_manifest(self, tmp_path, capsys):
        out_path = tmp_path / "sweep.csv"
        code, out, _ = run_cli(
            [
                "forge-sweep", "--qubits", "2", "--mu-steps", "2",
                "--trials", "1", "--out", str(out_path),
            ],
            capsys,
        )
        assert code == 0
        assert out == ""  # file mode writes nothing to stdout
        manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
        assert manifest["subcommand"] == "forge-sweep"
        assert manifest["seed"] == 7
        assert manifest["out"] == str(out_path)
        assert manifest["flags"]["qubits"] == 2
        # None-valued and bookkeeping entries stay out of the manifest
        assert "margin" not in manifest["flags"]
        assert "out" not in manifest["flags"]
        assert "subcommand" not in manifest["flags"]


class TestReplay:
    def test_byte_identical_reproduction(self, tmp_path, capsys):
        first = tmp_path / "a.csv"
        run_cli(
            [
                "forge-sweep", "--qubits", "2", "--mu-steps", "3",
                "--trials", "2", "--seed", "123", "--out", str(first),
            ],
            capsys,
        )
        second = tmp_path / "b.csv"
        code, _, _ = run_cli(
            [
                "replay", "--manifest", str(first) + ".manifest.json",
                "--out", str(second),
            ],
            capsys,
        )
        assert code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_replay_without_override_rewrites_in_place(self, tmp_path, capsys):
        target = tmp_path / "demo.json"
        run_cli(["qe-demo", "--qubits", "2", "--out", str(target)], capsys)
        original = target.read_bytes()
        target.write_bytes(b"clobbered")
        code, _, _ = run_cli(
            ["replay", "--manifest", str(target) + ".manifest.json"], capsys
        )
        assert code == 0
        assert target.read_bytes() == original


class TestVerifyAll:
    def test_standard_battery_exits_zero(self, capsys):
        code, out, _ = run_cli(["verify-all", "--seed", "5"], capsys)
        assert code == 0
        reports = json.loads(out)
        assert all(r["passed"] for r in reports)

    def test_negative_control_flips_the_exit_code(self, capsys):
        code, out, _ = run_cli(
            ["verify-all", "--seed", "5", "--negative-control"], capsys
        )
        assert code == 1
        failed = [r["name"] for r in json.loads(out) if not r["passed"]]
        assert failed == ["negative-control-collision"]


class TestGame:
    def test_forger_game_jsonl(self, capsys):
        code, out, _ = run_cli(
            [
                "game", "--mode", "qex", "--adversary", "forger", "--mu", "0.5",
                "--qubits", "2", "--trials", "20", "--delta", "0.9",
            ],
            capsys,
        )
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 21  # one record per game plus the summary
        records = [json.loads(line) for line in lines[:-1]]
        assert all(r["mode"] == "qex" and r["k"] == 2 for r in records)
        summary = json.loads(lines[-1])["summary"]
        assert summary["win_rate"] == 1.0
        assert summary["adversary"] == "forger"

    def test_random_guesser_selective_game(self, capsys):
        code, out, _ = run_cli(
            [
                "game", "--mode", "qsel", "--adversary", "random",
                "--qubits", "2", "--trials", "10", "--delta", "0.3",
            ],
            capsys,
        )
        assert code == 0
        summary = json.loads(out.splitlines()[-1])["summary"]
        assert 0.0 <= summary["win_rate"] <= 1.0
        assert summary["trials"] == 10

    def test_swap_test_variant(self, capsys):
        code, out, _ = run_cli(
            [
                "game", "--mode", "qsel", "--adversary", "subspace", "--d", "4",
                "--qubits", "2", "--trials", "10", "--test", "swap",
                "--kappa1", "2", "--kappa2", "2",
            ],
            capsys,
        )
        assert code == 0
        summary = json.loads(out.splitlines()[-1])["summary"]
        assert summary["win_rate"] == 1.0  # full knowledge always passes swap

    def test_tomography_requires_the_grant_flag(self, capsys):
        code, _, err = run_cli(
            ["game", "--mode", "qsel", "--adversary", "tomography", "--qubits", "2"],
            capsys,
        )
        assert code == 2
        assert "--privileged" in err

    def test_tomography_with_grant_wins(self, capsys):
        code, out, _ = run_cli(
            [
                "game", "--mode", "qsel", "--adversary", "tomography",
                "--privileged", "--qubits", "2", "--trials", "5",
                "--delta", "0.99",
            ],
            capsys,
        )
        assert code == 0
        assert json.loads(out.splitlines()[-1])["summary"]["win_rate"] == 1.0

    @pytest.mark.parametrize(
        "argv",
        [
            ["game", "--mode", "qsel", "--adversary", "forger", "--mu", "0.5"],
            ["game", "--mode", "qex", "--adversary", "forger"],  # missing --mu
            ["game", "--mode", "qex", "--adversary", "subspace", "--mu", "0.5"],
            ["game", "--mode", "qex", "--adversary", "random", "--mu", "0.5"],
        ],
    )
    def test_incompatible_requests_exit_two(self, argv, capsys):
        code, _, err = run_cli(argv, capsys)
        assert code == 2
        assert err.startswith("error:")

    def test_domain_error_surfaces_as_exit_two(self, capsys):
        # mu above the forger's margin cap for one qubit (0.75)
        code, _, err = run_cli(
            [
                "game", "--mode", "qex", "--adversary", "forger",
                "--mu", "0.9", "--qubits", "1", "--trials", "2",
            ],
            capsys,
        )
        assert code == 2
        assert "margin" in err


class TestQeDemo:
    def test_payload_values(self, capsys):
        code, out, _ = run_cli(["qe-demo", "--qubits", "2", "--mu", "0.5"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["mu"] == 0.5
        assert payload["alpha"] == pytest.approx(2**-0.5)
        assert payload["fidelity"] == pytest.approx(1.0, abs=1e-9)
        assert payload["theory_bound"] == 1.0
        assert payload["device"].startswith("qpuf-n2-")


class TestSelectiveBound:
    def test_single_row_with_bound(self, capsys):
        code, out, _ = run_cli(
            [
                "selective-bound", "--qubits", "2", "--d", "1",
                "--trials", "50", "--delta", "0.5",
            ],
            capsys,
        )
        assert code == 0
        (row,) = list(csv.DictReader(out.splitlines()))
        assert row["bound"] == "0.5"
        assert 0.0 <= float(row["empirical_rate"]) <= 1.0


class TestParser:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["expunge"])
        capsys.readouterr()

    def test_game_requires_mode_and_adversary(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["game", "--mode", "qsel"])
        capsys.readouterr()


class TestConsoleScript:
    def test_installed_entry_point(self):
        exe = shutil.which("qpuflab")
        assert exe, "editable install should place 'qpuflab' on PATH"
        proc = subprocess.run(
            [exe, "qe-demo", "--qubits", "2"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["theory_bound"] == 1.0
