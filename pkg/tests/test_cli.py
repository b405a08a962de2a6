"""Unit tests for the command line interface."""

import json
import subprocess
import sys

import pytest

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from cospectral import (
    ExactMatrix,
    Graph,
    encode_graph6,
    parse_graph6,
)
from cospectral.cli import main
from cospectral.exact import dump_matrix

STAR_G6 = "Ds_"
C4K1_G6 = "Dl?"
P3_G6 = "Bg"
FULL_RANK_G6 = "E\\Q?"


@pytest.fixture(scope="module")
def schema():
    import importlib.resources as res

    text = (
        res.files("cospectral") / "schemas" / "output.schema.json"
    ).read_text()
    return json.loads(text)


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv, schema=None):
    code, out, err = run_cli(capsys, argv)
    payload = json.loads(out)
    if schema is not None and jsonschema is not None:
        jsonschema.validate(payload, schema)
    return code, payload, err


@pytest.fixture
def graph_files(tmp_path):
    paths = {}
    for name, text in [
        ("star", STAR_G6),
        ("c4k1", C4K1_G6),
        ("p3", P3_G6),
        ("full", FULL_RANK_G6),
    ]:
        p = tmp_path / f"{name}.g6"
        p.write_text(text + "\n")
        paths[name] = str(p)
    return paths


class TestCheck:
    def test_equal_pair(self, capsys, graph_files, schema):
        code, payload, _ = run_json(
            capsys,
            ["check", graph_files["star"], graph_files["c4k1"], "--relation", "S"],
            schema,
        )
        assert code == 0
        assert payload["equal"] is True
        assert payload["relation"] == "S"
        assert payload["mode"] == "prob"

    def test_unequal_pair_strict_exit(self, capsys, graph_files, schema):
        code, payload, _ = run_json(
            capsys,
            [
                "check",
                graph_files["star"],
                graph_files["c4k1"],
                "--relation",
                "GS",
                "--strict",
            ],
            schema,
        )
        assert code == 1
        assert payload["equal"] is False

    def test_det_mode_agrees(self, capsys, graph_files, schema):
        for relation, want in [("S", True), ("GS", False)]:
            code, payload, _ = run_json(
                capsys,
                [
                    "check",
                    graph_files["star"],
                    graph_files["c4k1"],
                    "--relation",
                    relation,
                    "--mode",
                    "det",
                ],
                schema,
            )
            assert code == 0
            assert payload["equal"] is want

    def test_lowercase_relation_accepted(self, capsys, graph_files):
        code, payload, _ = run_json(
            capsys,
            ["check", graph_files["star"], graph_files["c4k1"], "--relation", "s"],
        )
        assert code == 0
        assert payload["relation"] == "S"

    def test_explicit_partition_matches_gs(self, capsys, graph_files):
        _, gs, _ = run_json(
            capsys,
            ["check", graph_files["star"], graph_files["c4k1"], "--relation", "GS"],
        )
        _, gbdls, _ = run_json(
            capsys,
            [
                "check",
                graph_files["star"],
                graph_files["c4k1"],
                "--relation",
                "GBDLS",
                "--partition",
                "0,1,2,3,4",
            ],
        )
        assert gs["equal"] == gbdls["equal"]

    def test_stdin_input(self, capsys, graph_files, monkeypatch):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO(STAR_G6 + "\n"))
        code, payload, _ = run_json(
            capsys, ["check", "-", graph_files["c4k1"], "--relation", "S"]
        )
        assert code == 0
        assert payload["equal"] is True


class TestReconstructQ:
    def test_identity_pair(self, capsys, graph_files, schema):
        code, payload, _ = run_json(
            capsys,
            [
                "reconstruct-q",
                graph_files["full"],
                graph_files["full"],
                "--path",
                "exact",
            ],
            schema,
        )
        assert code == 0
        assert payload["exists"] is True
        assert payload["status"] == "certified"
        assert payload["level"] == 1
        n = len(payload["q"])
        assert all(
            payload["q"][i][j] == ("1" if i == j else "0")
            for i in range(n)
            for j in range(n)
        )

    def test_rank_deficient_auto_falls_back(self, capsys, graph_files, schema):
        code, payload, _ = run_json(
            capsys,
            ["reconstruct-q", graph_files["p3"], graph_files["p3"]],
            schema,
        )
        assert code == 0
        assert payload["exists"] is True
        assert payload["status"] == "certified"
        assert payload["path_used"] == "constructive"

    def test_exists_false_on_non_mates(self, capsys, graph_files, schema):
        code, payload, _ = run_json(
            capsys,
            [
                "reconstruct-q",
                graph_files["star"],
                graph_files["c4k1"],
                "--strict",
            ],
            schema,
        )
        assert code == 1
        assert payload["exists"] is False

    def test_partition_mismatch_short_circuits(self, capsys, tmp_path, schema):
        a = tmp_path / "a.g6"
        b = tmp_path / "b.g6"
        a.write_text(encode_graph6(Graph.from_edges(3, [(0, 1)])) + "\n")
        b.write_text(
            encode_graph6(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])) + "\n"
        )
        code, payload, _ = run_json(
            capsys, ["reconstruct-q", str(a), str(b)], schema
        )
        assert code == 0
        assert payload["exists"] is False
        assert "partition" in payload["reason"]


class TestSnf:
    def test_identity(self, capsys, tmp_path, schema):
        path = tmp_path / "m.txt"
        path.write_text(dump_matrix(ExactMatrix([[2, 4], [6, 8]])))
        code, payload, _ = run_json(capsys, ["snf", "--load", str(path)], schema)
        assert code == 0
        assert payload["invariant_factors"] == [2, 4]
        assert payload["verified"] is True

    def test_rejects_fractional_matrix(self, capsys, tmp_path):
        path = tmp_path / "m.txt"
        from fractions import Fraction

        path.write_text(dump_matrix(ExactMatrix([[Fraction(1, 2), 1], [0, 1]])))
        code, out, err = run_cli(capsys, ["snf", "--load", str(path)])
        assert code == 2
        assert err


class TestWalk:
    def test_p3_summary(self, capsys, graph_files, schema):
        code, payload, _ = run_json(capsys, ["walk", graph_files["p3"]], schema)
        assert code == 0
        assert payload["order"] == 3
        assert payload["extended_rank"] == 2
        assert payload["full_row_rank"] is False
        assert payload["d_n"] is None
        # plain walk matrix: [e, Ae, A^2 e] for the all-ones indicator
        assert payload["walk_matrix"] == [
            ["1", "1", "2"],
            ["1", "2", "2"],
            ["1", "1", "2"],
        ]

    def test_full_rank_graph_reports_divisor(self, capsys, graph_files, schema):
        code, payload, _ = run_json(capsys, ["walk", graph_files["full"]], schema)
        assert code == 0
        assert payload["extended_rank"] == 6
        assert payload["full_row_rank"] is True
        assert isinstance(payload["d_n"], int)
        assert payload["d_n"] >= 1


class TestSearch:
    def test_search_small(self, capsys, schema):
        code, payload, _ = run_json(
            capsys, ["search", "--n", "4", "--relation", "S"], schema
        )
        assert code == 0
        assert payload["config"]["n"] == 4
        assert payload["mates"]
        assert payload["contradictions"] == []

    def test_search_strict_without_mates(self, capsys, schema):
        code, payload, _ = run_json(
            capsys, ["search", "--n", "2", "--relation", "S", "--strict"], schema
        )
        assert code == 1
        assert payload["mates"] == []

    def test_search_csv(self, capsys, tmp_path, schema):
        csv_path = tmp_path / "mates.csv"
        code, payload, _ = run_json(
            capsys,
            ["search", "--n", "4", "--relation", "S", "--csv", str(csv_path)],
            schema,
        )
        assert code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == len(payload["mates"]) + 1

    def test_verify_sweep(self, capsys, schema):
        code, payload, _ = run_json(
            capsys,
            ["search", "--n", "4", "--relation", "GBDLS", "--verify"],
            schema,
        )
        assert code == 0
        assert payload["verify"] is True
        assert payload["contradictions"] == []
        assert payload["equivalence_classes"] == 54

    def test_byte_identical_reruns(self, capsys):
        argv = ["search", "--n", "4", "--relation", "GS"]
        _, out1, _ = run_cli(capsys, argv)
        _, out2, _ = run_cli(capsys, argv)
        assert out1 == out2

    def test_out_file(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        code, stdout, _ = run_cli(
            capsys,
            ["search", "--n", "3", "--relation", "S", "--out", str(out_path)],
        )
        assert code == 0
        assert stdout == ""
        payload = json.loads(out_path.read_text())
        assert payload["config"]["n"] == 3


class TestProbe:
    def test_probe_small(self, capsys, schema):
        code, payload, _ = run_json(
            capsys, ["probe", "--n", "3", "--budget", "40"], schema
        )
        assert code == 0
        assert payload["inconsistencies"] == 0
        assert payload["n"] == 3


class TestPlumbing:
    def test_default_seed_from_environment(self, capsys, graph_files, monkeypatch):
        monkeypatch.setenv("SPECTRA_SEED", "77")
        _, payload, _ = run_json(
            capsys, ["check", graph_files["star"], graph_files["c4k1"]]
        )
        assert payload["seed"] == 77

    def test_invalid_seed_env(self, capsys, graph_files, monkeypatch):
        monkeypatch.setenv("SPECTRA_SEED", "not-a-number")
        code, out, err = run_cli(
            capsys, ["check", graph_files["star"], graph_files["c4k1"]]
        )
        assert code == 2
        assert err

    def test_pretty_output(self, capsys, graph_files):
        code, out, _ = run_cli(
            capsys, ["check", graph_files["star"], graph_files["c4k1"], "--pretty"]
        )
        assert code == 0
        assert out.startswith("{\n")
        json.loads(out)

    def test_missing_file(self, capsys):
        code, out, err = run_cli(capsys, ["check", "/nonexistent.g6", "/also-missing.g6"])
        assert code == 2
        assert err

    def test_malformed_graph(self, capsys, tmp_path, graph_files):
        bad = tmp_path / "bad.g6"
        bad.write_text("!!!not graph6!!!\n")
        code, _, err = run_cli(capsys, ["check", str(bad), graph_files["p3"]])
        assert code == 2
        assert err

    def test_bad_partition_spec(self, capsys, graph_files):
        code, _, err = run_cli(
            capsys,
            [
                "check",
                graph_files["star"],
                graph_files["c4k1"],
                "--relation",
                "GBDLS",
                "--partition",
                "0,1/1,2",
            ],
        )
        assert code == 2
        assert err

    def test_usage_error(self, capsys):
        code, _, _ = run_cli(capsys, ["check"])
        assert code == 2

    def test_help_exits_zero(self, capsys):
        for argv in [["--help"], ["check", "--help"], ["search", "--help"]]:
            assert run_cli(capsys, argv)[0] == 0

    def test_console_script_installed(self, graph_files):
        proc = subprocess.run(
            [
                "cospectral",
                "check",
                graph_files["star"],
                graph_files["c4k1"],
                "--relation",
                "GS",
                "--mode",
                "det",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        payload = json.loads(proc.stdout)
        assert payload["equal"] is False
