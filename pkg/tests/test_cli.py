from __future__ import annotations

import io
import json

import pytest

from conftest import make_cd3, make_p7, make_paley, make_rt5
from outcol.catalog import is_isomorphic
from outcol.cli import main
from outcol.digraph import from_text, to_text, verify_out_colouring


def run_cli(argv, capsys):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(argv, capsys):
    code, out, err = run_cli(argv, capsys)
    return code, json.loads(out), err


def digraph_file(tmp_path, d, name="d.txt"):
    path = tmp_path / name
    path.write_text(to_text(d))
    return str(path)


def strip_timing(text: str) -> str:
    return "\n".join(l for l in text.splitlines() if '"seconds"' not in l)


class TestGen:
    def test_named_digraph_round_trips(self, capsys):
        code, out, _ = run_cli(["gen", "p7"], capsys)
        assert code == 0
        assert from_text(out) == make_p7()

    def test_parameterized_names(self, capsys):
        code, out, _ = run_cli(["gen", "paley", "11"], capsys)
        assert code == 0
        assert from_text(out) == make_paley(11)

    def test_unknown_name_is_a_usage_error(self, capsys):
        code, _, err = run_cli(["gen", "nonesuch"], capsys)
        assert code == 2
        assert "nonesuch" in err

    def test_out_flag_writes_a_file(self, tmp_path, capsys):
        target = tmp_path / "rt5.txt"
        code, out, _ = run_cli(["gen", "rt5", "--out", str(target)], capsys)
        assert code == 0
        assert out == ""
        assert from_text(target.read_text()) == make_rt5()

    def test_figure_flag_renders_adjacency(self, tmp_path, capsys):
        target = tmp_path / "rt5.png"
        code, _, _ = run_cli(["gen", "rt5", "--figure", str(target)], capsys)
        assert code == 0
        assert target.stat().st_size > 0


class TestSolve:
    def test_p7_refusal_names_the_terminal(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_p7())
        code, report, _ = run_json(["solve", path], capsys)
        assert code == 1
        assert report["status"] == "no-solution"
        cert = report["payload"]["certificate"]
        assert cert["type"] == "TerminalIs"
        assert cert["name"] == "p7"
        assert report["payload"]["verified"] is True

    def test_balanced_paley_solve(self, tmp_path, capsys):
        d = make_paley(11)
        path = digraph_file(tmp_path, d)
        code, report, _ = run_json(["solve", path, "--balanced"], capsys)
        assert code == 0
        colours = report["payload"]["colouring"]
        assert abs(colours.count(1) - colours.count(2)) <= 1
        from outcol.digraph import Colouring

        assert verify_out_colouring(d, Colouring(tuple(colours), 2)) is None

    def test_stdin_dash(self, monkeypatch, capsys):
        data = to_text(make_p7()).encode()
        monkeypatch.setattr("sys.stdin", io.TextIOWrapper(io.BytesIO(data)))
        code, report, _ = run_json(["solve", "-"], capsys)
        assert code == 1
        assert report["payload"]["certificate"]["name"] == "p7"

    def test_two_out_regular_dispatch(self, tmp_path, capsys):
        from outcol.digraph import Digraph

        d = Digraph(4, [(i, (i + 1) % 4) for i in range(4)]
                    + [(i, (i + 2) % 4) for i in range(4)])
        code, report, _ = run_json(["solve", digraph_file(tmp_path, d)], capsys)
        assert code == 0
        colours = report["payload"]["colouring"]
        assert colours[0] == colours[2] and colours[1] == colours[3]

    def test_unsupported_digraph(self, tmp_path, capsys):
        from outcol.digraph import Digraph

        d = Digraph(4, [(i, (i + 1) % 4) for i in range(4)])
        code, _, err = run_cli(["solve", digraph_file(tmp_path, d)], capsys)
        assert code == 2
        assert "unsupported" in err

    def test_three_colours(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_rt5())
        code, report, _ = run_json(["solve", path, "--colours", "3"], capsys)
        assert code == 0
        assert sorted(set(report["payload"]["colouring"])) == [1, 2, 3]

    def test_certify_cross_checks_the_oracle(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_cd3())
        code, report, _ = run_json(["solve", path, "--certify"], capsys)
        assert code == 1
        assert report["payload"]["oracle_agrees"] is True

    def test_certify_is_capped(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(23))
        code, _, err = run_cli(["solve", path, "--certify"], capsys)
        assert code == 2
        assert "capped" in err

    def test_plain_format(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_p7())
        code, out, _ = run_cli(["solve", path, "--format", "plain"], capsys)
        assert code == 1
        lines = out.splitlines()
        assert lines[0] == "status: no-solution"
        assert any(l.startswith("certificate:") for l in lines)


class TestReportShape:
    def test_reports_are_deterministic_outside_timing(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(11))
        _, out1, _ = run_cli(["solve", path], capsys)
        _, out2, _ = run_cli(["solve", path], capsys)
        assert strip_timing(out1) == strip_timing(out2)

    def test_report_echoes_command_and_digest(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(11))
        code, report, _ = run_json(["solve", path], capsys)
        assert report["command"] == ["solve", path]
        assert len(report["input_sha256"]) == 64
        assert report["seed"] is None
        assert "seconds" in report["timing"]

    def test_version_flag(self, capsys):
        code, out, err = run_cli(["--version"], capsys)
        assert code == 0
        assert (out + err).startswith("outcol")

    def test_no_subcommand_is_usage_error(self, capsys):
        assert run_cli([], capsys)[0] == 2


class TestPartition:
    def test_paley43_k3(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(43))
        code, report, _ = run_json(["partition", path, "--k", "3"], capsys)
        assert code == 0
        assert report["payload"]["attempt"] >= 1
        assert report["payload"]["threshold"] == 9
        assert report["seed"] == 0
        part1 = report["payload"]["part1"]
        part2 = report["payload"]["part2"]
        assert sorted(part1 + part2) == list(range(43))

    def test_same_seed_same_output(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(43))
        _, out1, _ = run_cli(["partition", path, "--k", "3", "--seed", "5"], capsys)
        _, out2, _ = run_cli(["partition", path, "--k", "3", "--seed", "5"], capsys)
        assert strip_timing(out1) == strip_timing(out2)

    def test_random_seed_is_recorded(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(43))
        code, report, _ = run_json(
            ["partition", path, "--k", "3", "--seed", "random"], capsys
        )
        assert code == 0
        assert isinstance(report["seed"], int)

    def test_stats_csv_and_figure_land_together(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(43))
        stats = tmp_path / "run.csv"
        code, report, _ = run_json(
            ["partition", path, "--k", "3", "--stats", str(stats)], capsys
        )
        assert code == 0
        lines = stats.read_text().splitlines()
        assert lines[0] == "attempt,failing_vertices,worst_deficit"
        assert len(lines) == report["payload"]["attempt"] + 1
        figure = tmp_path / "run.png"
        assert figure.exists() and figure.stat().st_size > 0
        assert report["payload"]["stats_figure"] == str(figure)

    def test_below_threshold_is_an_input_error(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_rt5())
        code, _, err = run_cli(["partition", path, "--k", "2"], capsys)
        assert code == 2
        assert "threshold" in err

    def test_exhausted_run_reports_attempts(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_rt5())
        code, report, _ = run_json(
            ["partition", path, "--k", "1", "--max-retries", "8"], capsys
        )
        assert code == 1
        assert report["status"] == "no-solution"
        assert report["payload"]["attempts"] == 8

    def test_inout(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(43))
        code, report, _ = run_json(["partition", path, "--k", "3", "--inout"], capsys)
        assert code == 0

    def test_r_parts(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(31))
        code, report, _ = run_json(
            ["partition", path, "--k", "1", "--r", "3"], capsys
        )
        assert code == 0
        parts = report["payload"]["parts"]
        assert len(parts) == 3
        assert sorted(v for p in parts for v in p) == list(range(31))

    def test_r_rejects_stats(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(31))
        code, _, err = run_cli(
            ["partition", path, "--k", "1", "--r", "3", "--stats", "x.csv"], capsys
        )
        assert code == 2


class TestReduce:
    NAE = "p nae 6 2\n1 2 3 0\n4 5 6 0\n"

    def test_nae2bt_with_sidecar(self, tmp_path, capsys):
        src = tmp_path / "f.nae"
        src.write_text(self.NAE)
        out = tmp_path / "bt.txt"
        code, _, _ = run_cli(["reduce", "nae2bt", str(src), "--out", str(out)], capsys)
        assert code == 0
        d = from_text(out.read_text())
        assert d.n == 12
        assert d.min_out_degree() == 3
        sidecar = json.loads((tmp_path / "bt.txt.map.json").read_text())
        assert sidecar["clause_order"][:2] == [0, 1]
        assert sidecar["variable_vertices"] == list(range(6))

    def test_overlapping_clauses_rejected(self, tmp_path, capsys):
        src = tmp_path / "f.nae"
        src.write_text("p nae 4 2\n1 2 3 0\n2 3 4 0\n")
        code, out, err = run_cli(["reduce", "nae2bt", str(src)], capsys)
        assert code == 2
        assert out == ""

    def test_nae2nice(self, tmp_path, capsys):
        src = tmp_path / "f.nae"
        src.write_text(self.NAE)
        code, out, _ = run_cli(["reduce", "nae2nice", str(src)], capsys)
        assert code == 0
        assert from_text(out).n == 6 * 6 + 2 * 2

    def test_hyp2sym(self, tmp_path, capsys):
        src = tmp_path / "h.txt"
        src.write_text("p hyp 3 2\n1 2 0\n2 3 0\n")
        code, out, _ = run_cli(["reduce", "hyp2sym", str(src)], capsys)
        assert code == 0
        d = from_text(out)
        assert d.n == 3 + 2 + 1
        assert all(d.has_arc(v, u) for u, v in d.arcs())

    def test_hyp_bad_header(self, tmp_path, capsys):
        src = tmp_path / "h.txt"
        src.write_text("p cnf 3 2\n1 2 0\n")
        assert run_cli(["reduce", "hyp2sym", str(src)], capsys)[0] == 2

    def test_tds(self, tmp_path, capsys):
        src = tmp_path / "g.txt"
        src.write_text("4 4\n0 1\n1 2\n2 3\n3 0\n")
        code, out, _ = run_cli(["reduce", "tds", str(src)], capsys)
        assert code == 0
        d = from_text(out)
        assert d.n == 4
        assert d.arc_count() == 8

    def test_explicit_map_path(self, tmp_path, capsys):
        src = tmp_path / "f.nae"
        src.write_text(self.NAE)
        sidecar = tmp_path / "m.json"
        code, out, _ = run_cli(
            ["reduce", "nae2bt", str(src), "--map", str(sidecar)], capsys
        )
        assert code == 0
        assert from_text(out).n == 12
        assert "construction" in json.loads(sidecar.read_text())


class TestOracle:
    def test_cd3_needs_three_colours(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_cd3())
        code, report, _ = run_json(["oracle", path], capsys)
        assert code == 1
        code, report, _ = run_json(["oracle", path, "--colours", "3"], capsys)
        assert code == 0
        assert sorted(set(report["payload"]["colouring"])) == [1, 2, 3]

    def test_partition_mode(self, tmp_path, capsys):
        # paley(11) refuses k=2 despite out-degrees 5, paley(19) accepts
        path = digraph_file(tmp_path, make_paley(11))
        code, report, _ = run_json(["oracle", path, "--partition-k", "2"], capsys)
        assert code == 1
        path = digraph_file(tmp_path, make_paley(19))
        code, report, _ = run_json(["oracle", path, "--partition-k", "2"], capsys)
        assert code == 0
        assert len(report["payload"]["part1"]) >= 2

    def test_balanced_flag(self, tmp_path, capsys):
        path = digraph_file(tmp_path, make_paley(11))
        code, report, _ = run_json(["oracle", path, "--balanced"], capsys)
        assert code == 0
        colours = report["payload"]["colouring"]
        assert abs(colours.count(1) - colours.count(2)) <= 1


class TestScan:
    def test_two_out_regular_5_tournaments(self, tmp_path, capsys):
        out_dir = tmp_path / "scan"
        code, report, _ = run_json(
            ["scan", "tournaments", "--n", "5",
             "--predicate", "two-out-regular", "--out", str(out_dir)],
            capsys,
        )
        assert code == 0
        assert report["payload"]["total"] == 1024
        assert report["payload"]["matched"] == 24
        assert report["payload"]["classes"] == 1
        member = from_text((out_dir / "class-000.txt").read_text())
        assert is_isomorphic(member, make_rt5())
        assert (out_dir / "manifest.csv").exists()
        assert (out_dir / "profile.png").stat().st_size > 0

    def test_threads_env_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("OUTCOL_THREADS", "2")
        out_dir = tmp_path / "scan"
        code, report, _ = run_json(
            ["scan", "tournaments", "--n", "4", "--out", str(out_dir)], capsys
        )
        assert code == 0
        assert report["payload"]["classes"] == 4

    def test_flag_beats_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("OUTCOL_THREADS", "not-a-number")
        out_dir = tmp_path / "scan"
        code, report, _ = run_json(
            ["scan", "tournaments", "--n", "4", "--out", str(out_dir),
             "--threads", "1"],
            capsys,
        )
        assert code == 0

    def test_oversized_scan_rejected(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["scan", "semicomplete", "--n", "7", "--out", str(tmp_path / "x")],
            capsys,
        )
        assert code == 2


class TestSpectrum:
    def test_known_pairs(self, capsys):
        code, report, _ = run_json(["spectrum", "7"], capsys)
        assert code == 0
        assert report["payload"]["eigenvalues"] == [[9, 1], [2, 6]]

    def test_figure(self, tmp_path, capsys):
        target = tmp_path / "s.png"
        code, report, _ = run_json(["spectrum", "11", "--figure", str(target)], capsys)
        assert code == 0
        assert target.stat().st_size > 0

    def test_bad_prime(self, capsys):
        code, _, err = run_cli(["spectrum", "9"], capsys)
        assert code == 2
