import csv
import io
import json
import subprocess
import sys

import pytest

from sysconstraints.cli import main

from conftest import DATA, GOLDEN


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def golden_hex(name):
    lines = (GOLDEN / name).read_text().splitlines()
    return bytes.fromhex(" ".join(l for l in lines if not l.startswith("#"))).hex(" ")


class TestEntropy:
    def test_uniform(self, capsys):
        code, out, _ = cli(capsys, "entropy", DATA / "uniform4.json")
        assert (code, out) == (0, "entropy=2.000000 bound=2.000000 slack=0.000000\n")

    def test_point_mass(self, capsys, tmp_path):
        code, out, _ = cli(capsys, "entropy", write(tmp_path, "d.json", [1.0]))
        assert (code, out) == (0, "entropy=0.000000 bound=0.000000 slack=0.000000\n")

    def test_bad_sum(self, capsys):
        code, out, err = cli(capsys, "entropy", DATA / "bad_sum.json")
        assert code == 2
        assert out == ""
        assert "sum to 1" in err

    def test_csv_full_precision(self, capsys, tmp_path):
        path = write(tmp_path, "d.json", {"probs": [0.5, 0.25, 0.25], "size": 4})
        code, out, _ = cli(capsys, "entropy", path, "--format", "csv", "--precision", "full")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert float(rows[0]["entropy_bits"]) == 1.5
        assert float(rows[0]["bound_bits"]) == 2.0
        assert float(rows[0]["slack_bits"]) == 0.5

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = cli(capsys, "entropy", tmp_path / "absent.json")
        assert code == 5
        assert "error" in err

    def test_invalid_json(self, capsys, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("{not json")
        assert cli(capsys, "entropy", path)[0] == 2


class TestChannel:
    def test_noiseless(self, capsys):
        code, out, _ = cli(capsys, "channel", DATA / "channel_noiseless4.json")
        assert code == 0
        assert "MI=2.000000 MB=2.000000 S=2.000000 V=0.000000" in out

    def test_t8_r4(self, capsys):
        code, out, _ = cli(capsys, "channel", DATA / "channel_t8_r4.json")
        assert code == 0
        assert "V=1.000000" in out

    def test_disjoint(self, capsys):
        code, out, err = cli(capsys, "channel", DATA / "channel_disjoint.json")
        assert code == 3
        assert "no channel" in err

    def test_csv_parses_back_to_table(self, capsys):
        _, table, _ = cli(capsys, "channel", DATA / "channel_alphabet26.json")
        _, text, _ = cli(capsys, "channel", DATA / "channel_alphabet26.json", "--format", "csv")
        row = next(csv.DictReader(io.StringIO(text)))
        fields = dict(kv.split("=") for kv in table.splitlines()[1].split())
        for key, col in [("H(A)", "h_a_bits"), ("MI", "mi_bits"), ("MB", "mb_bits"), ("V", "v_bits")]:
            assert fields[key] == row[col]

    def test_plot(self, capsys, tmp_path):
        png = tmp_path / "c.png"
        assert cli(capsys, "channel", DATA / "channel_t8_r4.json", "--plot", png)[0] == 0
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestSystem:
    def test_three_layers(self, capsys):
        code, out, _ = cli(capsys, "system", DATA / "system3.json")
        assert code == 0
        assert "total_v=1.000000" in out

    def test_equal_layers(self, capsys):
        assert "total_v=0.000000" in cli(capsys, "system", DATA / "system_equal.json")[1]

    def test_fault_marked_excluded(self, capsys):
        _, out, _ = cli(capsys, "system", DATA / "system3_fault.json")
        line = next(l for l in out.splitlines() if l.startswith("layer2"))
        assert "excluded" in line

    def test_csv_file_and_plot(self, capsys, tmp_path):
        csv_path, png = tmp_path / "v.csv", tmp_path / "v.png"
        code, out, _ = cli(capsys, "system", DATA / "system3.json", "--csv", csv_path, "--plot", png)
        assert code == 0
        rows = list(csv.DictReader(csv_path.open()))
        assert [r["layer_id"] for r in rows] == ["layer1", "layer2", "layer3"]
        assert sum(float(r["v_bits"]) for r in rows if r["included"] == "true") == pytest.approx(1.0)
        assert png.stat().st_size > 0

    def test_out_file(self, capsys, tmp_path):
        dest = tmp_path / "report.txt"
        code, out, _ = cli(capsys, "system", DATA / "system3.json", "--out", dest)
        assert (code, out) == (0, "")
        assert "total_v=1.000000" in dest.read_text()

    def test_out_unwritable(self, capsys, tmp_path):
        code, _, _ = cli(capsys, "system", DATA / "system3.json", "--out", tmp_path / "no" / "such" / "dir.txt")
        assert code == 5


class TestNegotiate:
    def test_fig6(self, capsys):
        code, out, _ = cli(capsys, "negotiate", DATA / "fig6_left.json", DATA / "fig6_right.json")
        assert code == 0
        assert "selected=C/D" in out
        assert "transcript (6 messages)" in out

    def test_disjoint(self, capsys):
        code, out, err = cli(capsys, "negotiate", DATA / "fig6_left.json", DATA / "disjoint_right.json")
        assert code == 4
        assert "no compatible mode" in err

    def test_dump_wire_matches_goldens(self, capsys):
        _, out, _ = cli(capsys, "negotiate", DATA / "fig6_left.json", DATA / "fig6_right.json", "--dump-wire")
        lines = [l for l in out.splitlines() if l.strip().startswith("t=")]
        assert lines[0].endswith(golden_hex("probe.hex"))
        assert lines[3].endswith(golden_hex("propose_cd.hex"))

    def test_dump_wire_one_node_caps(self, capsys, tmp_path):
        node = {"tag": 1, "mode": {"mode_id": "A", "role": "tx", "states": 4, "revision": 0}}
        left = write(tmp_path, "l.json", {"id": "L", "caps": {"version": 1, "nodes": [node]}})
        rx = dict(node, mode=dict(node["mode"], role="rx"))
        right = write(tmp_path, "r.json", {"id": "R", "caps": {"version": 1, "nodes": [rx]}})
        _, out, _ = cli(capsys, "negotiate", left, right, "--dump-wire")
        caps_from_left = [l for l in out.splitlines() if "L->R CAPS" in l][0]
        assert caps_from_left.endswith(golden_hex("caps_one_node.hex"))

    def test_csv_ranking(self, capsys):
        _, out, _ = cli(capsys, "negotiate", DATA / "fig6_left.json", DATA / "fig6_right.json", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [(r["tx_mode"], r["s_bits"]) for r in rows] == [
            ("C/D", "4.000000"), ("E/F", "4.000000"), ("A/B", "2.000000")
        ]


class TestSimulate:
    def test_deterministic(self, capsys):
        first = cli(capsys, "simulate", DATA / "fig6_scenario.json", "--seed", "42")
        second = cli(capsys, "simulate", DATA / "fig6_scenario.json", "--seed", "42")
        assert first == second
        assert first[0] == 0

    def test_empirical_close_to_analytic(self, capsys):
        _, out, _ = cli(capsys, "simulate", DATA / "fig6_scenario.json", "--format", "csv")
        row = next(csv.DictReader(io.StringIO(out)))
        assert row["selected"] == "C/D"
        assert abs(float(row["empirical_mi_bits"]) - float(row["analytic_mi_bits"])) < 0.02

    def test_failed_negotiation_is_data(self, capsys):
        code, out, _ = cli(capsys, "simulate", DATA / "disjoint_scenario.json")
        assert code == 0
        assert "negotiation=Failed reason=no compatible mode" in out

    def test_symbols_csv_and_plot(self, capsys, tmp_path):
        doc = json.loads((DATA / "fig6_scenario.json").read_text())
        doc["symbol_count"] = 50
        sym, png = tmp_path / "s.csv", tmp_path / "s.png"
        code, _, _ = cli(capsys, "simulate", write(tmp_path, "sc.json", doc), "--symbols-csv", sym, "--plot", png)
        assert code == 0
        assert len(sym.read_text().splitlines()) == 51
        assert png.read_bytes()[:4] == b"\x89PNG"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sysconstraints", "entropy", str(DATA / "uniform4.json")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("entropy=2.000000")


def test_requires_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
