import json
from fractions import Fraction as F

import pytest

from linkspec.cli import main
from linkspec.tables import Table, emit, emit_csv, emit_json, parse_csv, parse_json


@pytest.fixture
def link2(tmp_path):
    path = tmp_path / "link2.json"
    assert main(["parallel", "-k", "2", "--eta", "0", "-o", str(path)]) == 0
    return str(path)


@pytest.fixture
def ham_z(tmp_path):
    path = tmp_path / "ham.json"
    path.write_text(json.dumps({"kind": "z_profile", "expr": "z - 1/2"}))
    return str(path)


class TestSubcommands:
    def test_validate(self, link2, capsys):
        assert main(["validate", link2]) == 0
        assert "valid" in capsys.readouterr().out

    def test_validate_invalid_link(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps(
                {
                    "genus": 2,
                    "total_area": "1",
                    "circles": [{"id": "c1"}],
                    "regions": [
                        {"id": "B1", "area": "1/2", "boundary": [["c1", 1]]},
                        {"id": "B2", "area": "1/2", "boundary": [["c1", -1]]},
                    ],
                }
            )
        )
        assert main(["validate", str(path)]) == 2
        assert "VIOLATION" in capsys.readouterr().out

    def test_monotone(self, link2, capsys):
        assert main(["monotone", link2, "--eta", "0", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["is_monotone"] and data["lambda"] == "1/3"

    def test_bound_json(self, link2, ham_z, capsys):
        assert main(["bound", ham_z, link2, "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert abs(data["lower"]) < 1e-12 and abs(data["upper"]) < 1e-12
        axioms = {step["axiom"] for step in data["derivation"]}
        assert "ExactLinkAdapted" in axioms

    def test_class_and_defect(self, link2, capsys):
        assert main(["class", link2, "--coeffs", "1,1,1", "--eta", "0", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["maslov"] == 6
        assert data["monotonicity_identity_holds"]
        assert main(["defect", "-k", "2", "--eta", "0", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["defect"] == "1"

    def test_crit_clifford_k3(self, tmp_path, capsys):
        link = tmp_path / "eq3.json"
        assert main(["equidist", "-m", "3", "-o", str(link)]) == 0
        capsys.readouterr()
        assert main(["crit", str(link), "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert len(data["critical_points"]) == 4

    def test_calabi_and_hofer(self, ham_z, capsys):
        assert main(["calabi", ham_z, "--json"]) == 0
        assert abs(json.loads(capsys.readouterr().out)["calabi"]) < 1e-9
        assert main(["hofer", ham_z, "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["hofer_norm"] == pytest.approx(1.0)

    def test_mu_and_quasicalabi(self, link2, tmp_path, capsys):
        ham = tmp_path / "pl.json"
        ham.write_text(
            json.dumps(
                {
                    "kind": "piecewise_linear",
                    "nodes": [["0", "-1/4"], ["1/2", "1/4"], ["1", "-1/4"]],
                }
            )
        )
        assert main(["mu", str(ham), link2, "-n", "4", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["c_lower"] == data["c_upper"] == pytest.approx(1.0 / 12)
        assert main(["quasicalabi", str(ham), "-k", "2..6", "--json"]) == 0

    def test_independence(self, tmp_path, capsys):
        cfg = tmp_path / "indep.json"
        cfg.write_text(json.dumps({"pairs": [[1, "0"], [2, "0"]]}))
        assert main(["independence", str(cfg), "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["unit_triangular"]
        assert data["matrix"] == [["1", "0"], ["0", "1"]]

    def test_scl_range(self, capsys):
        assert main(["scl", "-n", "2..5"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("n,")
        assert "5/4" in out


class TestErrors:
    def test_missing_file(self, capsys):
        assert main(["validate", "/nonexistent/link.json"]) == 4

    def test_malformed_json_names_location(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"genus": 0,,}')
        assert main(["validate", str(path)]) == 2
        assert "line" in capsys.readouterr().err

    def test_missing_field_diagnostic(self, tmp_path, capsys):
        path = tmp_path / "nofield.json"
        path.write_text(json.dumps({"genus": 0, "circles": []}))
        assert main(["validate", str(path)]) == 2
        assert "malformed" in capsys.readouterr().err

    def test_infeasible_parameters(self, capsys):
        assert main(["parallel", "-k", "3", "--eta", "1/4"]) == 2

    def test_numeric_nonconvergence_exit_code(self, tmp_path, capsys):
        import numpy as np

        ham = tmp_path / "coarse.json"
        values = np.random.default_rng(0).normal(size=(6, 6)).tolist()
        ham.write_text(json.dumps({"kind": "grid", "values": values}))
        assert main(["calabi", str(ham)]) == 3
        assert "resolution" in capsys.readouterr().err

    def test_help_contract(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        with pytest.raises(SystemExit) as exc:
            main(["bound", "--help"])
        assert exc.value.code == 0


class TestTables:
    def test_csv_roundtrip_idempotent(self):
        table = Table(
            columns=["n", "ratio", "value", "note"],
            rows=[[1, F(1, 3), 0.12345678901234567, "x"], [2, F(7, 2), -3.0, ""]],
        )
        once = emit_csv(table)
        parsed = parse_csv(once)
        twice = emit_csv(parsed)
        assert emit_csv(parse_csv(twice)) == twice

    def test_json_roundtrip_idempotent(self):
        table = Table(columns=["a", "b"], rows=[[F(1, 7), 2.5]], name="t")
        once = emit_json(table)
        parsed = parse_json(once)
        assert emit_json(parsed) == emit_json(parse_json(emit_json(parsed)))

    def test_empty_table_header_only(self):
        assert emit_csv(Table(columns=["x", "y"], rows=[])) == "x,y\n"

    def test_deterministic_bytes(self, tmp_path):
        assert main(["scl", "-n", "2..6", "--seed", "0"]) in (0,)
        t = Table(columns=["k"], rows=[[F(1, 3)]])
        a = emit(t, "json", str(tmp_path / "a.json"))
        b = emit(t, "json", str(tmp_path / "b.json"))
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert a == b

    def test_rational_and_real_formats(self):
        assert emit_csv(Table(columns=["v"], rows=[[F(22, 7)]])) == "v\n22/7\n"
        text = emit_csv(Table(columns=["v"], rows=[[0.1234567890123456]]))
        assert text == "v\n0.123456789012\n"

    def test_thread_cap_is_deterministic(self, monkeypatch):
        from conftest import z_minus_half
        from linkspec.spectral import calabi_property_table
        from linkspec.surface_link import build_equidistributed_sequence

        links = [build_equidistributed_sequence(m, m_min=m)[0] for m in (6, 9, 12)]
        H = z_minus_half()
        serial = calabi_property_table(H, links)
        monkeypatch.setenv("LINKSPEC_THREADS", "4")
        threaded = calabi_property_table(H, links)
        assert serial.rows == threaded.rows


class TestScenario:
    def test_calabi_convergence_scenario(self, tmp_path, ham_z, capsys):
        out_csv = tmp_path / "conv.csv"
        scenario = tmp_path / "scenario.json"
        scenario.write_text(
            json.dumps(
                {
                    "name": "calabi-convergence",
                    "kind": "calabi-convergence",
                    "inputs": {"ham": ham_z, "m": "10..40", "step": 10},
                    "outputs": [{"format": "csv", "path": str(out_csv)}],
                }
            )
        )
        assert main(["scenario", str(scenario)]) == 0
        table = parse_csv(out_csv.read_text())
        gaps = [row[table.columns.index("gap")] for row in table.rows]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_unknown_kind(self, tmp_path):
        scenario = tmp_path / "s.json"
        scenario.write_text(json.dumps({"kind": "mystery"}))
        assert main(["scenario", str(scenario)]) == 2
