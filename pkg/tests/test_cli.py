"""End-to-end checks of the command-line surface.

Each test drives ``main`` with an explicit argv and inspects the files it
writes, the same way a shell user would.
"""

import json

import pytest

from mpfkit.cli import main
from mpfkit.commutators import nested_commutator_sum
from mpfkit.hamiltonians import heisenberg_chain, spec_to_document


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


class TestConfigResolution:
    def test_defaults_echoed(self, tmp_path):
        assert run(tmp_path, "verify-order") == 0
        cfg = load(tmp_path, "verify_order.json")["config"]
        assert cfg["family"] == "heisenberg"
        assert cfg["n_sites"] == 4
        assert cfg["p"] == 2
        assert cfg["norm_mode"] == "exact"

    def test_config_file_then_flags(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({"n_sites": 5, "eps": 0.25}))
        code = run(
            tmp_path,
            "verify-bounds",
            "--config",
            str(cfg_file),
            "--n-sites",
            "4",
        )
        assert code == 0
        cfg = load(tmp_path, "verify_bounds.json")["config"]
        assert cfg["n_sites"] == 4
        assert cfg["eps"] == 0.25

    def test_unknown_config_key(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({"bogus_key": 3}))
        assert run(tmp_path, "cost", "--config", str(cfg_file)) == 2

    def test_malformed_config_file(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text("not json at all")
        assert run(tmp_path, "cost", "--config", str(cfg_file)) == 2

    def test_bad_flag_values(self, tmp_path):
        assert run(tmp_path, "verify-order", "--eps", "-1.0") == 2
        assert run(tmp_path, "verify-order", "--tau-points", "2") == 2
        assert run(tmp_path, "alpha", "--k-list", "a,b") == 2

    def test_k_list_round_trip(self, tmp_path):
        assert run(tmp_path, "verify-order", "--k-list", "1,3") == 0
        doc = load(tmp_path, "verify_order.json")
        assert doc["config"]["k_list"] == [1, 3]
        assert doc["mpf"][0]["k_values"] == [1, 3]

    def test_hamiltonian_file_family(self, tmp_path):
        spec = heisenberg_chain(3, field=0.5)
        ham = tmp_path / "chain.json"
        ham.write_text(json.dumps(spec_to_document(spec)))
        code = run(
            tmp_path, "alpha", "--family", "file", "--ham-file", str(ham)
        )
        assert code == 0
        cfg = load(tmp_path, "alpha_table.json")["config"]
        assert cfg["n_sites"] == 3

    def test_file_family_needs_path(self, tmp_path):
        assert run(tmp_path, "alpha", "--family", "file") == 2


class TestVerifyOrder:
    def test_desk_run_passes(self, tmp_path):
        assert run(tmp_path, "verify-order") == 0
        doc = load(tmp_path, "verify_order.json")
        assert doc["passed"] is True
        assert doc["trotter"]["status"] == "pass"
        assert doc["trotter"]["slope"] > 2.8
        assert [entry["order"] for entry in doc["mpf"]] == [2, 4]
        assert all(entry["status"] == "pass" for entry in doc["mpf"])
        lines = (tmp_path / "order_sweep.csv").read_text().splitlines()
        assert lines[0] == "tau,trotter_p2,mpf_j1,mpf_j2"
        assert len(lines) == 1 + doc["config"]["tau_points"]

    def test_commuting_family_is_exact(self, tmp_path):
        code = run(
            tmp_path,
            "verify-order",
            "--family",
            "long-range-zz",
            "--n-sites",
            "5",
        )
        assert code == 0
        doc = load(tmp_path, "verify_order.json")
        assert doc["trotter"]["status"] == "exact"
        assert doc["trotter"]["slope"] is None
        assert doc["passed"] is True

    def test_grid_outside_regime_fails(self, tmp_path):
        code = run(
            tmp_path,
            "verify-order",
            "--tau-min",
            "1.5",
            "--tau-max",
            "4.0",
            "--tau-points",
            "6",
        )
        assert code == 1
        doc = load(tmp_path, "verify_order.json")
        assert doc["passed"] is False
        assert doc["trotter"]["status"] == "fail"

    def test_odd_order_skips_extrapolation(self, tmp_path):
        assert run(tmp_path, "verify-order", "--p", "1") == 0
        doc = load(tmp_path, "verify_order.json")
        assert doc["mpf"] == []
        assert doc["trotter"]["status"] == "pass"


class TestVerifyBounds:
    def test_small_eps_window_all_pass(self, tmp_path):
        assert run(tmp_path, "verify-bounds", "--eps", "0.25") == 0
        doc = load(tmp_path, "verify_bounds.json")
        assert doc["summary"] == {"pass": 28, "fail": 0, "untestable": 0}
        assert doc["passed"] is True
        names = [row["name"] for row in doc["rows"]]
        assert "truncation_defect" in names
        assert "step_error_bound" in names
        assert "mu_ceiling" in names

    def test_untestable_beyond_qmax_window(self, tmp_path):
        assert run(tmp_path, "verify-bounds") == 0
        doc = load(tmp_path, "verify_bounds.json")
        flagged = [
            row["name"] for row in doc["rows"] if row["status"] == "untestable"
        ]
        assert flagged == ["truncation_defect", "step_error_bound"]
        assert doc["summary"]["fail"] == 0
        assert doc["passed"] is True

    def test_one_norm_mode_still_meaningful(self, tmp_path):
        code = run(
            tmp_path,
            "verify-bounds",
            "--eps",
            "0.25",
            "--n-sites",
            "5",
            "--norm-mode",
            "one-norm",
        )
        assert code == 0
        doc = load(tmp_path, "verify_bounds.json")
        assert doc["summary"]["fail"] == 0
        phi_notes = {
            row["note"]
            for row in doc["rows"]
            if row["name"].startswith("phi_norm")
        }
        assert phi_notes == {"coefficient one-norm"}


class TestCost:
    def test_desk_report(self, tmp_path):
        assert run(tmp_path, "cost") == 0
        doc = load(tmp_path, "cost_report.json")
        assert doc["report"]["r"] == 1446955693
        assert doc["consistency"]["holds"] is True
        assert doc["chain"]["holds"] is True
        assert doc["passed"] is True
        assert doc["eps_sweep"]["sub_polynomial"] is True
        ns = doc["n_sweep"]
        assert abs(ns["r1_slope"] - ns["r1_slope_expected"]) < 1e-3
        assert [row["algorithm"] for row in doc["gate_table"]] == [
            "trotter", "lcu", "qsvt", "mpf", "hhkl",
        ]
        assert doc["divergence"]["factorial_tail_increasing"] is True
        lines = (tmp_path / "cost_sweeps.csv").read_text().splitlines()
        eps_rows = [ln for ln in lines if ln.startswith("eps,")]
        n_rows = [ln for ln in lines if ln.startswith("n,")]
        assert len(eps_rows) == 13
        assert len(n_rows) == 5

    def test_long_range_g_column_grows(self, tmp_path):
        code = run(
            tmp_path,
            "cost",
            "--family",
            "long-range-zz",
            "--n-sites",
            "6",
            "--exponent",
            "0.5",
        )
        assert code == 0
        doc = load(tmp_path, "cost_report.json")
        gs = [row["g"] for row in doc["n_sweep"]["rows"]]
        assert all(b > a for a, b in zip(gs, gs[1:]))

    def test_odd_base_order_rejected(self, tmp_path):
        assert run(tmp_path, "cost", "--p", "3") == 2


class TestTable1:
    def test_finite_range_rows(self, tmp_path):
        assert run(tmp_path, "table1", "--n-sites", "64") == 0
        doc = load(tmp_path, "gate_costs.json")
        rows = {row["algorithm"]: row for row in doc["rows"]}
        assert list(rows) == ["trotter", "lcu", "qsvt", "mpf", "hhkl"]
        assert rows["mpf"]["polylog_pending"] is True
        assert rows["trotter"]["polylog_pending"] is False
        assert all(row["value"] > 0 for row in doc["rows"])
        lines = (tmp_path / "gate_costs.csv").read_text().splitlines()
        assert lines[0] == "algorithm,expression,value,polylog_pending"
        assert len(lines) == 6

    def test_long_range_row_set_depends_on_decay(self, tmp_path):
        fast = run(
            tmp_path, "table1", "--range-class", "long", "--nu", "3.0"
        )
        assert fast == 0
        doc = load(tmp_path, "gate_costs.json")
        rows = {row["algorithm"]: row for row in doc["rows"]}
        assert rows["hhkl"]["polylog_pending"] is False
        slow = run(
            tmp_path, "table1", "--range-class", "long", "--nu", "1.5"
        )
        assert slow == 0
        doc = load(tmp_path, "gate_costs.json")
        assert "hhkl" not in [row["algorithm"] for row in doc["rows"]]

    def test_long_range_needs_decay_power(self, tmp_path):
        assert run(tmp_path, "table1", "--range-class", "long") == 2


class TestPhiAlpha:
    def test_phi_table(self, tmp_path):
        assert run(tmp_path, "phi", "--qmax", "4") == 0
        doc = load(tmp_path, "phi_report.json")
        assert [row["q"] for row in doc["rows"]] == [2, 3, 4]
        assert doc["rows"][0]["norm"] == 0.0
        assert all(row["bounds_hold"] for row in doc["rows"])
        assert all(row["norm_is_exact"] for row in doc["rows"])

    def test_alpha_matches_library_enumeration(self, tmp_path):
        assert run(tmp_path, "alpha", "--qmax", "3") == 0
        doc = load(tmp_path, "alpha_table.json")
        spec = heisenberg_chain(4, field=0.8)
        for row in doc["rows"]:
            direct = nested_commutator_sum(spec, row["q"], "exact")
            assert row["alpha"] == pytest.approx(direct, rel=1e-12)
            assert row["factorial_holds"] and row["one_norm_holds"]

    def test_alpha_untestable_beyond_site_cap(self, tmp_path):
        assert run(tmp_path, "alpha", "--n-sites", "24") == 0
        doc = load(tmp_path, "alpha_table.json")
        assert all(row["alpha"] is None for row in doc["rows"])
        assert all(row["mode"] == "untestable" for row in doc["rows"])
        assert all(row["factorial_bound"] > 0 for row in doc["rows"])

    def test_phi_rejects_large_systems(self, tmp_path):
        assert run(tmp_path, "phi", "--n-sites", "24") == 2


class TestReproducibility:
    def test_rerun_is_byte_identical(self, tmp_path):
        argv = ["verify-bounds", "--eps", "0.25"]
        assert run(tmp_path, *argv) == 0
        first = {
            name: (tmp_path / name).read_bytes()
            for name in ("verify_bounds.json", "verify_bounds.csv")
        }
        assert run(tmp_path, *argv) == 0
        for name, blob in first.items():
            assert (tmp_path / name).read_bytes() == blob

    def test_cost_rerun_is_byte_identical(self, tmp_path):
        assert run(tmp_path, "cost") == 0
        first = (tmp_path / "cost_report.json").read_bytes()
        assert run(tmp_path, "cost") == 0
        assert (tmp_path / "cost_report.json").read_bytes() == first
