"""Grouped Hamiltonian construction, derived constants, JSON round trip."""

import json

import numpy as np
import pytest

from mpfkit.hamiltonians import (
    g_scaling_report,
    heisenberg_chain,
    load_spec,
    long_range_zz_chain,
    make_spec,
    spec_to_document,
)
from mpfkit.pauli import PauliTerm


class TestHeisenberg:
    def test_four_site_structure_constants(self):
        spec = heisenberg_chain(4, coupling=1.0, field=0.0)
        assert spec.n_sites == 4
        assert spec.n_groups == 2
        assert spec.locality == 2
        # interior site sits on two bonds, three strings each
        assert spec.extensiveness == pytest.approx(6.0)
        # 3 bonds x 3 strings x |J|=1
        assert spec.total_one_norm == pytest.approx(9.0)
        assert not spec.non_commuting_groups

    def test_field_adds_a_group(self):
        spec = heisenberg_chain(4, coupling=1.0, field=0.5)
        assert spec.n_groups == 3
        assert spec.extensiveness == pytest.approx(6.5)
        assert spec.group_sum(3).one_norm() == pytest.approx(2.0)

    def test_two_sites_collapse_odd_group(self):
        spec = heisenberg_chain(2, coupling=1.0, field=0.3)
        # single bond: the odd-bond group is empty and must be dropped
        assert spec.n_groups == 2
        assert spec.group_sum(1).locality() == 2
        assert spec.group_sum(2).locality() == 1

    def test_group_partition_reconstructs_full_sum(self):
        spec = heisenberg_chain(5, coupling=0.7, field=0.2)
        full = spec.full_sum()
        total = {t.label: t.coeff for t in full.terms()}
        acc: dict[str, complex] = {}
        for t, _ in spec.terms:
            acc[t.label] = acc.get(t.label, 0.0) + t.coeff
        assert set(acc) == set(total)
        for label, c in acc.items():
            assert total[label] == pytest.approx(c)

    def test_within_group_commutation_heisenberg(self):
        # XX, YY, ZZ on one bond mutually commute; disjoint bonds trivially so
        spec = heisenberg_chain(6, coupling=1.0, field=0.4)
        assert not spec.non_commuting_groups

    def test_periodic_small_ring_flags_noncommuting_group(self):
        spec = heisenberg_chain(3, coupling=1.0, periodic=True)
        assert spec.non_commuting_groups

    def test_extensiveness_independent_of_length(self):
        gs = {n: heisenberg_chain(n).extensiveness for n in (4, 6, 9)}
        assert gs[4] == gs[6] == gs[9] == pytest.approx(6.0)


class TestLongRange:
    def test_four_site_extensiveness(self):
        spec = long_range_zz_chain(4, exponent=2.0)
        # interior site: distance-1 both ways plus one distance-2 partner
        assert spec.extensiveness == pytest.approx(1.0 + 1.0 + 0.25)
        assert spec.n_groups == 3
        assert spec.locality == 2
        assert not spec.non_commuting_groups

    def test_steep_exponent_approaches_nearest_neighbor(self):
        spec = long_range_zz_chain(6, exponent=50.0)
        assert spec.extensiveness == pytest.approx(2.0, abs=1e-10)

    def test_group_labels_are_distances(self):
        spec = long_range_zz_chain(5, exponent=1.0)
        for d in range(1, 5):
            s = spec.group_sum(d)
            assert len(s) == 5 - d
            for t in s.terms():
                lo, hi = t.support
                assert hi - lo == d


class TestDocumentForm:
    def test_round_trip(self, tmp_path):
        spec = heisenberg_chain(3, coupling=0.9, field=0.1)
        doc = spec_to_document(spec)
        path = tmp_path / "ham.json"
        path.write_text(json.dumps(doc))
        back = load_spec(path)
        assert back.n_sites == spec.n_sites
        assert back.n_groups == spec.n_groups
        assert back.extensiveness == pytest.approx(spec.extensiveness)
        assert back.total_one_norm == pytest.approx(spec.total_one_norm)
        assert [t.label for t, _ in back.terms] == [t.label for t, _ in spec.terms]

    def test_rejects_gapped_group_labels(self):
        doc = {
            "n_sites": 2,
            "terms": [
                {"pauli": "XX", "coeff": 1.0, "group": 1},
                {"pauli": "ZZ", "coeff": 1.0, "group": 3},
            ],
        }
        with pytest.raises(ValueError, match="consecutive"):
            load_spec(doc)

    def test_rejects_bad_label_length(self):
        doc = {
            "n_sites": 3,
            "terms": [{"pauli": "XX", "coeff": 1.0, "group": 1}],
        }
        with pytest.raises(ValueError, match="length"):
            load_spec(doc)

    def test_rejects_missing_keys(self):
        with pytest.raises(ValueError, match="missing"):
            load_spec({"terms": []})

    def test_rejects_complex_coefficient(self):
        with pytest.raises(ValueError, match="non-real"):
            make_spec(1, [(PauliTerm.from_label("X", 1j), 1)])


class TestGScaling:
    def test_shallow_power_law_regime(self):
        # small chains still feel the constant offset in sum(1/sqrt(d));
        # the fitted exponent settles onto 1 - exponent only at larger sizes
        report = g_scaling_report(
            lambda n: long_range_zz_chain(n, exponent=0.5), [64, 128, 256, 512]
        )
        assert report.regime == "power"
        assert report.power_slope == pytest.approx(0.5, abs=0.1)

    def test_finite_range_regime(self):
        report = g_scaling_report(
            lambda n: heisenberg_chain(n), [8, 16, 32, 64]
        )
        assert report.regime == "constant"
        assert abs(report.power_slope) <= 1e-12

    def test_critical_exponent_is_logarithmic(self):
        report = g_scaling_report(
            lambda n: long_range_zz_chain(n, exponent=1.0), [8, 16, 32, 64, 128]
        )
        assert report.regime == "logarithmic"

    def test_g_values_recorded(self):
        sizes = [4, 8, 16]
        report = g_scaling_report(
            lambda n: long_range_zz_chain(n, exponent=2.0), sizes
        )
        assert report.sizes == tuple(sizes)
        expected = [long_range_zz_chain(n, 2.0).extensiveness for n in sizes]
        assert np.allclose(report.g_values, expected)
