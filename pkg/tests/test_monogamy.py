import math

import numpy as np
import pytest

from steerscope.monogamy import (
    ScanSummary,
    default_threads,
    monogamy_check,
    monogamy_scan,
    reduced_correlations,
    reduced_pair,
    state_digest,
    trace_formula,
)
from steerscope.states import EnsembleSpec, decompose, named_state, sample_ensemble, validate

GHZ = named_state("ghz")
W = named_state("w")
ZERO3 = validate(np.diag([1.0] + [0.0] * 7))


def swap_bc(state):
    """Relabel Bob <-> Charlie by permuting the last two tensor factors."""
    t = state.matrix.reshape([2] * 6).transpose(0, 2, 1, 3, 5, 4)
    return validate(t.reshape(8, 8))


class TestReducedPair:
    def test_ghz_ab(self):
        np.testing.assert_allclose(reduced_pair(GHZ, "AB").matrix, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)

    def test_product_ac(self):
        np.testing.assert_allclose(reduced_pair(ZERO3, "AC").matrix, np.diag([1.0, 0, 0, 0]))

    def test_w_ab(self):
        psi_plus = np.array([0, 1, 1, 0]) / math.sqrt(2)
        expected = np.diag([1 / 3, 0, 0, 0]) + 2 / 3 * np.outer(psi_plus, psi_plus)
        np.testing.assert_allclose(reduced_pair(W, "AB").matrix, expected, atol=1e-15)

    def test_unknown_pair(self):
        with pytest.raises(ValueError):
            reduced_pair(GHZ, "AD")

    def test_requires_three_qubits(self):
        with pytest.raises(TypeError):
            reduced_pair(named_state("bell_phi_plus"), "AB")

    def test_w_correlations(self):
        rc = reduced_correlations(W)
        np.testing.assert_allclose(rc.t_ab, np.diag([2 / 3, 2 / 3, -1 / 3]), atol=1e-15)
        np.testing.assert_allclose(rc.t_ac, rc.t_ab, atol=1e-15)


class TestCheck:
    def test_ghz_saturates(self):
        report = monogamy_check(GHZ)
        assert report.s_ba_max == pytest.approx(2, abs=1e-12)
        assert report.s_ca_max == pytest.approx(2, abs=1e-12)
        assert abs(report.lhs - 8) <= 1e-9 and report.saturated
        assert report.bound == 8

    def test_w(self):
        report = monogamy_check(W)
        # T_AB = diag(2/3, 2/3, -1/3): v = v~ = 4/9, s_max = 2 sqrt(8/9)
        assert report.s_ba_max == pytest.approx(4 * math.sqrt(2) / 3, abs=1e-12)
        assert abs(report.lhs - 64 / 9) <= 1e-9
        assert not report.saturated

    def test_product_state_saturates(self):
        report = monogamy_check(ZERO3)
        assert report.s_ba_max == pytest.approx(2, abs=1e-12) == report.s_ca_max
        assert report.saturated

    def test_permutation_swaps_pairs(self):
        for state in sample_ensemble(EnsembleSpec("ginibre_mixed_3q", 10, 5)) + [W]:
            a, b = monogamy_check(state), monogamy_check(swap_bc(state))
            assert a.s_ba_max == pytest.approx(b.s_ca_max, abs=1e-12)
            assert a.s_ca_max == pytest.approx(b.s_ba_max, abs=1e-12)


class TestTraceFormula:
    def test_ghz(self):
        assert trace_formula(GHZ, "AB") == pytest.approx((2.0, 2.0), abs=1e-12)

    def test_w(self):
        # eigenvalues of T T^t: 4/9, 4/9, 1/9 -> trace 1
        two_sqrt_trace, two_sqrt_vv = trace_formula(W, "AB")
        assert two_sqrt_trace == pytest.approx(2.0, abs=1e-12)
        assert two_sqrt_vv == pytest.approx(4 * math.sqrt(2) / 3, abs=1e-12)

    def test_maximally_mixed(self):
        assert trace_formula(validate(np.eye(8) / 8), "AB") == (0.0, 0.0)

    @pytest.mark.parametrize("kind", ["haar_pure_3q", "ginibre_mixed_3q"])
    def test_ordering(self, kind):
        for state in sample_ensemble(EnsembleSpec(kind, 30, 8)):
            for pair in ("AB", "AC", "BC"):
                tr, vv = trace_formula(state, pair)
                t = decompose(reduced_pair(state, pair)).T
                lam = np.linalg.eigvalsh(t @ t.T)
                assert tr >= vv >= 0
                # 2 sqrt(a + l) - 2 sqrt(a) <= 2 sqrt(l)
                assert tr - vv <= 2 * math.sqrt(max(lam[0], 0)) + 1e-12
                if lam[0] > 1e-10:
                    assert tr > vv


class TestScan:
    @pytest.mark.parametrize("kind", ["haar_pure_3q", "ginibre_mixed_3q"])
    def test_no_violations(self, kind):
        summary = monogamy_scan(EnsembleSpec(kind, 200, 7), threads=1)
        assert summary.samples == 200
        assert summary.violations == 0
        assert summary.exclusivity_violations == 0
        assert summary.max_lhs <= 8 + 1e-9

    def test_deterministic_across_thread_counts(self):
        spec = EnsembleSpec("haar_pure_3q", 40, 3)
        one = monogamy_scan(spec, threads=1, keep_reports=True)
        many = monogamy_scan(spec, threads=3, keep_reports=True)
        assert one.as_dict() == many.as_dict()
        assert one.reports == many.reports

    def test_argmax_digest(self):
        spec = EnsembleSpec("haar_pure_3q", 20, 4)
        summary = monogamy_scan(spec, threads=1, keep_reports=True)
        k = int(np.argmax([r.lhs for r in summary.reports]))
        assert summary.argmax_state_digest == state_digest(sample_ensemble(spec)[k])

    def test_rejects_two_qubit_kind(self):
        with pytest.raises(ValueError):
            monogamy_scan(EnsembleSpec("haar_pure_2q", 2, 1))

    def test_exclusivity(self):
        summary = monogamy_scan(EnsembleSpec("haar_pure_3q", 100, 12), threads=1, keep_reports=True)
        for r in summary.reports:
            if r.s_ba_max > 2 + 1e-9:
                assert r.s_ca_max <= 2 + 1e-9
            if r.s_ca_max > 2 + 1e-9:
                assert r.s_ba_max <= 2 + 1e-9


def test_thread_env(monkeypatch):
    monkeypatch.setenv("STEERSCOPE_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("STEERSCOPE_THREADS", "many")
    with pytest.raises(ValueError):
        default_threads()
    monkeypatch.delenv("STEERSCOPE_THREADS")
    assert default_threads() >= 1


def test_summary_dict():
    s = ScanSummary(1, 2.0, 0, "abc")
    assert s.as_dict() == {
        "samples": 1,
        "max_lhs": 2.0,
        "violations": 0,
        "exclusivity_violations": 0,
        "argmax_state_digest": "abc",
    }
