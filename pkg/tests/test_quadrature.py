import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvteleport import closed_forms as cf
from cvteleport.fock import TruncationConfig, TruncationError
from cvteleport.quadrature import (
    ConvergenceError,
    QuadratureGrid,
    default_grid,
    direct_joint_distribution,
    gauss_legendre_polar,
    numeric_fidelities,
    numeric_joint_distribution,
    numeric_single_mode_distribution,
    outcome_averaged_moments,
)
from cvteleport.transfer import PolarizationQubit

Q_SET = [0.0, 0.3, 0.5, 0.7, 0.9]
H = PolarizationQubit(1, 0)


def random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return PolarizationQubit.normalized(*v)


class TestGrid:
    def test_gaussian_integral(self):
        g = gauss_legendre_polar(48, 8, 8.0)
        betas, w = g.points()
        assert np.sum(w * np.exp(-np.abs(betas) ** 2)) == pytest.approx(math.pi, abs=1e-13)
        betas, w = g.points(use_symmetry=True)
        assert np.sum(w * np.exp(-np.abs(betas) ** 2)) == pytest.approx(math.pi, abs=1e-13)

    def test_angular_harmonics_vanish(self):
        betas, w = gauss_legendre_polar(16, 8, 3.0).points()
        for k in range(1, 8):
            scale = np.sum(w * np.abs(betas) ** k)
            assert abs(np.sum(w * betas ** k)) < 1e-14 * scale

    def test_default_cut(self):
        assert default_grid(0.6).radius_cut == pytest.approx(6 / 0.8)
        assert default_grid(0.0).angular_count == 32

    def test_invariants(self):
        g = default_grid(0.5)
        assert all(w > 0 for _, w in g.radial_nodes)
        with pytest.raises(ValueError):
            QuadratureGrid(np.array([1.0, 0.5]), np.array([1.0, 1.0]), 8, 2.0)
        with pytest.raises(ValueError):
            QuadratureGrid(np.array([0.5, 1.0]), np.array([1.0, 1.0]), 7, 2.0)
        with pytest.raises(ValueError):
            QuadratureGrid(np.array([0.5, 3.0]), np.array([1.0, 1.0]), 8, 2.0)

    def test_refined_doubles(self):
        g = default_grid(0.3, radial=20)
        assert g.refined().radial_count == 40
        assert g.refined().radius_cut == g.radius_cut


class TestSingleMode:
    def test_vacuum_without_entanglement(self):
        r = numeric_single_mode_distribution(0.0, 0, 10)
        np.testing.assert_allclose(r.probabilities, 0.5 ** (np.arange(11) + 1), atol=1e-12)
        assert r.probabilities[0] == pytest.approx(0.5, abs=1e-12)

    def test_photon_without_entanglement(self):
        r = numeric_single_mode_distribution(0.0, 1, 10)
        assert r.probabilities[:3] == pytest.approx([0.25, 0.25, 0.1875], abs=1e-12)
        n = np.arange(11)
        np.testing.assert_allclose(r.probabilities, 0.5 ** (n + 2) * (1 + n), atol=1e-12)

    def test_strong_entanglement_mean(self):
        r = numeric_single_mode_distribution(0.9, 1, 30)
        assert np.argmax(r.probabilities) == 1
        assert np.dot(np.arange(31), r.probabilities) == pytest.approx(2 / 1.9, abs=1e-6)

    @pytest.mark.parametrize("q", Q_SET)
    def test_matches_closed_forms(self, q):
        one = numeric_single_mode_distribution(q, 1, 10)
        vac = numeric_single_mode_distribution(q, 0, 10)
        n = range(11)
        assert np.max(np.abs(one.probabilities - [cf.p1(q, k) for k in n])) < 1e-6
        assert np.max(np.abs(vac.probabilities - [cf.p0(q, k) for k in n])) < 1e-6
        assert abs(one.total - 1) < 1e-4 and abs(vac.total - 1) < 1e-4

    @pytest.mark.parametrize("q", [0.0, 0.5, 0.9])
    def test_symmetry_shortcut_agrees(self, q):
        full = numeric_single_mode_distribution(q, 1, 12)
        ray = numeric_single_mode_distribution(q, 1, 12, use_symmetry=True)
        np.testing.assert_allclose(ray.probabilities, full.probabilities, atol=1e-14)

    @pytest.mark.parametrize("q", [0.0, 0.5, 0.9])
    def test_refinement_within_reported_error(self, q):
        base = default_grid(q)
        r = numeric_single_mode_distribution(q, 1, 20, base)
        finer = numeric_single_mode_distribution(q, 1, 20, base.refined())
        assert np.max(np.abs(finer.probabilities - r.probabilities)) <= r.grid_estimate_error
        assert r.history[-1][0] == 2 * base.radial_count

    def test_deterministic(self):
        a = numeric_single_mode_distribution(0.7, 1, 10)
        b = numeric_single_mode_distribution(0.7, 1, 10)
        assert a.probabilities.tobytes() == b.probabilities.tobytes()

    def test_convergence_error(self):
        coarse = gauss_legendre_polar(3, 8, 6.0)
        with pytest.raises(ConvergenceError) as info:
            numeric_single_mode_distribution(0.0, 1, 5, coarse)
        assert len(info.value.history) == 2

    def test_truncation_error(self):
        with pytest.raises(TruncationError):
            numeric_single_mode_distribution(0.9, 1, 0, cfg=TruncationConfig(6))

    @pytest.mark.parametrize("kwargs", [dict(n_max=35), dict(input_photons=2), dict(q=0.95), dict(q=1.0)])
    def test_preconditions(self, kwargs):
        args = dict(q=0.5, input_photons=1, n_max=10) | kwargs
        with pytest.raises(ValueError):
            numeric_single_mode_distribution(**args)

    def test_high_q_with_explicit_grid(self):
        q = 0.97
        r = numeric_single_mode_distribution(q, 1, 10, default_grid(q, radial=96))
        assert np.max(np.abs(r.probabilities - [cf.p1(q, k) for k in range(11)])) < 1e-6


class TestJoint:
    def test_product_values_without_entanglement(self):
        j = numeric_joint_distribution(0.0, H, 10)
        assert j.probabilities[1, 0] == pytest.approx(0.25 * 0.5, abs=1e-12)
        assert j.probabilities[0, 1] == pytest.approx(0.25 * 0.25, abs=1e-12)

    @pytest.mark.parametrize("q", Q_SET)
    def test_normalization(self, q):
        j = numeric_joint_distribution(q, H, 30)
        assert abs(j.total - 1) < 1e-4
        assert j.residual_mass >= 0

    def test_vertical_table_is_transposed(self):
        h = numeric_joint_distribution(0.4, H, 8, frame="hv")
        v = numeric_joint_distribution(0.4, PolarizationQubit(0, 1), 8, frame="hv")
        np.testing.assert_allclose(v.probabilities, h.probabilities.T, atol=1e-15)
        m = numeric_joint_distribution(0.4, PolarizationQubit(0, 1), 8, method="moments", frame="hv")
        np.testing.assert_allclose(m.probabilities, h.probabilities.T, atol=1e-12)

    def test_rotate_refuses_general_hv(self):
        with pytest.raises(ValueError):
            numeric_joint_distribution(0.4, PolarizationQubit.normalized(1, 1), 5, frame="hv")

    @pytest.mark.parametrize("seed", range(3))
    def test_moments_route_is_basis_invariant(self, seed):
        qb = random_qubit(np.random.default_rng(seed))
        ref = numeric_joint_distribution(0.5, H, 10)
        got = numeric_joint_distribution(0.5, qb, 10, method="moments")
        np.testing.assert_allclose(got.probabilities, ref.probabilities, atol=1e-10)

    def test_diagonal_qubit_total_photon_marginal(self):
        ref = numeric_joint_distribution(0.5, H, 10)
        hv = numeric_joint_distribution(0.5, PolarizationQubit.normalized(1, 1), 10,
                                        method="moments", frame="hv")
        a = numeric_fidelities(ref, 6)
        b = numeric_fidelities(hv, 6)
        for N in range(7):
            assert b.P[N] == pytest.approx(a.P[N], abs=1e-6)

    def test_hv_table_of_diagonal_qubit_is_symmetric(self):
        hv = numeric_joint_distribution(0.5, PolarizationQubit.normalized(1, 1), 6,
                                        method="moments", frame="hv")
        np.testing.assert_allclose(hv.probabilities, hv.probabilities.T, atol=1e-12)

    def test_moments_reject_symmetry_shortcut(self):
        with pytest.raises(ValueError):
            outcome_averaged_moments(0.5, 5, default_grid(0.5), use_symmetry=True)

    def test_cross_moments_vanish(self):
        g = outcome_averaged_moments(0.5, 6, default_grid(0.5))
        # <n|T|0><p|T|1>^* carries the angular phase exp(i theta (n - p + 1))
        n, p = np.meshgrid(np.arange(6), np.arange(6), indexing="ij")
        off = p != n + 1
        assert np.max(np.abs(g[:, 0, :, 1][off])) < 1e-13
        assert np.min(np.abs(g[:, 0, :, 1][~off])) > 1e-6
        # diagonal entries are the single-mode distributions
        assert np.real(g[3, 1, 3, 1]) == pytest.approx(cf.p1(0.5, 3), abs=1e-12)

    @pytest.mark.parametrize("seed", range(2))
    def test_direct_four_dimensional_check(self, seed):
        qb = random_qubit(np.random.default_rng(100 + seed))
        direct = direct_joint_distribution(0.5, qb, 4)
        ref = numeric_joint_distribution(0.5, H, 4).probabilities
        for N in range(5):
            for a in range(N + 1):
                assert direct[a, N - a] == pytest.approx(ref[a, N - a], abs=1e-6)


class TestFidelities:
    def test_without_entanglement(self):
        rec = numeric_fidelities(numeric_joint_distribution(0.0, H, 30), 4)
        assert rec.F_av == pytest.approx(2 / 3, abs=1e-5)
        assert rec.F_1 == pytest.approx(2 / 3, abs=1e-10)
        assert rec.F_N[2] == pytest.approx(2 / 3, abs=1e-10)

    def test_half_squeezing(self):
        rec = numeric_fidelities(numeric_joint_distribution(0.5, H, 30), 4)
        assert rec.F_av == pytest.approx(0.8, abs=1e-5)
        assert rec.F_1 == pytest.approx(10 / 11, abs=1e-10)
        assert rec.F_N[2] == pytest.approx(0.8, abs=1e-10)
        assert rec.F_1 == pytest.approx(rec.F_N[1])

    @pytest.mark.parametrize("q", Q_SET)
    def test_means(self, q):
        rec = numeric_fidelities(numeric_joint_distribution(q, H, 30), 4)
        assert rec.mean_nH == pytest.approx(2 / (1 + q), abs=1e-5)
        assert rec.mean_nV == pytest.approx((1 - q) / (1 + q), abs=1e-5)

    def test_undefined_fidelity(self):
        j = numeric_joint_distribution(0.9, H, 30)
        with pytest.raises(ValueError, match="undefined"):
            numeric_fidelities(j, 20)

    def test_needs_two_mode_table(self):
        with pytest.raises(ValueError):
            numeric_fidelities(numeric_single_mode_distribution(0.5, 1, 5), 2)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.0, 0.9))
    def test_fidelities_match_closed_forms(self, q):
        rec = numeric_fidelities(numeric_joint_distribution(q, H, 12), 4)
        assert rec.F_1 == pytest.approx(cf.f_one(q).value, abs=1e-8)
        for N in (2, 3, 4):
            assert rec.F_N[N] == pytest.approx(cf.f_clone(q, N).value, abs=1e-8)
