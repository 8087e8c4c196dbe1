import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenolab import channels as ch
from zenolab.errors import FaithfulnessError, ParameterError, ValidationError
from zenolab.linalg import trace_norm, vec
from zenolab.semigroup import lindbladian


class TestOperators:
    def test_annihilation_lowers_number_states(self):
        a = ch.annihilation(5)
        for n in range(1, 5):
            e_n = np.zeros(5)
            e_n[n] = 1.0
            assert np.allclose(a @ e_n, np.sqrt(n) * np.eye(5)[n - 1])

    def test_commutator_on_interior_levels(self):
        d = 8
        a = ch.annihilation(d)
        comm = a @ a.conj().T - a.conj().T @ a
        # canonical commutation holds away from the truncation edge
        assert np.allclose(comm[: d - 1, : d - 1], np.eye(d - 1))

    def test_coherent_state_mean_occupation(self):
        alpha = 0.8 + 0.3j
        psi = ch.coherent_state(alpha, 40)
        n_op = np.arange(40)
        assert np.vdot(psi, n_op * psi).real == pytest.approx(abs(alpha) ** 2, rel=1e-10)


class TestDepolarizing:
    def test_action_formula(self):
        rng = np.random.default_rng(0)
        sigma = np.diag([0.5, 0.3, 0.2]).astype(complex)
        s = ch.depolarizing(0.3, sigma)
        x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        expected = 0.7 * x + 0.3 * np.trace(x) * sigma
        assert np.allclose(s.apply(x), expected)

    def test_spectrum_two_point(self):
        sigma = np.eye(2, dtype=complex) / 2
        s = ch.depolarizing(0.4, sigma)
        w = np.linalg.eigvals(s.matrix)
        w = np.sort(w.real)
        assert w[:-1] == pytest.approx([0.6] * 3)
        assert w[-1] == pytest.approx(1.0)

    def test_rejects_non_density_sigma(self):
        with pytest.raises((ValidationError, ch.StateError if hasattr(ch, "StateError") else ValidationError)):
            ch.depolarizing(0.5, np.diag([0.9, 0.9]).astype(complex))


class TestOscillatorConjugation:
    def test_kth_power_is_identity(self):
        for k in (2, 3):
            s = ch.oscillator_conjugation(k, 1.0, ch.TruncationSpec(6))
            power = np.linalg.matrix_power(s.matrix, k)
            assert np.allclose(power, np.eye(36), atol=1e-12)

    def test_diagonal_states_are_invariant(self):
        s = ch.oscillator_conjugation(3, 2.0, ch.TruncationSpec(5))
        rho = np.diag([0.4, 0.3, 0.2, 0.1, 0.0]).astype(complex)
        assert np.allclose(s.apply(rho), rho)


class TestAttenuator:
    def test_kraus_completeness(self):
        kc = ch.attenuator(0.3, ch.TruncationSpec(16))
        assert kc.completeness_defect < 1e-10

    def test_coherent_state_covariance(self):
        # |alpha> flows to |e^{-t} alpha| under the loss channel
        t, alpha, d = 0.4, 0.9, 32
        s = ch.attenuator(t, ch.TruncationSpec(d)).to_superoperator()
        psi = ch.coherent_state(alpha, d)
        out = s.apply(np.outer(psi, psi.conj()))
        shrunk = ch.coherent_state(alpha * np.exp(-t / 2), d)
        target = np.outer(shrunk, shrunk.conj())
        assert trace_norm(out - target) < 1e-8

    def test_vacuum_is_fixed(self):
        s = ch.attenuator(0.7, ch.TruncationSpec(8)).to_superoperator()
        vac = np.zeros((8, 8), dtype=complex)
        vac[0, 0] = 1.0
        assert np.allclose(s.apply(vac), vac, atol=1e-12)

    def test_completeness_exact_at_any_truncation(self):
        # loss only moves weight downward, so the truncated Kraus family
        # closes exactly (binomial theorem on each diagonal entry)
        for t, d in ((1e-4, 4), (2.0, 6), (0.3, 24)):
            assert ch.attenuator(t, ch.TruncationSpec(d)).completeness_defect < 1e-12


class TestStationaryStates:
    def test_qou_geometric_state_is_stationary(self):
        d = 20
        l_super = lindbladian(ch.qou_generator(0.5, 1.0, ch.TruncationSpec(d)))
        rho = ch.geometric_state(0.25, d)
        resid = trace_norm((l_super.matrix @ vec(rho)).reshape(d, d, order="F"))
        assert resid < 1e-10

    def test_qou_rejects_gain_dominated(self):
        with pytest.raises(ParameterError):
            ch.qou_generator(1.0, 0.5, ch.TruncationSpec(8))

    def test_jaynes_cummings_product_state_is_stationary(self):
        d = 25
        mu, lam, r, phi = 1.0, 0.4, 0.7, 1.1
        l_super = lindbladian(
            ch.jaynes_cummings_generator(mu, lam, r, phi, ch.TruncationSpec(d))
        )
        rho = ch.jaynes_cummings_stationary_state(mu, lam, r, phi, d)
        resid = trace_norm((l_super.matrix @ vec(rho)).reshape(d, d, order="F"))
        assert resid < 1e-10

    def test_two_photon_parity_states_are_stationary(self):
        d = 20
        l_super = lindbladian(ch.two_photon_generator(0.5, 1.0, 0.6, ch.TruncationSpec(d)))
        rho_even, rho_odd = ch.parity_geometric_states(1.0, 0.6, d)
        for rho in (rho_even, rho_odd):
            resid = trace_norm((l_super.matrix @ vec(rho)).reshape(d, d, order="F"))
            assert resid < 1e-10

    def test_parity_states_have_disjoint_support(self):
        rho_even, rho_odd = ch.parity_geometric_states(1.0, 0.5, 12)
        diag_even = np.diag(rho_even).real
        diag_odd = np.diag(rho_odd).real
        assert np.all(diag_even[1::2] == 0)
        assert np.all(diag_odd[0::2] == 0)
        assert np.trace(rho_even).real == pytest.approx(1.0)
        assert np.trace(rho_odd).real == pytest.approx(1.0)


class TestHsEmbed:
    def test_similarity_preserves_spectrum(self):
        d = 6
        l_super = lindbladian(ch.qou_generator(0.4, 1.0, ch.TruncationSpec(d)))
        rho = ch.geometric_state(0.16, d)
        embedded, _ = ch.hs_embed(l_super, rho)
        w0 = np.sort_complex(np.linalg.eigvals(l_super.matrix))
        w1 = np.sort_complex(np.linalg.eigvals(embedded.matrix))
        assert np.allclose(w0, w1, atol=1e-8)

    def test_heisenberg_embedding_is_self_adjoint_for_detailed_balance(self):
        d = 12
        l_super = lindbladian(ch.qou_generator(0.5, 1.0, ch.TruncationSpec(d)))
        rho = ch.geometric_state(0.25, d)
        embedded, _ = ch.hs_embed(l_super.adjoint(), rho)
        a = embedded.matrix
        assert np.linalg.norm(a - a.conj().T) < 1e-10 * np.linalg.norm(a)

    def test_rejects_singular_state(self):
        rho = np.diag([1.0, 0.0, 0.0]).astype(complex)
        zero = lindbladian(ch.qou_generator(0.1, 1.0, ch.TruncationSpec(3)))
        with pytest.raises(FaithfulnessError):
            ch.hs_embed(zero, rho)


class TestVolterra:
    def test_eigenvalues_all_one(self):
        m, _, _ = ch.volterra_contraction(64)
        w = np.linalg.eigvals(m)
        assert np.max(np.abs(w - 1.0)) < 1e-8

    def test_norm_near_one_but_not_identity(self):
        _, norm, defect = ch.volterra_contraction(128)
        assert 0.9 <= norm <= 1.1
        assert defect > 0.3

    @given(st.integers(min_value=8, max_value=200))
    @settings(max_examples=10, deadline=None)
    def test_resolvent_identity(self, grid):
        # M = (I + V)^{-1} means (I + V) M = I
        m, _, _ = ch.volterra_contraction(grid)
        h = 1.0 / grid
        v = np.tril(np.full((grid, grid), h), k=-1)
        assert np.allclose((np.eye(grid) + v) @ m, np.eye(grid), atol=1e-10)
