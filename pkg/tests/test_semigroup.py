import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenolab.errors import ConstraintError, ProjectorError
from zenolab.linalg import kron_sandwich, spectral_norm, unvec, vec
from zenolab.semigroup import (
    GklsGenerator,
    Superoperator,
    effective_zeno_generator,
    evolve,
    lindbladian,
    yosida,
    yosida_lemma_check,
)


def _random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _random_kraus_channel(rng, d, count):
    """Random CPTP Kraus family via a QR-orthonormalized isometry."""
    g = _random_complex(rng, (count * d, d))
    q, _ = np.linalg.qr(g)
    return [q[l * d : (l + 1) * d, :] for l in range(count)]


class TestSuperoperator:
    def test_identity_applies_trivially(self):
        rng = np.random.default_rng(0)
        x = _random_complex(rng, (4, 4))
        assert np.allclose(Superoperator.identity(4).apply(x), x)

    def test_from_conjugation_is_sandwich(self):
        rng = np.random.default_rng(1)
        u = np.linalg.qr(_random_complex(rng, (3, 3)))[0]
        s = Superoperator.from_conjugation(u)
        x = _random_complex(rng, (3, 3))
        assert np.allclose(s.apply(x), u @ x @ u.conj().T)

    def test_composition_matches_sequential_application(self):
        rng = np.random.default_rng(2)
        a = Superoperator(_random_complex(rng, (9, 9)), 3)
        b = Superoperator(_random_complex(rng, (9, 9)), 3)
        x = _random_complex(rng, (3, 3))
        assert np.allclose((a @ b).apply(x), a.apply(b.apply(x)))

    @given(st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=20, deadline=None)
    def test_random_kraus_family_is_quantum_channel(self, seed):
        rng = np.random.default_rng(seed)
        kraus = _random_kraus_channel(rng, 3, 3)
        s = Superoperator.from_kraus(kraus)
        assert s.check_trace_preserving() <= 1e-9
        assert s.check_completely_positive() >= -1e-9
        assert s.check_hermiticity_preserving() <= 1e-9

    def test_transpose_map_is_positive_but_not_cp(self):
        d = 2
        t = np.zeros((4, 4), dtype=complex)
        for i in range(d):
            for j in range(d):
                t[i * d + j, j * d + i] = 1.0
        s = Superoperator(t, d)
        assert s.check_trace_preserving() <= 1e-9
        # Choi matrix of the transpose is the swap, which has eigenvalue -1
        assert s.check_completely_positive() == pytest.approx(-1.0)

    def test_choi_matrix_of_identity_is_maximally_entangled(self):
        d = 3
        choi = Superoperator.identity(d).choi_matrix()
        bell = np.zeros((d * d,), dtype=complex)
        for i in range(d):
            bell[i * d + i] = 1.0
        assert np.allclose(choi, np.outer(bell, bell.conj()))

    def test_adjoint_reverses_hs_inner_product(self):
        rng = np.random.default_rng(3)
        s = Superoperator(_random_complex(rng, (9, 9)), 3)
        x, y = _random_complex(rng, (3, 3)), _random_complex(rng, (3, 3))
        lhs = np.trace(x.conj().T @ s.apply(y))
        rhs = np.trace(s.adjoint().apply(x).conj().T @ y)
        assert lhs == pytest.approx(rhs)


class TestGklsGenerator:
    def test_constraint_residual_is_machine_small(self):
        rng = np.random.default_rng(4)
        h = _random_complex(rng, (4, 4))
        h = (h + h.conj().T) / 2
        ls = [_random_complex(rng, (4, 4)) for _ in range(2)]
        gen = GklsGenerator(4, h, ls)
        assert gen.constraint_residual() < 1e-12

    def test_rejects_nonhermitian_hamiltonian(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ConstraintError):
            GklsGenerator(3, _random_complex(rng, (3, 3)), [])

    def test_lindbladian_annihilates_trace(self):
        rng = np.random.default_rng(6)
        h = _random_complex(rng, (3, 3))
        h = (h + h.conj().T) / 2
        gen = GklsGenerator(3, h, [_random_complex(rng, (3, 3))])
        l_super = lindbladian(gen)
        x = _random_complex(rng, (3, 3))
        assert abs(np.trace(l_super.apply(x))) < 1e-10 * np.linalg.norm(x)

    def test_pure_hamiltonian_gives_commutator(self):
        h = np.diag([0.0, 1.0]).astype(complex)
        l_super = lindbladian(GklsGenerator(2, h, []))
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        assert np.allclose(l_super.apply(x), -1j * (h @ x - x @ h))


class TestEvolve:
    def test_semigroup_at_zero_is_identity(self):
        rng = np.random.default_rng(7)
        h = _random_complex(rng, (3, 3))
        h = (h + h.conj().T) / 2
        l_super = lindbladian(GklsGenerator(3, h, [_random_complex(rng, (3, 3))]))
        assert np.allclose(evolve(l_super, 0.0).matrix, np.eye(9))

    def test_semigroup_step_is_quantum_channel(self):
        rng = np.random.default_rng(8)
        h = _random_complex(rng, (3, 3))
        h = (h + h.conj().T) / 2
        l_super = lindbladian(GklsGenerator(3, h, [_random_complex(rng, (3, 3))]))
        step = evolve(l_super, 0.7, check_quantum=True)
        assert step.check_trace_preserving() <= 1e-9
        assert step.check_completely_positive() >= -1e-9


class TestEffectiveZenoGenerator:
    def test_projects_both_sides(self):
        rng = np.random.default_rng(9)
        sigma = np.diag([0.6, 0.4]).astype(complex)
        p = Superoperator(np.outer(vec(sigma), vec(np.eye(2)).conj()), 2)
        h = np.array([[0, 1], [1, 0]], dtype=complex)
        l_super = lindbladian(GklsGenerator(2, h, []))
        eff = effective_zeno_generator(l_super, p)
        assert np.allclose(eff.matrix, p.matrix @ l_super.matrix @ p.matrix)

    def test_rejects_non_idempotent(self):
        bad = Superoperator(2 * np.eye(4), 2)
        l_super = Superoperator(np.zeros((4, 4)), 2)
        with pytest.raises(ProjectorError):
            effective_zeno_generator(l_super, bad)


class TestYosida:
    def _line_generator(self, rng, d=3):
        h = _random_complex(rng, (d, d))
        h = (h + h.conj().T) / 2
        return lindbladian(GklsGenerator(d, h, [_random_complex(rng, (d, d))]))

    def test_dissipativity_diagnostic(self):
        rng = np.random.default_rng(10)
        l_super = self._line_generator(rng)
        for k in (1.0, 5.0, 50.0):
            _, diag = yosida(l_super, k)
            assert diag <= 1.0 + 1e-8

    def test_converges_to_generator(self):
        rng = np.random.default_rng(11)
        l_super = self._line_generator(rng)
        deviations = []
        for k in (10.0, 100.0, 1000.0):
            l_k, _ = yosida(l_super, k)
            deviations.append(spectral_norm(l_k.matrix - l_super.matrix))
        assert deviations[2] < deviations[1] < deviations[0]
        # first-order rate in 1/k
        assert deviations[2] < 2 * deviations[1] * (100.0 / 1000.0)

    def test_lemma_check_fits_inverse_k_rate(self):
        rng = np.random.default_rng(12)
        l_super = self._line_generator(rng)
        b = Superoperator.identity(3)
        # k must sit well above ||L|| for the 1/k regime to be visible
        res = yosida_lemma_check(l_super, b, [256, 512, 1024, 2048])
        assert not res["violated"]
        assert res["fitted_constant"] > 0
