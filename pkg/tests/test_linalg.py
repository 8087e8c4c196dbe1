import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenolab.errors import ResolventSingularError
from zenolab.linalg import (
    ContourSpec,
    contour_integral,
    eig,
    induced_trace_norm_lb,
    kron_sandwich,
    mat_exp,
    norms,
    resolvent,
    unvec,
    vec,
)


def _random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def mat_exp_taylor(a, terms=60):
    """Reference exponential by plain Taylor summation (test oracle only)."""
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


class TestVec:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        x = _random_complex(rng, (5, 5))
        assert np.array_equal(unvec(vec(x), 5), x)

    def test_column_stacking_order(self):
        x = np.array([[1, 2], [3, 4]], dtype=complex)
        assert np.array_equal(vec(x), np.array([1, 3, 2, 4], dtype=complex))

    @given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=25, deadline=None)
    def test_kron_sandwich_matches_triple_product(self, d, seed):
        rng = np.random.default_rng(seed)
        a, b, x = (_random_complex(rng, (d, d)) for _ in range(3))
        lhs = unvec(kron_sandwich(a, b) @ vec(x), d)
        assert np.allclose(lhs, a @ x @ b, atol=1e-10)


class TestMatExp:
    def test_against_taylor(self):
        rng = np.random.default_rng(1)
        a = 0.7 * _random_complex(rng, (6, 6))
        assert np.allclose(mat_exp(a), mat_exp_taylor(a), atol=1e-12)

    def test_semigroup_property(self):
        rng = np.random.default_rng(2)
        a = _random_complex(rng, (4, 4))
        assert np.allclose(mat_exp(a) @ mat_exp(a), mat_exp(2 * a), atol=1e-10)


class TestEig:
    def test_diagonal_values_sorted_by_modulus(self):
        w, v, _ = eig(np.diag([0.2, 1.0, 0.5]).astype(complex))
        assert np.allclose(w, [1.0, 0.5, 0.2])

    def test_residual_small(self):
        rng = np.random.default_rng(3)
        a = _random_complex(rng, (8, 8))
        w, v, _ = eig(a)
        assert np.linalg.norm(a @ v - v @ np.diag(w)) < 1e-8 * np.linalg.norm(a)


class TestResolvent:
    def test_matches_inverse(self):
        a = np.diag([1.0, 0.3]).astype(complex)
        z = 2.0 + 0.5j
        assert np.allclose(resolvent(a, z), np.linalg.inv(z * np.eye(2) - a))

    def test_singularity_guard(self):
        a = np.diag([1.0, 0.3]).astype(complex)
        with pytest.raises(ResolventSingularError):
            resolvent(a, 1.0)


class TestContourIntegral:
    def test_spectral_projector_of_diagonal(self):
        # circle of radius 0.2 around z = 1 encloses only the eigenvalue 1
        a = np.diag([1.0, 0.3]).astype(complex)
        spec = ContourSpec(center=1.0, radius=0.2)
        p = contour_integral(lambda z: resolvent(a, z), spec)
        assert np.max(np.abs(p - np.diag([1.0, 0.0]))) < 1e-10

    def test_cauchy_integral_of_scalar(self):
        # f(z) = 1/z around the origin integrates to the identity residue
        spec = ContourSpec(center=0.0, radius=1.0)
        val = contour_integral(lambda z: np.array([[1.0 / z]]), spec)
        assert abs(val[0, 0] - 1.0) < 1e-12

    def test_empty_interior_gives_zero(self):
        a = np.diag([1.0, 0.3]).astype(complex)
        spec = ContourSpec(center=5.0, radius=0.5)
        p = contour_integral(lambda z: resolvent(a, z), spec)
        assert np.max(np.abs(p)) < 1e-10


class TestNorms:
    @given(st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=25, deadline=None)
    def test_norm_triple(self, seed):
        rng = np.random.default_rng(seed)
        a = _random_complex(rng, (5, 5))
        spectral, trace, hs = norms(a)
        s = np.linalg.svd(a, compute_uv=False)
        assert spectral == pytest.approx(s.max())
        assert trace == pytest.approx(s.sum())
        assert hs == pytest.approx(np.linalg.norm(a))
        # standard ordering between the three
        assert spectral <= hs + 1e-12 <= trace + 1e-12


class TestInducedTraceNormLB:
    def test_lower_bounds_identity(self):
        d = 3
        assert induced_trace_norm_lb(np.eye(d * d), d) == pytest.approx(1.0, abs=1e-6)

    def test_scaling(self):
        d = 3
        lb = induced_trace_norm_lb(2.5 * np.eye(d * d), d)
        assert lb == pytest.approx(2.5, abs=1e-6)

    def test_never_exceeds_superoperator_trace_norm_on_transpose(self):
        # transpose map on qubits: induced trace norm is exactly 1
        d = 2
        t = np.zeros((4, 4))
        for i in range(d):
            for j in range(d):
                t[i * d + j, j * d + i] = 1.0
        lb = induced_trace_norm_lb(t, d)
        assert lb <= 1.0 + 1e-8
        assert lb > 0.9
