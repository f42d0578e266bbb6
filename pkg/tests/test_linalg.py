"""Grid, matrix-kernel, and Fourier-layer unit tests."""

import numpy as np
import pytest

from matszego.errors import (
    AliasedIndex,
    DimensionMismatch,
    NegativeEigenvalue,
    NotHermitian,
    Singular,
)
from matszego.linalg import (
    BoundarySampling,
    analytic_part,
    fourier_coefficients,
    gram_mean,
    hermitian_defect,
    left_polar,
    matrix_fourier_coeff,
    midpoint_nodes,
    norm_l2_1,
    norm_l2_2,
    operator_norm,
    principal_sqrt,
    synthesize_at,
    synthesize_on_grid,
)


def random_sampling(rng, node_count=32, dim=2):
    v = rng.standard_normal((node_count, dim, dim)) + 1j * rng.standard_normal(
        (node_count, dim, dim)
    )
    return BoundarySampling(v)


class TestGrid:
    def test_nodes_avoid_singular_angles(self):
        theta = midpoint_nodes(64)
        assert np.all(np.abs(theta) > 1e-12)
        assert np.all(np.abs(np.abs(theta) - np.pi) > 1e-12)
        assert np.all(np.abs(theta) < np.pi)

    def test_nodes_reflection_symmetric(self):
        theta = midpoint_nodes(128)
        assert np.max(np.abs(theta + theta[::-1])) < 1e-15

    def test_node_spacing_uniform(self):
        theta = midpoint_nodes(16)
        gaps = np.diff(theta)
        assert np.allclose(gaps, 2 * np.pi / 16, atol=1e-14)

    @pytest.mark.parametrize("bad", [0, 2, 3, 12, -8])
    def test_rejects_bad_counts(self, bad):
        with pytest.raises(DimensionMismatch):
            midpoint_nodes(bad)

    def test_sampling_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            BoundarySampling(np.zeros((8, 2, 3)))
        with pytest.raises(DimensionMismatch):
            BoundarySampling(np.zeros((6, 2, 2)))

    def test_reflect_matches_angle_negation(self):
        f = BoundarySampling.from_function(
            lambda t: np.exp(1j * t)[:, None, None] * np.eye(1), 32, 1
        )
        g = f.reflect()
        assert np.allclose(g.values[:, 0, 0], np.exp(-1j * f.theta), atol=1e-14)


class TestMatrixKernels:
    def test_operator_norm_is_largest_singular_value(self):
        a = np.array([[3.0, 0.0], [0.0, -4.0]])
        assert operator_norm(a) == pytest.approx(4.0)

    def test_hermitian_defect_zero_for_hermitian(self):
        a = np.array([[2.0, 1j], [-1j, 5.0]])
        assert hermitian_defect(a) < 1e-15

    def test_sqrt_identity(self):
        assert np.allclose(principal_sqrt(np.eye(3)), np.eye(3), atol=1e-14)

    def test_sqrt_diagonal(self):
        a = np.diag([4.0, 9.0])
        assert np.allclose(principal_sqrt(a), np.diag([2.0, 3.0]), atol=1e-14)

    def test_sqrt_reconstructs_random_gram(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            a = x.conj().T @ x
            s = principal_sqrt(a)
            assert float(operator_norm(s @ s - a)) < 1e-12 * max(1.0, float(operator_norm(a)))
            assert hermitian_defect(s) < 1e-12

    def test_sqrt_fixes_projectors(self):
        exact = np.diag([1.0, 1.0, 0.0])
        assert float(operator_norm(principal_sqrt(exact) - exact)) < 1e-15
        # rotated projector carries O(eps) eigenvalue noise; sqrt turns
        # that into O(sqrt(eps)), so the bound is looser here
        rng = np.random.default_rng(5)
        v = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        p = v @ v.conj().T
        assert float(operator_norm(principal_sqrt(p) - p)) < 1e-7

    def test_sqrt_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            principal_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_sqrt_rejects_negative(self):
        with pytest.raises(NegativeEigenvalue):
            principal_sqrt(np.diag([1.0, -0.5]))

    def test_polar_identity_and_scalar(self):
        u, p = left_polar(np.eye(2))
        assert np.allclose(u, np.eye(2), atol=1e-14)
        assert np.allclose(p, np.eye(2), atol=1e-14)
        u, p = left_polar(2.0 * np.eye(2))
        assert np.allclose(u, np.eye(2), atol=1e-14)
        assert np.allclose(p, 2.0 * np.eye(2), atol=1e-14)

    def test_polar_reconstructs_random(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            u, p = left_polar(a)
            assert float(operator_norm(a - u @ p)) < 1e-12 * float(operator_norm(a))
            assert float(operator_norm(u.conj().T @ u - np.eye(3))) < 1e-12
            assert float(operator_norm(p - principal_sqrt(a.conj().T @ a))) < 1e-11

    def test_polar_rejects_singular(self):
        with pytest.raises(Singular):
            left_polar(np.diag([1.0, 0.0]))


class TestNorms:
    def test_constant_identity(self):
        f = BoundarySampling(np.broadcast_to(np.eye(2), (16, 2, 2)).copy())
        assert norm_l2_1(f) == pytest.approx(1.0)
        assert norm_l2_2(f) == pytest.approx(1.0)

    def test_zero(self):
        f = BoundarySampling(np.zeros((16, 2, 2)))
        assert norm_l2_1(f) == 0.0
        assert norm_l2_2(f) == 0.0

    def test_equivalence_sandwich(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            dim = int(rng.integers(1, 5))
            f = random_sampling(rng, 32, dim)
            n1, n2 = norm_l2_1(f), norm_l2_2(f)
            assert n2 <= n1 + 1e-12
            assert n1 <= np.sqrt(dim) * n2 + 1e-12

    def test_gram_product_bound(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            dim = int(rng.integers(1, 5))
            f = random_sampling(rng, 32, dim)
            g = random_sampling(rng, 32, dim)
            lhs = float(operator_norm(gram_mean(f, g)))
            assert lhs <= dim * norm_l2_2(f) * norm_l2_2(g) + 1e-12


class TestFourier:
    def test_constant_coefficients(self):
        c = np.array([[1.0, 2.0], [3.0, 4.0]])
        f = BoundarySampling(np.broadcast_to(c, (16, 2, 2)).copy())
        assert np.allclose(matrix_fourier_coeff(f, 0), c, atol=1e-14)
        assert float(operator_norm(matrix_fourier_coeff(f, 3))) < 1e-14

    def test_single_mode(self):
        f = BoundarySampling.from_function(
            lambda t: np.exp(2j * t)[:, None, None] * np.eye(2), 32, 2
        )
        assert np.allclose(matrix_fourier_coeff(f, 2), np.eye(2), atol=1e-13)
        assert float(operator_norm(matrix_fourier_coeff(f, 1))) < 1e-13

    def test_aliased_index_rejected(self):
        f = BoundarySampling(np.zeros((16, 1, 1)))
        with pytest.raises(AliasedIndex):
            matrix_fourier_coeff(f, 8)
        with pytest.raises(AliasedIndex):
            matrix_fourier_coeff(f, -8)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(19)
        f = random_sampling(rng, 32, 2)
        n_vals, coeffs = fourier_coefficients(f)
        for n in (-7, -1, 0, 1, 5):
            k = int(np.flatnonzero(n_vals == n)[0])
            assert np.allclose(coeffs[k], matrix_fourier_coeff(f, n), atol=1e-13)

    def test_synthesis_round_trip(self):
        rng = np.random.default_rng(23)
        f = random_sampling(rng, 64, 3)
        n_vals, coeffs = fourier_coefficients(f)
        g = synthesize_on_grid(n_vals, coeffs, 64)
        assert float(np.max(np.abs(g.values - f.values))) < 1e-12

    def test_refined_synthesis_keeps_smooth_values(self):
        f = BoundarySampling.from_function(
            lambda t: (1.0 + 0.5 * np.cos(3 * t))[:, None, None] * np.eye(1), 32, 1
        )
        n_vals, coeffs = fourier_coefficients(f)
        g = synthesize_on_grid(n_vals, coeffs, 128)
        expected = 1.0 + 0.5 * np.cos(3 * g.theta)
        assert np.allclose(g.values[:, 0, 0], expected, atol=1e-12)

    def test_synthesize_at_matches_grid(self):
        rng = np.random.default_rng(29)
        f = random_sampling(rng, 32, 2)
        n_vals, coeffs = fourier_coefficients(f)
        vals = synthesize_at(n_vals, coeffs, f.theta)
        assert float(np.max(np.abs(vals - f.values))) < 1e-12

    def test_analytic_part_splits_modes(self):
        f = BoundarySampling.from_function(
            lambda t: (2.0 + np.exp(3j * t) + np.exp(-2j * t))[:, None, None]
            * np.eye(1),
            64,
            1,
        )
        g = analytic_part(f)
        expected = 1.0 + np.exp(3j * f.theta)
        assert np.allclose(g.values[:, 0, 0], expected, atol=1e-12)

    def test_riemann_lebesgue_decay(self):
        # fixed smooth sampling: coefficient envelope must shrink with |n|
        rng = np.random.default_rng(31)
        m = 64
        theta = midpoint_nodes(m)
        vals = np.zeros((m, 2, 2), dtype=complex)
        for k in range(4):
            c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            vals += (np.cos(k * theta) / (1.0 + k**3))[:, None, None] * c
        f = BoundarySampling(vals)
        norms = [float(operator_norm(matrix_fourier_coeff(f, n))) for n in range(m // 4)]
        envelope = [max(norms[n:]) for n in range(len(norms))]
        assert all(a >= b - 1e-15 for a, b in zip(envelope, envelope[1:]))
        assert envelope[-1] < 1e-12
