import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from peelclust.matcore import (
    ConvergenceError,
    apply_mask,
    nuclear_norm,
    project_box,
    shrink_weighted,
    spectral_norm,
    svt,
    sym_eig,
)

from _oracles import random_symmetric, shrink_weighted_bruteforce, svt_bruteforce


class TestSymEig:
    def test_identity(self):
        w, V = sym_eig(np.eye(3))
        assert np.allclose(w, [1, 1, 1])

    def test_diagonal(self):
        w, V = sym_eig(np.diag([5.0, -2.0]))
        assert np.allclose(w, [5.0, -2.0])
        assert np.allclose(np.abs(V), np.eye(2))

    def test_reconstruction_residual(self):
        M = random_symmetric(8, seed=42)
        w, V = sym_eig(M, tol=1e-10)
        assert np.linalg.norm(M - (V * w) @ V.T) < 1e-10
        assert np.all(np.diff(w) <= 0)
        assert np.allclose(V.T @ V, np.eye(8), atol=1e-10)

    def test_unverifiable_tolerance_raises(self):
        M = random_symmetric(6, seed=1)
        with pytest.raises(ConvergenceError, match="6x6"):
            sym_eig(M, tol=1e-40)


class TestSvt:
    def test_zero_threshold_is_identity(self):
        M = random_symmetric(5, seed=0)
        assert np.allclose(svt(M, 0.0), M, atol=1e-12)

    def test_threshold_above_spectrum_gives_zero(self):
        u = np.array([1.0, 2.0, 2.0])
        u /= np.linalg.norm(u)
        M = 3.0 * np.outer(u, u)
        assert np.array_equal(svt(M, 5.0), np.zeros((3, 3)))

    def test_two_by_two_hand_case(self):
        # eigenvalues (3, 1) shrink to (2, 0): remaining part is 2*u u^T
        # for u the normalized all-ones vector
        M = np.array([[2.0, 1.0], [1.0, 2.0]])
        expected = np.array([[1.0, 1.0], [1.0, 1.0]])
        assert np.allclose(svt(M, 1.0), expected, atol=1e-12)

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            svt(np.eye(2), -0.1)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_bruteforce_prox(self, seed):
        M = random_symmetric(5, seed=seed, scale=2.0)
        tau = 0.3 + 0.5 * seed
        assert np.allclose(svt(M, tau), svt_bruteforce(M, tau), atol=1e-6)

    @pytest.mark.parametrize("seed", range(3))
    def test_nuclear_contraction(self, seed):
        M = random_symmetric(5, seed=100 + seed)
        tau = 0.4
        assert nuclear_norm(svt(M, tau)) <= nuclear_norm(M) + 1e-12


class TestShrinkWeighted:
    def test_zero_weights_identity(self):
        M = random_symmetric(4, seed=3)
        assert np.array_equal(shrink_weighted(M, np.zeros((4, 4))), M)

    def test_shrinks_to_zero(self):
        M = np.full((2, 2), 0.3)
        assert np.array_equal(shrink_weighted(M, np.full((2, 2), 0.5)), np.zeros((2, 2)))

    def test_sign_preserving(self):
        M = np.full((2, 2), -1.2)
        out = shrink_weighted(M, np.full((2, 2), 0.2))
        assert np.allclose(out, -1.0)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            shrink_weighted(np.eye(2), -np.eye(2))

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_bruteforce_prox(self, seed):
        rng = np.random.default_rng(seed)
        M = random_symmetric(5, seed=seed, scale=1.5)
        W = np.abs(random_symmetric(5, seed=seed + 50))
        assert np.allclose(
            shrink_weighted(M, W), shrink_weighted_bruteforce(M, W), atol=1e-6
        )


class TestProjectBox:
    def test_inside_unchanged(self):
        M = np.array([[0.2, 0.8], [0.8, 0.5]])
        assert np.array_equal(project_box(M, 0.0, 1.0), M)

    def test_clamps_both_sides(self):
        M = np.array([[1.7, -0.4], [-0.4, 0.3]])
        assert np.array_equal(project_box(M, 0.0, 1.0), [[1.0, 0.0], [0.0, 0.3]])

    def test_empty_box_rejected(self):
        with pytest.raises(ValueError):
            project_box(np.eye(2), 1.0, 0.0)


class TestApplyMask:
    def test_full_and_empty(self):
        M = random_symmetric(4, seed=9)
        assert np.array_equal(apply_mask(M, np.ones((4, 4), bool)), M)
        assert np.array_equal(apply_mask(M, np.zeros((4, 4), bool)), np.zeros((4, 4)))

    def test_diagonal_only(self):
        M = random_symmetric(3, seed=10)
        out = apply_mask(M, np.eye(3, dtype=bool))
        assert np.array_equal(out, np.diag(np.diag(M)))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            apply_mask(np.eye(3), np.ones((2, 2), bool))

    @given(
        arrays(float, (5, 5), elements=st.floats(-10, 10)),
        arrays(bool, (5, 5)),
    )
    @settings(max_examples=50, deadline=None)
    def test_idempotent_and_complementary(self, M, mask):
        M = (M + M.T) / 2.0
        mask = mask | mask.T
        once = apply_mask(M, mask)
        assert np.array_equal(apply_mask(once, mask), once)
        assert np.array_equal(once + apply_mask(M, ~mask), M)


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(7)) == pytest.approx(1.0, rel=1e-10)

    def test_sign_insensitive(self):
        assert spectral_norm(np.diag([-7.0, 3.0])) == pytest.approx(7.0, rel=1e-10)

    def test_symmetric_extremes(self):
        # +5 and -5 extremes: the squared iteration must not oscillate
        assert spectral_norm(np.diag([5.0, -5.0, 1.0])) == pytest.approx(5.0, rel=1e-8)

    def test_zero_matrix(self):
        assert spectral_norm(np.zeros((4, 4))) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_eigensolver(self, seed):
        M = random_symmetric(10, seed=seed)
        w, _ = sym_eig(M)
        assert spectral_norm(M, tol=1e-10) == pytest.approx(
            np.abs(w).max(), rel=1e-8
        )

    def test_iteration_cap_raises(self):
        M = random_symmetric(12, seed=77)
        with pytest.raises(ConvergenceError, match="Rayleigh"):
            spectral_norm(M, tol=1e-14, max_iter=2)
