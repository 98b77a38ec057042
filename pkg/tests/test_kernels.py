import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrlearn.kernels import (
    KernelError,
    _certify_positive_definite,
    deformation_profile,
    make_kernel,
    velocity_matrix,
)


class TestVelocity:
    def test_matrix_is_tridiagonal_two_minus_one(self):
        A = velocity_matrix(3)
        expected = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]])
        assert np.array_equal(A, expected)

    def test_inverse_for_t4_matches_dense_inversion(self):
        kernel = make_kernel("velocity", 4)
        # Frozen from the dense inversion of the 3x3 tridiagonal.
        expected = np.array([[3.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 3.0]]) / 4.0
        assert np.allclose(kernel.entries, expected, atol=1e-12)
        assert np.allclose(kernel.entries, np.linalg.inv(velocity_matrix(3)), atol=1e-12)

    @pytest.mark.parametrize("T", [2, 3, 7, 25, 50])
    def test_inverse_times_matrix_is_identity(self, T):
        kernel = make_kernel("velocity", T)
        n = T - 1
        assert np.allclose(kernel.entries @ velocity_matrix(n), np.eye(n), atol=1e-10)


class TestIdentity:
    def test_exactly_identity(self):
        kernel = make_kernel("identity", 10)
        assert np.array_equal(kernel.entries, np.eye(9))


class TestRbf:
    def test_unit_diagonal_and_gaussian_offdiagonal(self):
        kernel = make_kernel("rbf", 4, sigma=1.0)
        assert np.array_equal(np.diag(kernel.entries), np.ones(3))
        assert kernel.entries[0, 1] == pytest.approx(np.exp(-0.5), abs=1e-15)
        assert kernel.entries[0, 2] == pytest.approx(np.exp(-2.0), abs=1e-15)

    @pytest.mark.parametrize("sigma", [1.0, 3.0, 5.0])
    @pytest.mark.parametrize("T", [5, 20, 36, 50])
    def test_wide_sigmas_accepted_across_sizes(self, sigma, T):
        kernel = make_kernel("rbf", T, sigma=sigma)
        assert kernel.size == T - 1

    def test_certificate_rejects_indefinite_matrix(self):
        indefinite = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(KernelError, match=r"sigma=9.0.*n=2"):
            _certify_positive_definite(indefinite, "rbf", 9.0, 2)


class TestValidation:
    def test_t_too_small(self):
        with pytest.raises(KernelError, match="T must be >= 2"):
            make_kernel("identity", 1)

    def test_rbf_requires_sigma(self):
        with pytest.raises(KernelError, match="requires sigma"):
            make_kernel("rbf", 10)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_rbf_rejects_non_positive_sigma(self, sigma):
        with pytest.raises(KernelError, match="sigma must be positive"):
            make_kernel("rbf", 10, sigma=sigma)

    def test_sigma_rejected_for_other_variants(self):
        with pytest.raises(KernelError, match="only meaningful for the rbf"):
            make_kernel("velocity", 10, sigma=1.0)

    def test_unknown_variant(self):
        with pytest.raises(KernelError, match="unknown kernel variant"):
            make_kernel("jerk", 10)


@settings(max_examples=40, deadline=None)
@given(
    T=st.integers(min_value=2, max_value=50),
    variant=st.sampled_from(["identity", "velocity", "rbf"]),
    sigma=st.sampled_from([1.0, 3.0, 5.0]),
)
def test_symmetry_and_positive_definiteness(T, variant, sigma):
    kernel = make_kernel(variant, T, sigma if variant == "rbf" else None)
    entries = kernel.entries
    assert entries.shape == (T - 1, T - 1)
    assert np.max(np.abs(entries - entries.T)) <= 1e-12
    eigenvalues = np.linalg.eigvalsh(entries)
    # Positive definite up to roundoff in the trailing eigenvalues.
    assert eigenvalues[-1] > 0
    assert eigenvalues[0] > -64 * np.finfo(float).eps * (T - 1)


class TestCache:
    def test_same_object_returned(self):
        assert make_kernel("velocity", 17) is make_kernel("velocity", 17)
        assert make_kernel("rbf", 17, 3.0) is make_kernel("rbf", 17, 3.0)
        assert make_kernel("rbf", 17, 3.0) is not make_kernel("rbf", 17, 5.0)

    def test_entries_are_read_only(self):
        kernel = make_kernel("velocity", 9)
        with pytest.raises(ValueError):
            kernel.entries[0, 0] = 99.0

    def test_concurrent_construction_is_consistent(self):
        results = []

        def build():
            results.append(make_kernel("rbf", 33, 2.0))

        threads = [threading.Thread(target=build) for _ in range(8)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert all(r is results[0] for r in results)


class TestDeformationProfile:
    def test_identity_is_standard_basis(self):
        kernel = make_kernel("identity", 8)
        for t in range(1, 8):
            profile = deformation_profile(kernel, t)
            expected = np.zeros(7)
            expected[t - 1] = 1.0
            assert np.array_equal(profile, expected)

    def test_velocity_tent_for_t4(self):
        profile = deformation_profile(make_kernel("velocity", 4), 2)
        assert np.allclose(profile, [0.5, 1.0, 0.5], atol=1e-12)

    def test_rbf_decays_as_gaussian_of_offset(self):
        T, sigma, t = 40, 1.0, 20
        profile = deformation_profile(make_kernel("rbf", T, sigma), t)
        for offset in range(0, 6):
            assert profile[t - 1 + offset] == pytest.approx(np.exp(-(offset**2) / 2.0), abs=1e-12)
            assert profile[t - 1 - offset] == pytest.approx(np.exp(-(offset**2) / 2.0), abs=1e-12)

    def test_value_one_at_corrected_timepoint(self):
        for variant, sigma in [("identity", None), ("velocity", None), ("rbf", 3.0)]:
            kernel = make_kernel(variant, 12, sigma)
            for t in range(1, 12):
                assert deformation_profile(kernel, t)[t - 1] == 1.0

    @pytest.mark.parametrize("t", [0, 12, -1])
    def test_out_of_range_rejected(self, t):
        kernel = make_kernel("velocity", 12)
        with pytest.raises(KernelError, match="outside interior range"):
            deformation_profile(kernel, t)
