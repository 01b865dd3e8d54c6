"""Channel algebra tests: exact matrix identities, Monte Carlo oracles, and the
classical population model with its inverter."""

import numpy as np
import pytest

from mclab.channels import (
    ChannelParams,
    avg_gate_fidelity,
    channel_params,
    choi_matrix,
    classical_combined_transfer,
    classical_error_channel,
    classical_steady_n,
    coherent_channel,
    commutator_superop,
    conjugation_superop,
    decompose_error_channel,
    error_channel,
    hermiticity_residual,
    incoherent_channel,
    infer_noise_amplitude,
    measurement_channel,
    measurement_feedback_channel,
    mc_gate_fidelity,
    mix_with_identity,
    trace_preservation_residual,
    unitality_residual,
    xi_parameter,
)
from mclab.gates import AXES, PAULI

I4 = np.eye(4)
VEC_ID = np.array([1.0, 0.0, 0.0, 1.0])

COMM_X = np.array(
    [[0, -1, 1, 0], [-1, 0, 0, 1], [1, 0, 0, -1], [0, 1, -1, 0]], dtype=complex
)
COMM_Y = 1j * np.array(
    [[0, -1, -1, 0], [1, 0, 0, -1], [1, 0, 0, -1], [0, 1, 1, 0]], dtype=complex
)

THETA_GRID = np.linspace(np.pi / 20, np.pi, 20)


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    return v.reshape(2, 2)


def random_density(rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestErrorChannel:
    def test_zero_angle_is_identity(self):
        np.testing.assert_allclose(error_channel(0.0), I4, atol=1e-14)
        np.testing.assert_allclose(error_channel(1e-9), I4, atol=1e-9)

    def test_pi_coefficients(self):
        # at theta_max = pi the flip weight is 1/2 and the commutator weight 1/pi
        x, y = 0.5, 1.0 / np.pi
        expected = np.zeros((4, 4), dtype=complex)
        for axis in AXES:
            expected += (
                (1 - x) * I4
                + x * conjugation_superop(PAULI[axis])
                + 1j * y * commutator_superop(axis)
            )
        expected /= 3.0
        np.testing.assert_allclose(error_channel(np.pi), expected, atol=1e-14)
        assert abs(y - 0.318309886) < 1e-8

    @pytest.mark.parametrize("theta_max", [0.5, np.pi / 2, 2.0, np.pi])
    def test_monte_carlo_oracle(self, theta_max):
        # average kron(R, R*) over 1e6 draws of the noise ensemble
        rng = np.random.default_rng(100)
        n = 1_000_000
        axes = rng.integers(0, 3, size=n)
        thetas = rng.uniform(0.0, theta_max, size=n)
        c, s = np.cos(thetas / 2.0), np.sin(thetas / 2.0)
        mc = np.zeros((4, 4), dtype=complex)
        for k, axis in enumerate(AXES):
            m = axes == k
            if not m.any():
                continue
            w = m.mean()
            mc += w * (
                np.mean(c[m] ** 2) * I4
                + np.mean(s[m] ** 2) * conjugation_superop(PAULI[axis])
                + 1j * np.mean(c[m] * s[m]) * commutator_superop(axis)
            )
        np.testing.assert_allclose(mc, error_channel(theta_max), atol=2e-3)

    @pytest.mark.parametrize("theta_max", THETA_GRID)
    def test_choi_positive(self, theta_max):
        eigs = np.linalg.eigvalsh(choi_matrix(error_channel(theta_max)))
        assert eigs.min() >= -1e-12

    @pytest.mark.parametrize("theta_max", THETA_GRID)
    def test_channel_structure(self, theta_max):
        phi = error_channel(theta_max)
        assert trace_preservation_residual(phi) < 1e-12
        assert unitality_residual(phi) < 1e-12
        assert hermiticity_residual(phi) < 1e-12


class TestDecomposition:
    def test_closed_form_parameters_at_pi(self):
        phi, eta = decompose_error_channel(np.pi)
        assert phi == pytest.approx(np.pi / 2, abs=1e-15)
        assert eta == pytest.approx(0.5 - 1.0 / np.pi, abs=1e-12)
        assert abs(eta - 0.181690) < 1e-6

    def test_zero_angle_limit(self):
        phi, eta = decompose_error_channel(0.0)
        assert phi == 0.0
        assert eta == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("theta_max", THETA_GRID)
    def test_exact_superoperator_identity(self, theta_max):
        phi, eta = decompose_error_channel(theta_max)
        combined = sum(
            incoherent_channel(axis, eta) @ coherent_channel(axis, phi)
            for axis in AXES
        ) / 3.0
        assert np.max(np.abs(error_channel(theta_max) - combined)) <= 1e-12

    def test_coefficient_consistency(self):
        # eta, phi reproduce the flip and commutator weights of the averaged
        # channel: X = eta cos^2(phi/2) + (1-eta) sin^2(phi/2), Y = (1/2-eta) sin(phi)
        for theta_max in np.linspace(0.05, np.pi, 10):
            phi, eta = decompose_error_channel(theta_max)
            x = eta * np.cos(phi / 2) ** 2 + (1 - eta) * np.sin(phi / 2) ** 2
            y = (0.5 - eta) * np.sin(phi)
            x_err = 0.5 - np.sin(theta_max) / (2 * theta_max)
            y_err = (1 - np.cos(theta_max)) / (2 * theta_max)
            assert abs(x - x_err) <= 1e-14
            assert abs(y - y_err) <= 1e-14

    def test_eta_range(self):
        for theta_max in THETA_GRID:
            _, eta = decompose_error_channel(theta_max)
            assert 0.0 <= eta <= 0.5


class TestElementaryChannels:
    def test_coherent_zero_angle_identity(self):
        np.testing.assert_allclose(coherent_channel("x", 0.0), I4, atol=1e-15)

    def test_full_dephasing_kills_coherences(self):
        phi = incoherent_channel("z", 0.5)
        rho = random_density(np.random.default_rng(1))
        out = unvec(phi @ vec(rho))
        assert abs(out[0, 1]) < 1e-15
        assert abs(out[1, 0]) < 1e-15

    def test_bit_flip_mixes_populations(self):
        out = unvec(incoherent_channel("x", 0.3) @ vec(np.diag([1.0, 0.0])))
        np.testing.assert_allclose(np.diag(out).real, [0.7, 0.3], atol=1e-15)

    def test_mix_with_identity(self):
        phi = error_channel(1.0)
        np.testing.assert_allclose(mix_with_identity(phi, 0.0), I4, atol=1e-15)
        np.testing.assert_allclose(mix_with_identity(phi, 1.0), phi, atol=1e-15)
        half = mix_with_identity(phi, 0.5)
        np.testing.assert_allclose(half, 0.5 * phi + 0.5 * I4, atol=1e-15)

    def test_unitarity_of_coherent_channel(self):
        rng = np.random.default_rng(2)
        for axis in AXES:
            phi = coherent_channel(axis, rng.uniform(0, np.pi))
            rho = random_density(rng)
            out = unvec(phi @ vec(rho))
            np.testing.assert_allclose(
                np.trace(out @ out), np.trace(rho @ rho), atol=1e-12
            )


class TestMeasurementChannels:
    @pytest.mark.parametrize("p_m", [0.0, 0.3, 1.0])
    def test_printed_matrices(self, p_m):
        expected_fb = np.array(
            [
                [1, 0, 0, p_m],
                [0, 1 - p_m, 0, 0],
                [0, 0, 1 - p_m, 0],
                [0, 0, 0, 1 - p_m],
            ],
            dtype=complex,
        )
        expected_m = np.diag([1, 1 - p_m, 1 - p_m, 1]).astype(complex)
        np.testing.assert_array_equal(measurement_feedback_channel(p_m), expected_fb)
        np.testing.assert_array_equal(measurement_channel(p_m), expected_m)

    def test_zero_rate_is_identity(self):
        np.testing.assert_array_equal(measurement_feedback_channel(0.0), I4)
        np.testing.assert_array_equal(measurement_channel(0.0), I4)

    def test_full_feedback_steers_to_target(self):
        phi = measurement_feedback_channel(1.0)
        for a in (0.0, 0.25, 1.0):
            out = unvec(phi @ vec(np.diag([a, 1.0 - a]).astype(complex)))
            np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-15)

    @pytest.mark.parametrize("p_m", [0.2, 0.7])
    def test_offdiagonal_damping(self, p_m):
        for phi in (measurement_feedback_channel(p_m), measurement_channel(p_m)):
            assert phi[1, 1] == pytest.approx(1 - p_m)
            assert phi[2, 2] == pytest.approx(1 - p_m)
            # no coupling between diagonal and off-diagonal components
            assert np.max(np.abs(phi[np.ix_([0, 3], [1, 2])])) == 0.0
            assert np.max(np.abs(phi[np.ix_([1, 2], [0, 3])])) == 0.0

    @pytest.mark.parametrize("p_m", [0.0, 0.3, 1.0])
    def test_trace_preserving_and_unital(self, p_m):
        for phi in (measurement_feedback_channel(p_m), measurement_channel(p_m)):
            assert trace_preservation_residual(phi) < 1e-15
            assert hermiticity_residual(phi) < 1e-15
        # plain measurement is unital; the feedback version steers toward |1>
        # and therefore cannot be (its fixed point is not the maximally mixed state)
        assert unitality_residual(measurement_channel(p_m)) < 1e-15
        if p_m > 0:
            assert unitality_residual(measurement_feedback_channel(p_m)) > 0.0


class TestCommutatorSuperops:
    def test_printed_x_matrix(self):
        np.testing.assert_array_equal(commutator_superop("x"), COMM_X)

    def test_printed_y_matrix(self):
        np.testing.assert_array_equal(commutator_superop("y"), COMM_Y)

    def test_identity_annihilated(self):
        for axis in AXES:
            np.testing.assert_allclose(
                commutator_superop(axis) @ VEC_ID, np.zeros(4), atol=1e-15
            )

    def test_xy_couple_diagonal_to_offdiagonal(self):
        for axis in ("x", "y"):
            phi = commutator_superop(axis)
            assert np.max(np.abs(phi[np.ix_([0, 3], [1, 2])])) > 0.5
            assert np.max(np.abs(phi[np.ix_([1, 2], [0, 3])])) > 0.5

    def test_z_preserves_diagonal_blocks(self):
        phi = commutator_superop("z")
        assert np.max(np.abs(phi[np.ix_([0, 3], [1, 2])])) == 0.0
        assert np.max(np.abs(phi[np.ix_([1, 2], [0, 3])])) == 0.0
        np.testing.assert_allclose(phi @ np.array([1, 0, 0, 0.0]), np.zeros(4))

    def test_matches_direct_commutator(self):
        rng = np.random.default_rng(3)
        rho = random_density(rng)
        for axis in AXES:
            direct = PAULI[axis] @ rho - rho @ PAULI[axis]
            via_superop = unvec(commutator_superop(axis) @ vec(rho))
            np.testing.assert_allclose(via_superop, direct, atol=1e-14)


class TestGateFidelity:
    def test_worst_case_is_two_thirds(self):
        assert avg_gate_fidelity(1.0, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_noiseless_limit_is_exact_one(self):
        for gamma in (0.0, 0.3, 1.0):
            assert avg_gate_fidelity(0.0, gamma) == 1.0

    def test_closed_form_value(self):
        assert avg_gate_fidelity(0.5, 0.5) == pytest.approx(0.939437, abs=1e-6)

    def test_monotone_decreasing_in_both_arguments(self):
        grid = np.linspace(0, 1, 11)
        f_theta = [avg_gate_fidelity(t, 0.7) for t in grid]
        f_gamma = [avg_gate_fidelity(0.7, g) for g in grid]
        assert all(a >= b for a, b in zip(f_theta, f_theta[1:]))
        assert all(a >= b for a, b in zip(f_gamma, f_gamma[1:]))

    def test_mc_zero_amplitude_is_exact(self):
        rng = np.random.default_rng(4)
        assert mc_gate_fidelity(0.0, 1.0, 10_000, rng) == 1.0

    def test_mc_worst_case(self):
        rng = np.random.default_rng(5)
        est = mc_gate_fidelity(1.0, 1.0, 1_000_000, rng)
        assert abs(est - 2.0 / 3.0) < 2e-3

    def test_mc_matches_closed_form_on_grid(self):
        # unbiased-estimator check: chunked estimates give a standard error,
        # and the pooled estimate must sit within 3 sigma of the closed form
        rng = np.random.default_rng(6)
        chunks, chunk_size = 20, 10_000
        for amplitude in (0.2, 0.4, 0.6, 0.8, 1.0):
            for gamma in (0.25, 0.5, 1.0):
                ests = np.array(
                    [mc_gate_fidelity(amplitude, gamma, chunk_size, rng) for _ in range(chunks)]
                )
                se = ests.std(ddof=1) / np.sqrt(chunks)
                diff = abs(ests.mean() - avg_gate_fidelity(amplitude, gamma))
                assert diff < max(3 * se, 1e-4), (amplitude, gamma, diff, se)


class TestClassicalModel:
    def test_nu_prime_values(self):
        assert classical_error_channel(0.0, 0.7)[0] == 0.0
        assert classical_error_channel(1.0, 0.5)[0] == pytest.approx(0.25, abs=1e-15)
        assert classical_error_channel(1.0, 1.0)[0] == pytest.approx(0.5, abs=1e-15)

    def test_diagonal_transfer_is_symmetric_stochastic(self):
        nu_prime, transfer = classical_error_channel(0.8, 0.5)
        mix = 2 * nu_prime / 3
        np.testing.assert_allclose(
            transfer, [[1 - mix, mix], [mix, 1 - mix]], atol=1e-15
        )
        np.testing.assert_allclose(transfer.sum(axis=0), [1.0, 1.0], atol=1e-15)

    def test_xi_value(self):
        assert xi_parameter(0.8, 1.0, 0.5) == pytest.approx(1.0 / 30.0, abs=1e-15)

    def test_combined_transfer_edge_cases(self):
        np.testing.assert_allclose(
            classical_combined_transfer(1.0, 1.0, 0.5), [[1, 1], [0, 0]], atol=1e-15
        )
        np.testing.assert_allclose(
            classical_combined_transfer(0.3, 0.0, 0.5),
            [[1, 0.3], [0, 0.7]],
            atol=1e-15,
        )

    def test_combined_transfer_columns_sum_to_one(self):
        for p_m in (0.1, 0.5, 0.9):
            t = classical_combined_transfer(p_m, 0.8, 0.5)
            np.testing.assert_allclose(t.sum(axis=0), [1.0, 1.0], atol=1e-15)

    def test_steady_n_perfect_monitoring(self):
        for amplitude in (0.0, 0.5, 1.0):
            assert classical_steady_n(1.0, amplitude, 0.5) == 1.0

    def test_steady_n_reference_values(self):
        assert classical_steady_n(0.8, 1.0, 0.5) == pytest.approx(0.9592, abs=5e-5)
        assert classical_steady_n(0.4, 1.0, 0.5) == pytest.approx(0.7845, abs=5e-5)

    def test_steady_n_matches_power_iteration_fixed_point(self):
        # 2-norm-normalized dominant eigenvector of the transfer matrix
        def l2_fixed_point(m: np.ndarray) -> float:
            v = np.array([1.0, 0.0])
            for _ in range(400):
                v = m @ v
                v /= np.linalg.norm(v)
            return v[0] - v[1]

        for p_m in np.linspace(0.1, 1.0, 10):
            for amplitude in np.linspace(0.0, 1.0, 10):
                m = classical_combined_transfer(p_m, amplitude, 0.5)
                assert abs(
                    classical_steady_n(p_m, amplitude, 0.5) - l2_fixed_point(m)
                ) < 1e-6

    def test_steady_n_differs_from_trace_normalized_fixed_point(self):
        # the closed form normalizes the eigenvector in 2-norm; the physical
        # (trace-normalized) stationary polarization p/(p+2 xi) is smaller.
        # Recorded deviation at (p_m=0.8, amplitude=1, gamma=0.5): ~0.036.
        xi = xi_parameter(0.8, 1.0, 0.5)
        trace_normalized = 0.8 / (0.8 + 2 * xi)
        closed = classical_steady_n(0.8, 1.0, 0.5)
        assert closed > trace_normalized
        assert abs(closed - trace_normalized) > 0.03

    def test_fully_mixed_limit(self):
        assert classical_steady_n(0.0, 1.0, 0.5) == 0.0


class TestInverter:
    def test_perfect_order_parameter_maps_to_zero_noise(self):
        theta, fid = infer_noise_amplitude(1.0, 0.8, 0.5)
        assert theta == 0.0
        assert fid == 1.0

    def test_roundtrip(self):
        n_bar = classical_steady_n(0.8, 0.6, 0.5)
        theta, fid = infer_noise_amplitude(n_bar, 0.8, 0.5)
        assert abs(theta - 0.6) < 1e-9
        assert fid == pytest.approx(avg_gate_fidelity(0.6, 0.5), abs=1e-12)

    def test_below_floor_rejected(self):
        with pytest.raises(ValueError):
            infer_noise_amplitude(0.3, 0.8, 0.5)

    def test_above_one_rejected(self):
        with pytest.raises(ValueError):
            infer_noise_amplitude(1.0 + 1e-9, 0.8, 0.5)

    def test_invalid_p_m_rejected(self):
        with pytest.raises(ValueError):
            infer_noise_amplitude(0.9, 0.0, 0.5)


class TestChannelParams:
    def test_defining_formulas(self):
        p = channel_params(0.8, 0.5, p_m=0.4)
        theta_max = 0.8 * np.pi
        assert isinstance(p, ChannelParams)
        assert p.phi == pytest.approx(theta_max / 2, abs=1e-14)
        assert p.eta == pytest.approx(
            0.5 - np.sin(theta_max / 2) / theta_max, abs=1e-14
        )
        assert p.nu == pytest.approx(
            0.5 * (1 - np.sin(theta_max) / theta_max), abs=1e-14
        )
        assert p.nu_prime == pytest.approx(0.5 * p.nu, abs=1e-14)
        assert p.xi == pytest.approx(
            (0.5 / 3.0) * 0.6 * (1 - np.sin(theta_max) / theta_max), abs=1e-14
        )
        assert p.xi >= 0.0
