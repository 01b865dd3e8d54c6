"""Gate sampler tests: unitarity, symmetry classes, Haar moments, noise statistics."""

import numpy as np
import pytest
from scipy import stats

from mclab.gates import (
    AXES,
    PAULI,
    PI_ABSORBING,
    PI_U1,
    SymmetryClass,
    absorbing_matrices,
    haar_unitary,
    rotation_gate,
    sample_absorbing_unitary,
    sample_noise_layer,
    sample_u1_unitary,
    symmetry_residual,
    u1_matrices,
)


def unitarity_residual(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


class TestAbsorbingSampler:
    def test_class_invariants(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            g = sample_absorbing_unitary(rng)
            assert g.symmetry_class is SymmetryClass.ABSORBING
            assert unitarity_residual(g.matrix) < 1e-12
            assert symmetry_residual(g, PI_ABSORBING) < 1e-12
            assert abs(abs(g.matrix[3, 3]) - 1.0) < 1e-12

    def test_haar_first_moment_u3(self):
        # E|U_00|^2 = 1/3 for Haar on U(3)
        rng = np.random.default_rng(1)
        mats = absorbing_matrices(100_000, rng)
        for i in range(3):
            for j in range(3):
                assert abs(np.mean(np.abs(mats[:, i, j]) ** 2) - 1 / 3) < 0.01

    def test_phase_uniform(self):
        rng = np.random.default_rng(2)
        phases = np.angle(absorbing_matrices(20_000, rng)[:, 3, 3])
        assert abs(np.mean(phases > 0) - 0.5) < 0.02
        assert abs(np.mean(np.cos(phases))) < 0.02


class TestU1Sampler:
    def test_class_invariants(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            g = sample_u1_unitary(rng)
            assert g.symmetry_class is SymmetryClass.CHARGE_CONSERVING
            assert unitarity_residual(g.matrix) < 1e-12
            assert symmetry_residual(g, PI_U1) < 1e-12

    def test_block_structure_preserves_charge_sector(self):
        rng = np.random.default_rng(4)
        g = sample_u1_unitary(rng).matrix
        out = g @ np.array([0.0, 1.0, 0.0, 0.0], dtype=complex)  # |01>
        assert abs(out[0]) == 0.0
        assert abs(out[3]) == 0.0

    def test_haar_first_moment_u2(self):
        # E|U_11|^2 = 1/2 for Haar on U(2) (middle block)
        rng = np.random.default_rng(5)
        mats = u1_matrices(100_000, rng)
        for i in (1, 2):
            for j in (1, 2):
                assert abs(np.mean(np.abs(mats[:, i, j]) ** 2) - 0.5) < 0.01


class TestHaarUnitary:
    def test_unitary_batch(self):
        rng = np.random.default_rng(6)
        batch = haar_unitary(4, rng, size=50)
        for u in batch:
            assert unitarity_residual(u) < 1e-12

    def test_second_moment_u4(self):
        rng = np.random.default_rng(7)
        batch = haar_unitary(4, rng, size=50_000)
        assert abs(np.mean(np.abs(batch[:, 0, 0]) ** 2) - 0.25) < 0.01


class TestRotationGate:
    def test_zero_angle_is_identity(self):
        for axis in AXES:
            np.testing.assert_allclose(rotation_gate(axis, 0.0), np.eye(2), atol=1e-15)

    def test_pi_x_rotation_is_bit_flip_up_to_phase(self):
        np.testing.assert_allclose(
            rotation_gate("x", np.pi), 1j * PAULI["x"], atol=1e-15
        )

    def test_z_quarter_turn(self):
        expected = np.diag([np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)])
        np.testing.assert_allclose(rotation_gate("z", np.pi / 2), expected, atol=1e-15)

    def test_inverse_composition(self):
        rng = np.random.default_rng(8)
        for axis in AXES:
            theta = rng.uniform(0, np.pi)
            prod = rotation_gate(axis, theta) @ rotation_gate(axis, -theta)
            np.testing.assert_allclose(prod, np.eye(2), atol=1e-14)


class TestNoiseLayer:
    def test_zero_rate_is_empty(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            assert sample_noise_layer(8, 0.0, 1.0, rng) == []

    def test_zero_amplitude_gives_zero_angles(self):
        rng = np.random.default_rng(10)
        events = sample_noise_layer(12, 1.0, 0.0, rng)
        assert len(events) == 12
        assert all(ev.angle == 0.0 for ev in events)

    def test_event_count_mean(self):
        rng = np.random.default_rng(11)
        n = 100_000
        counts = np.array(
            [len(sample_noise_layer(12, 0.5, 1.0, rng)) for _ in range(n)]
        )
        sigma = np.sqrt(12 * 0.5 * 0.5 / n)
        assert abs(counts.mean() - 6.0) < 3 * sigma

    def test_event_count_binomial_chi_square(self):
        # chi-square against Binomial(12, 0.5) at 1% significance
        rng = np.random.default_rng(12)
        n = 100_000
        counts = np.array(
            [len(sample_noise_layer(12, 0.5, 1.0, rng)) for _ in range(n)]
        )
        observed = np.bincount(counts, minlength=13).astype(float)
        expected = stats.binom.pmf(np.arange(13), 12, 0.5) * n
        # merge tail bins with expected occupancy < 5
        keep = expected >= 5
        obs, exp = observed[keep], expected[keep]
        if not keep.all():
            obs = np.concatenate([obs, [observed[~keep].sum()]])
            exp = np.concatenate([exp, [expected[~keep].sum()]])
        _, pvalue = stats.chisquare(obs, exp, sum_check=False)
        assert pvalue > 0.01

    def test_angles_within_range_and_axes_uniform(self):
        rng = np.random.default_rng(13)
        events = [
            ev for _ in range(2000) for ev in sample_noise_layer(6, 0.5, 0.7, rng)
        ]
        angles = np.array([ev.angle for ev in events])
        assert angles.min() >= 0.0
        assert angles.max() <= 0.7 * np.pi
        axis_counts = {a: sum(ev.axis == a for ev in events) for a in AXES}
        total = len(events)
        for a in AXES:
            assert abs(axis_counts[a] / total - 1 / 3) < 0.03


class TestSymmetryResidual:
    def test_identity_commutes_with_everything(self):
        assert symmetry_residual(np.eye(4, dtype=complex), PI_ABSORBING) == 0.0
        assert symmetry_residual(np.eye(4, dtype=complex), PI_U1) == 0.0

    def test_noise_breaks_absorbing_symmetry(self):
        # U (R_x(pi/2) (x) I) has a guaranteed large commutator entry in the
        # polarized row, for every absorbing-class U
        rng = np.random.default_rng(14)
        v = np.kron(rotation_gate("x", np.pi / 2), np.eye(2, dtype=complex))
        for _ in range(10):
            u = sample_absorbing_unitary(rng).matrix
            assert symmetry_residual(u @ v, PI_ABSORBING) > 0.1
