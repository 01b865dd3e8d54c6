"""Samplers for symmetry-constrained Haar unitaries, rotation noise, and symmetry checks."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
}
AXES = ("x", "y", "z")

# Diagonal symmetry operators in the pair basis {|00>,|01>,|10>,|11>}:
# the polarized-sector projector and the pair-charge operator.
PI_ABSORBING = np.array([1.0, 1.0, 1.0, 0.0])
PI_U1 = np.array([0.0, 1.0, 1.0, 2.0])


class SymmetryClass(Enum):
    ABSORBING = "absorbing"
    CHARGE_CONSERVING = "charge_conserving"
    UNCONSTRAINED = "unconstrained"


@dataclass
class TwoQubitUnitary:
    matrix: np.ndarray
    symmetry_class: SymmetryClass


@dataclass
class NoiseEvent:
    """One random single-qubit rotation: exp(i * angle * sigma_axis / 2)."""

    qubit: int
    axis: str
    angle: float


def haar_unitary(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitaries via QR of a complex Ginibre matrix.

    The R-diagonal phase correction makes the QR factorization unique and the
    resulting Q exactly Haar. Returns shape (dim, dim) or (size, dim, dim).
    """
    shape = (dim, dim) if size is None else (size, dim, dim)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (d / np.abs(d))[..., None, :]
    return q


def absorbing_matrices(n: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of n 4x4 unitaries acting as Haar U(3) on {|00>,|01>,|10>} and a
    uniform phase on |11>."""
    u3 = haar_unitary(3, rng, size=n)
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))
    out = np.zeros((n, 4, 4), dtype=np.complex128)
    out[:, :3, :3] = u3
    out[:, 3, 3] = phases
    return out


def u1_matrices(n: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of n 4x4 unitaries block-diagonal over pair charge: phases on
    |00> and |11>, Haar U(2) on {|01>,|10>}."""
    u2 = haar_unitary(2, rng, size=n)
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(n, 2)))
    out = np.zeros((n, 4, 4), dtype=np.complex128)
    out[:, 0, 0] = phases[:, 0]
    out[:, 1:3, 1:3] = u2
    out[:, 3, 3] = phases[:, 1]
    return out


def sample_absorbing_unitary(rng: np.random.Generator) -> TwoQubitUnitary:
    return TwoQubitUnitary(absorbing_matrices(1, rng)[0], SymmetryClass.ABSORBING)


def sample_u1_unitary(rng: np.random.Generator) -> TwoQubitUnitary:
    return TwoQubitUnitary(u1_matrices(1, rng)[0], SymmetryClass.CHARGE_CONSERVING)


def rotation_gate(axis: str, theta: float) -> np.ndarray:
    """exp(i * theta * sigma_axis / 2) = cos(theta/2) I + i sin(theta/2) sigma_axis."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if axis == "x":
        return np.array([[c, 1j * s], [1j * s, c]])
    if axis == "y":
        return np.array([[c, s], [-s, c]], dtype=np.complex128)
    if axis == "z":
        return np.array([[c + 1j * s, 0.0], [0.0, c - 1j * s]])
    raise KeyError(axis)


def sample_noise_events(
    qubits: tuple[int, ...] | list[int],
    gamma: float,
    amplitude: float,
    rng: np.random.Generator,
) -> list[NoiseEvent]:
    """Independent rotation noise on the given qubits.

    Each qubit is hit with probability ``gamma``; a hit draws an axis uniformly
    from {x, y, z} and an angle uniformly from [0, pi * amplitude].
    """
    hits = rng.random(len(qubits)) < gamma
    hit_qubits = [q for q, h in zip(qubits, hits) if h]
    if not hit_qubits:
        return []
    axes = rng.integers(0, 3, size=len(hit_qubits))
    angles = rng.uniform(0.0, np.pi * amplitude, size=len(hit_qubits))
    return [
        NoiseEvent(qubit=q, axis=AXES[a], angle=float(t))
        for q, a, t in zip(hit_qubits, axes, angles)
    ]


def sample_noise_layer(
    num_qubits: int, gamma: float, amplitude: float, rng: np.random.Generator
) -> list[NoiseEvent]:
    """One full layer of rotation noise over qubits 0..L-1."""
    return sample_noise_events(list(range(num_qubits)), gamma, amplitude, rng)


def symmetry_residual(gate, pi_diag: np.ndarray) -> float:
    """Max-entry norm of the commutator [U, diag(pi)]."""
    u = getattr(gate, "matrix", gate)
    comm = u * pi_diag[None, :] - pi_diag[:, None] * u
    return float(np.max(np.abs(comm)))
