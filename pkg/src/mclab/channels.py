"""Single-qubit superoperator algebra for rotation noise, measurement, and feedback.

Superoperators are 4x4 complex matrices acting on the row-major vectorization
of the single-qubit density matrix in the ordered basis (|1>, |0>), i.e.
vec(rho) = (rho_11, rho_10, rho_01, rho_00) with |1> the polarized target
state. For a map rho -> A rho B, the matrix is kron(A, B^T).

The rotation-noise ensemble is: axis alpha uniform over {x, y, z}, angle theta
uniform over [0, theta_max], gate exp(i theta sigma_alpha / 2), applied with
probability gamma. ``amplitude`` always denotes theta_max / pi in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import AXES, PAULI

_I2 = np.eye(2, dtype=np.complex128)
_I4 = np.eye(4, dtype=np.complex128)
_VEC_IDENTITY = np.array([1.0, 0.0, 0.0, 1.0], dtype=np.complex128)
_HERM_SWAP = np.array([0, 2, 1, 3])


def _sinc(x: float) -> float:
    """sin(x)/x with a series branch below 1e-4 to avoid the 0/0 at x=0."""
    if abs(x) < 1e-4:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return np.sin(x) / x


def _coherent_coeff(x: float) -> float:
    """(1 - cos x) / (2x), the weight of the commutator term; series below 1e-4."""
    if abs(x) < 1e-4:
        return x / 4.0 - x**3 / 48.0
    return (1.0 - np.cos(x)) / (2.0 * x)


def conjugation_superop(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A rho A^dagger."""
    return np.kron(a, a.conj())


def commutator_superop(axis: str) -> np.ndarray:
    """Superoperator of rho -> [sigma_axis, rho].

    The x and y versions couple the diagonal and off-diagonal components of
    rho (the genuinely quantum part of coherent noise); the z version is
    diagonal-preserving.
    """
    s = PAULI[axis]
    return np.kron(s, _I2) - np.kron(_I2, s.T)


def error_channel(theta_max: float) -> np.ndarray:
    """Rotation noise averaged over axis and angle, as a 4x4 superoperator.

    E(rho) = (1/3) sum_alpha [ (1/2 + sinc) rho + (1/2 - sinc) s rho s
                               + i (1-cos theta_max)/(2 theta_max) [s, rho] ]
    with sinc = sin(theta_max) / (2 theta_max).
    """
    x = 0.5 - 0.5 * _sinc(theta_max)
    y = _coherent_coeff(theta_max)
    acc = np.zeros((4, 4), dtype=np.complex128)
    for axis in AXES:
        s = PAULI[axis]
        acc += (1.0 - x) * _I4 + x * conjugation_superop(s) + 1j * y * commutator_superop(axis)
    return acc / 3.0


def coherent_channel(axis: str, phi: float) -> np.ndarray:
    """Unitary rotation channel rho -> R rho R^dagger with R = exp(i phi sigma/2)."""
    r = np.cos(phi / 2.0) * _I2 + 1j * np.sin(phi / 2.0) * PAULI[axis]
    return conjugation_superop(r)


def incoherent_channel(axis: str, eta: float) -> np.ndarray:
    """Pauli dephasing channel rho -> (1-eta) rho + eta sigma rho sigma."""
    return (1.0 - eta) * _I4 + eta * conjugation_superop(PAULI[axis])


def decompose_error_channel(theta_max: float) -> tuple[float, float]:
    """Split the averaged rotation noise into a fixed coherent rotation angle
    phi and a depolarization rate eta such that

        error_channel(theta_max) = (1/3) sum_alpha incoherent(eta) o coherent(phi)

    with phi = theta_max / 2 and eta = 1/2 - sin(theta_max/2) / theta_max.
    """
    phi = theta_max / 2.0
    eta = 0.5 * (1.0 - _sinc(theta_max / 2.0))
    return phi, eta


def mix_with_identity(superop: np.ndarray, gamma: float) -> np.ndarray:
    """gamma * superop + (1 - gamma) * id: noise that fires with probability gamma."""
    return gamma * superop + (1.0 - gamma) * _I4


def measurement_feedback_channel(p_m: float) -> np.ndarray:
    """Averaged measure-and-correct channel: with probability p_m the qubit is
    measured and flipped to |1> on outcome |0>. Steers population toward |1>;
    off-diagonals are damped by (1 - p_m)."""
    return np.array(
        [
            [1.0, 0.0, 0.0, p_m],
            [0.0, 1.0 - p_m, 0.0, 0.0],
            [0.0, 0.0, 1.0 - p_m, 0.0],
            [0.0, 0.0, 0.0, 1.0 - p_m],
        ],
        dtype=np.complex128,
    )


def measurement_channel(p_m: float) -> np.ndarray:
    """Averaged measurement without feedback: populations untouched,
    off-diagonals damped by (1 - p_m)."""
    return np.diag(np.array([1.0, 1.0 - p_m, 1.0 - p_m, 1.0], dtype=np.complex128))


def choi_matrix(superop: np.ndarray) -> np.ndarray:
    """Choi matrix C[(i,k),(j,l)] = E(|i><j|)[k,l]; PSD iff the map is CP."""
    return superop.reshape(2, 2, 2, 2).transpose(2, 0, 3, 1).reshape(4, 4)


def trace_preservation_residual(superop: np.ndarray) -> float:
    """Max deviation of (row0 + row3) from (1, 0, 0, 1)."""
    return float(np.max(np.abs(superop[0] + superop[3] - _VEC_IDENTITY)))


def unitality_residual(superop: np.ndarray) -> float:
    """Max deviation of Phi(vec(I)) from vec(I)."""
    return float(np.max(np.abs(superop @ _VEC_IDENTITY - _VEC_IDENTITY)))


def hermiticity_residual(superop: np.ndarray) -> float:
    """Max deviation from the conjugation symmetry Phi[swap, swap] = conj(Phi),
    where swap exchanges the two off-diagonal vec components."""
    swapped = superop[np.ix_(_HERM_SWAP, _HERM_SWAP)]
    return float(np.max(np.abs(swapped.conj() - superop)))


def avg_gate_fidelity(amplitude: float, gamma: float) -> float:
    """Closed-form average single-qubit gate fidelity of the rotation-noise
    channel: 1 - (gamma/3) (1 - sin(pi*amplitude)/(pi*amplitude))."""
    return 1.0 - (gamma / 3.0) * (1.0 - _sinc(np.pi * amplitude))


def mc_gate_fidelity(
    amplitude: float, gamma: float, n_samples: int, rng: np.random.Generator
) -> float:
    """Monte Carlo estimate of the average gate fidelity.

    Draws states uniformly on the Bloch sphere and noise from the rotation
    ensemble; averages |<psi| R |psi>|^2 (1 for the no-error branch).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    v = rng.standard_normal((n_samples, 2)) + 1j * rng.standard_normal((n_samples, 2))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    a, b = v[:, 0], v[:, 1]

    faulty = rng.random(n_samples) < gamma
    axes = rng.integers(0, 3, size=n_samples)
    thetas = rng.uniform(0.0, np.pi * amplitude, size=n_samples)

    w = a.conj() * b
    expect = np.choose(
        axes,
        [2.0 * w.real, 2.0 * w.imag, np.abs(a) ** 2 - np.abs(b) ** 2],
    )
    c, s = np.cos(thetas / 2.0), np.sin(thetas / 2.0)
    f = c * c + s * s * expect * expect
    return float(np.mean(np.where(faulty, f, 1.0)))


def classical_error_channel(amplitude: float, gamma: float) -> tuple[float, np.ndarray]:
    """Commutator-free (classical) approximation of the noise channel.

    Returns nu' = gamma * (1 - sinc(theta_max)) / 2 and the 2x2 action on the
    diagonal populations (rho_11, rho_00), a symmetric stochastic matrix.
    """
    nu_prime = gamma * 0.5 * (1.0 - _sinc(np.pi * amplitude))
    mix = 2.0 * nu_prime / 3.0
    transfer = np.array([[1.0 - mix, mix], [mix, 1.0 - mix]])
    return nu_prime, transfer


def xi_parameter(p_m: float, amplitude: float, gamma: float) -> float:
    """Leakage rate out of the steered population in the classical picture:
    xi = (gamma/3) (1 - p_m) (1 - sinc(theta_max))."""
    return (gamma / 3.0) * (1.0 - p_m) * (1.0 - _sinc(np.pi * amplitude))


def classical_combined_transfer(p_m: float, amplitude: float, gamma: float) -> np.ndarray:
    """Population transfer matrix of one measure-feedback + classical-noise step,
    acting on (rho_11, rho_00). Columns sum to 1."""
    xi = xi_parameter(p_m, amplitude, gamma)
    return np.array([[1.0 - xi, p_m + xi], [xi, (1.0 - p_m) - xi]])


def classical_steady_n(p_m: float, amplitude: float, gamma: float) -> float:
    """Closed-form steady-state polarization of the classical picture:
    n = p_m / sqrt(p_m^2 + 2 xi (p_m + xi)).

    Equals the 2-norm-normalized dominant eigenvector polarization of
    classical_combined_transfer. For p_m = 0 the steered population has no
    fixed point away from fully mixed; 0 is returned.
    """
    if p_m == 0.0:
        return 0.0
    xi = xi_parameter(p_m, amplitude, gamma)
    return p_m / np.sqrt(p_m**2 + 2.0 * xi * (p_m + xi))


_monotonicity_checked: set[tuple[float, float]] = set()


def _check_monotone(p_m: float, gamma: float) -> None:
    key = (p_m, gamma)
    if key in _monotonicity_checked:
        return
    grid = [classical_steady_n(p_m, t, gamma) for t in np.linspace(0.0, 1.0, 11)]
    if not all(a >= b - 1e-15 for a, b in zip(grid, grid[1:])):
        raise RuntimeError(
            f"classical_steady_n is not monotone in amplitude at p_m={p_m}, gamma={gamma}"
        )
    _monotonicity_checked.add(key)


def infer_noise_amplitude(
    n_bar: float, p_m: float, gamma: float
) -> tuple[float, float]:
    """Invert the steady-state polarization into a noise amplitude estimate.

    Bisects classical_steady_n (strictly decreasing in amplitude at fixed
    p_m > 0, gamma > 0) and returns (amplitude, implied average gate fidelity).
    """
    if not 0.0 < p_m <= 1.0:
        raise ValueError(f"p_m must be in (0, 1], got {p_m}")
    floor = classical_steady_n(p_m, 1.0, gamma)
    if n_bar > 1.0 or n_bar < floor:
        raise ValueError(
            f"n_bar={n_bar} outside the invertible range [{floor:.6f}, 1] "
            f"at p_m={p_m}, gamma={gamma}"
        )
    if n_bar == 1.0:
        return 0.0, 1.0
    _check_monotone(p_m, gamma)
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if classical_steady_n(p_m, mid, gamma) > n_bar:
            lo = mid
        else:
            hi = mid
    amplitude = 0.5 * (lo + hi)
    return amplitude, avg_gate_fidelity(amplitude, gamma)


@dataclass
class ChannelParams:
    """All derived channel parameters for one (amplitude, gamma, p_m) point."""

    amplitude: float
    gamma: float
    p_m: float
    theta_max: float
    phi: float
    eta: float
    nu: float
    nu_prime: float
    xi: float


def channel_params(amplitude: float, gamma: float, p_m: float = 0.0) -> ChannelParams:
    theta_max = np.pi * amplitude
    phi, eta = decompose_error_channel(theta_max)
    nu = 0.5 * (1.0 - _sinc(theta_max))
    return ChannelParams(
        amplitude=amplitude,
        gamma=gamma,
        p_m=p_m,
        theta_max=theta_max,
        phi=phi,
        eta=eta,
        nu=nu,
        nu_prime=gamma * nu,
        xi=xi_parameter(p_m, amplitude, gamma),
    )
