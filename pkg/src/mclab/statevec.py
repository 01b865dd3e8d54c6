"""Dense statevector engine: gate application, projective measurement, charge observables.

Basis convention used everywhere in this package: for a register of L qubits,
bit j of the integer basis index holds the state of qubit j (bit value 1 <-> |1>).
A ket string |s0 s1 ... s_{L-1}> therefore maps to index sum_j s_j * 2^j.

Kernels mutate amplitudes in place and stage intermediates in a persistent
per-state scratch buffer: trajectory throughput is allocation-bound well before
it is flop-bound, so the hot paths allocate nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-10
DEGENERATE_BRANCH_TOL = 1e-14
ZERO_BRANCH_TOL = 1e-12

# inner-run length (elements) above which strided access amortizes cache lines
# and gates skip the gather/scatter staging
_DIRECT_RUN = 512


class DegenerateBranchError(RuntimeError):
    """Born sampling selected an outcome whose probability is numerically zero."""


class ZeroBranchError(RuntimeError):
    """A forced measurement outcome has (near-)zero probability on this state."""

    def __init__(self, prob: float, target: int, outcome: int):
        super().__init__(
            f"forced outcome {outcome} on qubit {target} has probability {prob:.3e}"
        )
        self.prob = prob


@dataclass
class StateVector:
    """Pure state of ``num_qubits`` qubits as a dense complex amplitude array.

    Operations mutate ``amplitudes`` in place; a StateVector must not be shared
    between concurrent trajectory workers.
    """

    num_qubits: int
    amplitudes: np.ndarray
    _scratch: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def computational_basis(cls, num_qubits: int, index: int = 0) -> "StateVector":
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def all_plus(cls, num_qubits: int) -> "StateVector":
        """Uniform product state (|0>+|1>)^L / 2^(L/2)."""
        dim = 1 << num_qubits
        amps = np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)
        return cls(num_qubits, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        a = self.amplitudes
        return float(np.sum(a.real**2 + a.imag**2))

    def release_scratch(self) -> "StateVector":
        """Drop the work buffer (before retaining many states)."""
        self._scratch = None
        return self

    # scratch: two state-sized regions for staged (contiguous) arithmetic
    def _work(self) -> np.ndarray:
        dim = self.amplitudes.size
        if self._scratch is None or self._scratch.size != 2 * dim:
            self._scratch = np.empty(2 * dim, dtype=np.complex128)
        return self._scratch

    def _float_work(self, n: int) -> np.ndarray:
        return self._work()[: (n + 1) // 2].view(np.float64)[:n]

    # keep pickled payloads small and buffer-free
    def __getstate__(self):
        return (self.num_qubits, self.amplitudes)

    def __setstate__(self, state):
        self.num_qubits, self.amplitudes = state
        self._scratch = None


@dataclass
class ChargeMoments:
    """First and second moments of the total charge Q = sum_j (1+Z_j)/2."""

    q1: float
    q2: float

    @property
    def variance(self) -> float:
        return self.q2 - self.q1**2


def _check_target(state: StateVector, target: int) -> None:
    if not 0 <= target < state.num_qubits:
        raise ValueError(f"qubit index {target} out of range for L={state.num_qubits}")


def _check_unitary(gate: np.ndarray, tol: float = NORM_TOL) -> None:
    dim = gate.shape[0]
    if np.max(np.abs(gate.conj().T @ gate - np.eye(dim))) > tol:
        raise ValueError("gate is not unitary within tolerance")


def apply_single_qubit(
    state: StateVector, gate: np.ndarray, target: int, validate: bool = False
) -> StateVector:
    """Apply a 2x2 unitary to ``target``, updating amplitudes in place."""
    _check_target(state, target)
    if validate:
        _check_unitary(gate)
    a = state.amplitudes.reshape(-1, 2, 1 << target)
    a0 = a[:, 0, :]
    a1 = a[:, 1, :]
    g00, g01, g10, g11 = gate[0, 0], gate[0, 1], gate[1, 0], gate[1, 1]

    if g01 == 0.0 and g10 == 0.0:  # diagonal (z-like rotations, phases)
        a0 *= g00
        a1 *= g11
        return state

    work = state._work()
    half = a0.size
    t0 = work[:half].reshape(a0.shape)
    t1 = work[half : 2 * half].reshape(a0.shape)

    if g00 == 0.0 and g11 == 0.0:  # antidiagonal (bit flips)
        np.multiply(a0, g10, out=t0)
        np.multiply(a1, g01, out=a0)
        a1[:] = t0
        return state

    if (1 << target) >= _DIRECT_RUN:  # long contiguous runs: work in place
        np.multiply(a0, g10, out=t1)
        np.multiply(a0, g00, out=t0)
        np.multiply(a1, g11, out=a0)  # a0 is free once t0/t1 hold its image
        t1 += a0
        np.multiply(a1, g01, out=a0)
        np.add(t0, a0, out=a0)
        a1[:] = t1
        return state

    # short runs: strided touches are memory-bound (a cache line per element),
    # so stage both halves contiguously and only the copies walk the strides
    u0 = work[2 * half : 3 * half].reshape(a0.shape)
    u1 = work[3 * half : 4 * half].reshape(a0.shape)
    t0[:] = a0
    t1[:] = a1
    np.multiply(t0, g00, out=u0)
    np.multiply(t1, g01, out=u1)
    u0 += u1
    a0[:] = u0
    np.multiply(t0, g10, out=u0)
    np.multiply(t1, g11, out=u1)
    u0 += u1
    a1[:] = u0
    return state


def apply_two_qubit(
    state: StateVector,
    gate: np.ndarray,
    targets: tuple[int, int],
    validate: bool = False,
) -> StateVector:
    """Apply a 4x4 unitary to the adjacent pair ``targets`` = (j, j+1).

    The gate matrix is expressed in the ordered pair basis {|00>,|01>,|10>,|11>}
    of (j, j+1), i.e. row/column index 2*s_j + s_{j+1}.
    """
    j, j1 = targets
    if j1 != j + 1:
        raise ValueError(f"targets must be an adjacent pair (j, j+1), got {targets}")
    _check_target(state, j)
    _check_target(state, j1)
    if validate:
        _check_unitary(gate)
    # axes: (external high bits, bit j+1, bit j, external low bits)
    a = state.amplitudes.reshape(-1, 2, 2, 1 << j)
    blocks = [a[:, p & 1, p >> 1, :] for p in range(4)]

    work = state._work()
    quarter = blocks[0].size
    shape = blocks[0].shape
    buf = [work[p * quarter : (p + 1) * quarter].reshape(shape) for p in range(8)]

    if (1 << j) >= _DIRECT_RUN:
        sources = blocks
        news, tmp = buf[:4], buf[4]
    else:
        # stage the four strided blocks contiguously first (see apply_single_qubit)
        for p in range(4):
            buf[p][:] = blocks[p]
        sources = buf[:4]
        news, tmp = buf[4:7], buf[7]  # outputs scatter one by one, 3 slots suffice

    for p in range(4):
        out = news[p % len(news)]
        started = False
        for q in range(4):
            c = gate[p, q]
            if c == 0.0:  # exact zeros from symmetry-block construction
                continue
            if not started:
                np.multiply(sources[q], c, out=out)
                started = True
            else:
                np.multiply(sources[q], c, out=tmp)
                out += tmp
        if not started:
            out[:] = 0.0
        if sources is not blocks:
            blocks[p][:] = out  # staged inputs stay valid: scatter immediately
    if sources is blocks:
        for p in range(4):
            blocks[p][:] = news[p]
    return state


def _prob_one(state: StateVector, target: int) -> float:
    s = state.amplitudes.reshape(-1, 2, 1 << target)[:, 1, :]
    f = state._float_work(2 * s.size).reshape(2, *s.shape)
    np.multiply(s.real, s.real, out=f[0])
    np.multiply(s.imag, s.imag, out=f[1])
    f[0] += f[1]
    return float(f[0].sum())


def _project(state: StateVector, target: int, outcome: int, prob: float) -> None:
    a = state.amplitudes.reshape(-1, 2, 1 << target)
    a[:, 1 - outcome, :] = 0.0
    state.amplitudes *= 1.0 / np.sqrt(prob)


def measure_qubit(
    state: StateVector, target: int, uniform_draw: float
) -> tuple[int, StateVector]:
    """Born-rule measurement of ``target`` in the computational basis.

    Outcome is 1 iff ``uniform_draw`` < P(|1>); the state is projected onto the
    outcome subspace and renormalized in place.
    """
    _check_target(state, target)
    p1 = _prob_one(state, target)
    outcome = 1 if uniform_draw < p1 else 0
    prob = p1 if outcome == 1 else 1.0 - p1
    if prob < DEGENERATE_BRANCH_TOL:
        raise DegenerateBranchError(
            f"outcome {outcome} on qubit {target} has probability {prob:.3e}"
        )
    _project(state, target, outcome, prob)
    return outcome, state


def force_outcome(
    state: StateVector, target: int, outcome: int
) -> tuple[float, StateVector]:
    """Project ``target`` onto a prescribed outcome, returning its Born probability.

    Raises ZeroBranchError when the recorded outcome is (numerically) orthogonal
    to the current state; the caller decides whether to discard the trajectory.
    """
    _check_target(state, target)
    p1 = _prob_one(state, target)
    prob = p1 if outcome == 1 else 1.0 - p1
    if prob < ZERO_BRANCH_TOL:
        raise ZeroBranchError(prob, target, outcome)
    _project(state, target, outcome, prob)
    return prob, state


_POPCOUNT_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _popcount_tables(num_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    tables = _POPCOUNT_CACHE.get(num_qubits)
    if tables is None:
        pc = np.bitwise_count(np.arange(1 << num_qubits, dtype=np.uint64)).astype(
            np.float64
        )
        tables = (pc, pc * pc)
        _POPCOUNT_CACHE[num_qubits] = tables
    return tables


def charge_moments(state: StateVector) -> ChargeMoments:
    """<Q> and <Q^2> for Q = number of qubits in |1> (single pass over amplitudes)."""
    pc, pc2 = _popcount_tables(state.num_qubits)
    a = state.amplitudes
    f = state._float_work(2 * a.size).reshape(2, a.size)
    np.multiply(a.real, a.real, out=f[0])
    np.multiply(a.imag, a.imag, out=f[1])
    f[0] += f[1]
    return ChargeMoments(q1=float(f[0] @ pc), q2=float(f[0] @ pc2))


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))
