"""Trajectory-level execution: brickwork scheduling, noise injection, measurement,
feedback, and replayable circuit scripts for outcome-postselected averaging."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gates, statevec
from .statevec import StateVector, ZeroBranchError

# Spawn-key namespaces keep rng streams collision-free across derivation paths.
NS_TRAJECTORY = 1
NS_SCRIPT = 2
NS_CELL = 3

# Stream tags within a trajectory / script.
TAG_GATES = 0
TAG_NOISE = 1
TAG_MEASURE = 2

_SIGMA_X = gates.PAULI["x"]


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Deterministic, order-independent rng stream for a (namespace, index, ...) key."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def derive_seed(master_seed: int, *key: int) -> int:
    """Deterministic 64-bit sub-seed for a (namespace, index, ...) key."""
    return int(
        np.random.SeedSequence(master_seed, spawn_key=key).generate_state(1, np.uint64)[0]
    )


@dataclass
class CircuitConfig:
    """Parameters of one circuit family instance.

    depth defaults to 4L for the adaptive model and 2L for the u1 model.
    noise_rate is the per-qubit probability gamma that a rotation-noise event
    follows a gate; noise_amplitude scales the angle range [0, pi*amplitude].
    """

    model: str
    num_qubits: int
    p_measure: float
    noise_amplitude: float
    noise_rate: float = 0.5
    depth: int | None = None
    master_seed: int = 0

    def __post_init__(self):
        if self.model not in ("adaptive", "u1"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.num_qubits < 2:
            raise ValueError("num_qubits must be >= 2")
        for name in ("p_measure", "noise_amplitude", "noise_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.depth is None:
            self.depth = (4 if self.model == "adaptive" else 2) * self.num_qubits
        if self.depth < 1:
            raise ValueError("depth must be >= 1")


@dataclass
class TrajectoryRecord:
    """Per-layer charge moments of one trajectory (length depth+1, including t=0)."""

    num_qubits: int
    q1: np.ndarray
    q2: np.ndarray
    discarded: bool
    seeds: tuple
    final_state: StateVector | None = None

    def n_bar(self) -> np.ndarray:
        return 2.0 * self.q1 / self.num_qubits - 1.0


@dataclass
class LayerScript:
    pairs: list[tuple[int, int]]
    unitaries: np.ndarray  # (len(pairs), 4, 4)
    sites: np.ndarray  # measured qubits, ascending
    outcomes: np.ndarray  # recorded bits for each site


@dataclass
class CircuitScript:
    """Frozen (unitaries, measurement sites, outcomes) of one reference trajectory.

    Replaying with noise realization 0 reproduces the recording trajectory
    bit for bit; realizations >= 1 are fresh noise draws.
    """

    config: CircuitConfig
    script_index: int
    layers: list[LayerScript] = field(repr=False)


def brickwork_pairs(num_qubits: int, layer: int) -> list[tuple[int, int]]:
    """Nearest-neighbor pairs of one brickwork layer (layers counted from 1),
    alternating offset with open boundaries."""
    offset = (layer - 1) % 2
    return [(j, j + 1) for j in range(offset, num_qubits - 1, 2)]


def _layer_plan(num_qubits: int, depth: int) -> tuple[list[list[tuple[int, int]]], list[int]]:
    """Brickwork pairs for every layer plus slice offsets into a flat gate batch
    (two-qubit unitaries for a whole trajectory are sampled in one batched call)."""
    pairs_per_layer = [brickwork_pairs(num_qubits, t) for t in range(1, depth + 1)]
    offsets = [0]
    for pairs in pairs_per_layer:
        offsets.append(offsets[-1] + len(pairs))
    return pairs_per_layer, offsets


def _apply_noise_stage(
    state: StateVector,
    pairs: list[tuple[int, int]],
    config: CircuitConfig,
    noise_rng: np.random.Generator,
) -> None:
    """Rotation noise on every gate-covered qubit of the layer.

    Qubits not covered by a gate this layer (boundary qubit on odd layers)
    receive no noise.
    """
    covered = [q for pair in pairs for q in pair]
    events = gates.sample_noise_events(
        covered, config.noise_rate, config.noise_amplitude, noise_rng
    )
    for ev in events:
        statevec.apply_single_qubit(state, gates.rotation_gate(ev.axis, ev.angle), ev.qubit)


def run_adaptive_trajectory(
    config: CircuitConfig, trajectory_index: int, keep_state: bool = False
) -> TrajectoryRecord:
    """One adaptive-model trajectory: fresh polarized-sector unitaries per layer,
    rotation noise after each gate, then a Born measurement sweep with bit-flip
    feedback on outcome 0."""
    if config.model != "adaptive":
        raise ValueError("config.model must be 'adaptive'")
    L, T = config.num_qubits, config.depth
    gate_rng = derive_rng(config.master_seed, NS_TRAJECTORY, trajectory_index, TAG_GATES)
    noise_rng = derive_rng(config.master_seed, NS_TRAJECTORY, trajectory_index, TAG_NOISE)
    meas_rng = derive_rng(config.master_seed, NS_TRAJECTORY, trajectory_index, TAG_MEASURE)

    state = StateVector.all_plus(L)
    q1 = np.empty(T + 1)
    q2 = np.empty(T + 1)
    m = statevec.charge_moments(state)
    q1[0], q2[0] = m.q1, m.q2

    pairs_per_layer, offsets = _layer_plan(L, T)
    all_mats = gates.absorbing_matrices(offsets[-1], gate_rng)

    for t in range(1, T + 1):
        pairs = pairs_per_layer[t - 1]
        for mat, pair in zip(all_mats[offsets[t - 1] : offsets[t]], pairs):
            statevec.apply_two_qubit(state, mat, pair)
        _apply_noise_stage(state, pairs, config, noise_rng)

        site_draws = meas_rng.random(L)
        for j in range(L):
            if site_draws[j] < config.p_measure:
                outcome, _ = statevec.measure_qubit(state, j, meas_rng.random())
                if outcome == 0:
                    statevec.apply_single_qubit(state, _SIGMA_X, j)

        m = statevec.charge_moments(state)
        q1[t], q2[t] = m.q1, m.q2

    return TrajectoryRecord(
        num_qubits=L,
        q1=q1,
        q2=q2,
        discarded=False,
        seeds=(config.master_seed, NS_TRAJECTORY, trajectory_index),
        final_state=state.release_scratch() if keep_state else None,
    )


def build_circuit_script(
    config: CircuitConfig, script_index: int = 0, return_record: bool = False
):
    """Run one charge-conserving reference trajectory (with its own generating
    noise realization, replay index 0) and freeze its unitaries, measurement
    sites, and outcomes. With ``return_record`` the recording trajectory's
    moments come back too, for checking replay fidelity."""
    if config.model != "u1":
        raise ValueError("config.model must be 'u1'")
    L, T = config.num_qubits, config.depth
    gate_rng = derive_rng(config.master_seed, NS_SCRIPT, script_index, TAG_GATES)
    noise_rng = derive_rng(config.master_seed, NS_SCRIPT, script_index, TAG_NOISE, 0)
    meas_rng = derive_rng(config.master_seed, NS_SCRIPT, script_index, TAG_MEASURE)

    state = StateVector.all_plus(L)
    q1 = np.empty(T + 1)
    q2 = np.empty(T + 1)
    m = statevec.charge_moments(state)
    q1[0], q2[0] = m.q1, m.q2

    pairs_per_layer, offsets = _layer_plan(L, T)
    all_mats = gates.u1_matrices(offsets[-1], gate_rng)
    layers: list[LayerScript] = []
    for t in range(1, T + 1):
        pairs = pairs_per_layer[t - 1]
        mats = all_mats[offsets[t - 1] : offsets[t]]
        for mat, pair in zip(mats, pairs):
            statevec.apply_two_qubit(state, mat, pair)
        _apply_noise_stage(state, pairs, config, noise_rng)

        site_draws = meas_rng.random(L)
        sites = [j for j in range(L) if site_draws[j] < config.p_measure]
        outcomes = []
        for j in sites:
            outcome, _ = statevec.measure_qubit(state, j, meas_rng.random())
            outcomes.append(outcome)
        layers.append(
            LayerScript(
                pairs=pairs,
                unitaries=mats,
                sites=np.asarray(sites, dtype=np.int64),
                outcomes=np.asarray(outcomes, dtype=np.int64),
            )
        )
        m = statevec.charge_moments(state)
        q1[t], q2[t] = m.q1, m.q2

    script = CircuitScript(config=config, script_index=script_index, layers=layers)
    if not return_record:
        return script
    record = TrajectoryRecord(
        num_qubits=L,
        q1=q1,
        q2=q2,
        discarded=False,
        seeds=(config.master_seed, NS_SCRIPT, script_index, 0),
        final_state=state.release_scratch(),
    )
    return script, record


def replay_with_noise(
    script: CircuitScript,
    noise_amplitude: float,
    noise_rate: float,
    noise_rep: int,
    keep_state: bool = False,
) -> TrajectoryRecord:
    """Re-run a frozen script under noise realization ``noise_rep``, forcing the
    recorded measurement outcomes.

    Realization 0 is the script's generating realization. A forced outcome that
    is orthogonal to the evolved state flags the record as discarded (remaining
    moments are NaN) instead of raising.
    """
    config = script.config
    L, T = config.num_qubits, config.depth
    noise_rng = derive_rng(
        config.master_seed, NS_SCRIPT, script.script_index, TAG_NOISE, noise_rep
    )
    replay_config = CircuitConfig(
        model="u1",
        num_qubits=L,
        p_measure=config.p_measure,
        noise_amplitude=noise_amplitude,
        noise_rate=noise_rate,
        depth=T,
        master_seed=config.master_seed,
    )

    state = StateVector.all_plus(L)
    q1 = np.full(T + 1, np.nan)
    q2 = np.full(T + 1, np.nan)
    m = statevec.charge_moments(state)
    q1[0], q2[0] = m.q1, m.q2

    discarded = False
    for t, layer in enumerate(script.layers, start=1):
        for mat, pair in zip(layer.unitaries, layer.pairs):
            statevec.apply_two_qubit(state, mat, pair)
        _apply_noise_stage(state, layer.pairs, replay_config, noise_rng)
        for j, outcome in zip(layer.sites, layer.outcomes):
            try:
                statevec.force_outcome(state, int(j), int(outcome))
            except ZeroBranchError:
                discarded = True
                break
        if discarded:
            break
        m = statevec.charge_moments(state)
        q1[t], q2[t] = m.q1, m.q2

    return TrajectoryRecord(
        num_qubits=L,
        q1=q1,
        q2=q2,
        discarded=discarded,
        seeds=(config.master_seed, NS_SCRIPT, script.script_index, noise_rep),
        final_state=state.release_scratch() if keep_state and not discarded else None,
    )


def absorbing_time(record: TrajectoryRecord, threshold: float = 0.99) -> int | None:
    """First layer t whose polarization n_bar(t) >= threshold *and* stays there
    to the end of the record; None if never reached (or the record was discarded)."""
    if record.discarded:
        return None
    n = record.n_bar()
    below = np.nonzero(n < threshold)[0]
    if len(below) == 0:
        return 0
    first = int(below[-1]) + 1
    return first if first < len(n) else None
