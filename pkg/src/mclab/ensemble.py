"""Ensemble orchestration and mixed-state observables.

Two averaging semantics:
  * adaptive: one flat average over trajectories (noise and outcomes together),
    no postselection anywhere;
  * u1: per-script noise averages at fixed measurement outcomes, then an
    average of per-script observables over scripts.

Mixed-state charge moments are computed from per-trajectory moments by
linearity of Tr(rho Q) and Tr(rho Q^2); the full density matrix is never
materialized outside of small test oracles.
"""

from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass, asdict

import numpy as np

from .circuits import (
    NS_CELL,
    CircuitConfig,
    TrajectoryRecord,
    build_circuit_script,
    derive_seed,
    replay_with_noise,
    run_adaptive_trajectory,
)
from .statevec import StateVector


@dataclass
class EnsembleResult:
    """Mixed-state observables of one ensemble, plus provenance metadata.

    purity, histogram, and script_flucts are populated in u1 mode only.
    """

    n_bar: np.ndarray
    fluct: np.ndarray
    steady_n: float
    steady_fluct: float
    purity: float | None
    histogram: tuple[np.ndarray, np.ndarray] | None
    script_flucts: np.ndarray | None
    metadata: dict
    final_states: list | None = None


def steady_window(num_qubits: int, depth: int) -> tuple[int, int]:
    """Inclusive layer range used for steady-state time averages: strictly
    between 3L and 4L; falls back to the final quarter for shallow circuits."""
    lo, hi = 3 * num_qubits + 1, min(4 * num_qubits - 1, depth)
    if lo > hi:
        lo, hi = depth - max(depth // 4, 1) + 1, depth
    return lo, hi


def _window_mean(series: np.ndarray, lo: int, hi: int) -> float:
    return float(np.mean(series[lo : hi + 1]))


def _run_pool(func, args_list: list, workers: int) -> list:
    """Fan jobs out to a worker pool; results come back in submission order, so
    every downstream reduction is independent of the worker count."""
    if workers <= 1 or len(args_list) <= 1:
        return [func(a) for a in args_list]
    chunk = max(1, len(args_list) // (4 * workers))
    with mp.get_context("fork").Pool(workers) as pool:
        return pool.map(func, args_list, chunksize=chunk)


def _adaptive_job(args) -> TrajectoryRecord:
    config, index, keep_state = args
    return run_adaptive_trajectory(config, index, keep_state=keep_state)


def adaptive_ensemble(
    config: CircuitConfig, n_runs: int, workers: int = 1, keep_states: bool = False
) -> EnsembleResult:
    """Flat trajectory average of the adaptive model (no postselection)."""
    if config.model != "adaptive":
        raise ValueError("config.model must be 'adaptive'")
    if n_runs < 2:
        raise ValueError("n_runs must be >= 2")
    records = _run_pool(
        _adaptive_job, [(config, i, keep_states) for i in range(n_runs)], workers
    )
    q1 = np.stack([r.q1 for r in records]).mean(axis=0)
    q2 = np.stack([r.q2 for r in records]).mean(axis=0)
    fluct = q2 - q1**2
    n_bar = 2.0 * q1 / config.num_qubits - 1.0
    lo, hi = steady_window(config.num_qubits, config.depth)
    return EnsembleResult(
        n_bar=n_bar,
        fluct=fluct,
        steady_n=_window_mean(n_bar, lo, hi),
        steady_fluct=_window_mean(fluct, lo, hi),
        purity=None,
        histogram=None,
        script_flucts=None,
        metadata={
            "config": asdict(config),
            "n_runs": n_runs,
            "discarded": 0,
            "steady_window": (lo, hi),
        },
        final_states=[r.final_state for r in records] if keep_states else None,
    )


@dataclass
class _ScriptSummary:
    q1: np.ndarray | None
    q2: np.ndarray | None
    fluct: np.ndarray | None
    purity: float | None
    n_kept: int
    n_discarded: int
    final_states: list | None


def _script_job(args) -> _ScriptSummary:
    config, script_index, n_noise, keep_states = args
    script = build_circuit_script(config, script_index)
    records = [
        replay_with_noise(
            script, config.noise_amplitude, config.noise_rate, rep, keep_state=True
        )
        for rep in range(1, n_noise + 1)
    ]
    kept = [r for r in records if not r.discarded]
    n_discarded = len(records) - len(kept)
    if not kept:
        return _ScriptSummary(None, None, None, None, 0, n_discarded, None)
    q1 = np.stack([r.q1 for r in kept]).mean(axis=0)
    q2 = np.stack([r.q2 for r in kept]).mean(axis=0)
    states = [r.final_state for r in kept]
    return _ScriptSummary(
        q1=q1,
        q2=q2,
        fluct=q2 - q1**2,
        purity=purity_from_overlaps(states),
        n_kept=len(kept),
        n_discarded=n_discarded,
        final_states=states if keep_states else None,
    )


def u1_ensemble(
    config: CircuitConfig,
    n_scripts: int,
    n_noise: int,
    workers: int = 1,
    keep_states: bool = False,
) -> EnsembleResult:
    """Outcome-postselected averaging for the u1 model.

    Per script: average charge moments and purity over fresh noise realizations
    with forced outcomes (zero branches discarded); then average the per-script
    observables over scripts. Scalar fluctuations are the final-layer snapshot.
    """
    if config.model != "u1":
        raise ValueError("config.model must be 'u1'")
    if n_scripts < 1 or n_noise < 2:
        raise ValueError("need n_scripts >= 1 and n_noise >= 2")
    summaries = _run_pool(
        _script_job,
        [(config, s, n_noise, keep_states) for s in range(n_scripts)],
        workers,
    )
    kept = [s for s in summaries if s.n_kept > 0]
    n_dropped = len(summaries) - len(kept)
    if not kept:
        raise RuntimeError("every script had all noise replays discarded")
    q1 = np.stack([s.q1 for s in kept]).mean(axis=0)
    fluct = np.stack([s.fluct for s in kept]).mean(axis=0)
    n_bar = 2.0 * q1 / config.num_qubits - 1.0
    script_flucts = np.array([s.fluct[-1] for s in kept])
    return EnsembleResult(
        n_bar=n_bar,
        fluct=fluct,
        steady_n=float(n_bar[-1]),
        steady_fluct=float(fluct[-1]),
        purity=float(np.mean([s.purity for s in kept])),
        histogram=fluctuation_histogram(script_flucts),
        script_flucts=script_flucts,
        metadata={
            "config": asdict(config),
            "n_scripts": n_scripts,
            "n_noise": n_noise,
            "discarded_replays": int(sum(s.n_discarded for s in summaries)),
            "dropped_scripts": n_dropped,
            "evaluation_time": "final layer",
        },
        final_states=[s.final_states for s in kept] if keep_states else None,
    )


def purity_from_overlaps(states: list[StateVector]) -> float:
    """Tr(rho^2) of the uniform mixture of N pure states, from the N(N-1)/2
    pairwise overlaps plus the N diagonal terms: (1/N^2) sum_ij |<psi_i|psi_j>|^2.

    Bounded by [1/N, 1]; the 1/N floor is the finite-sample mixture's own.
    """
    if not states:
        raise ValueError("need at least one state")
    dims = {s.num_qubits for s in states}
    if len(dims) != 1:
        raise ValueError(f"mixed qubit counts {sorted(dims)}")
    v = np.stack([s.amplitudes for s in states])
    gram = v.conj() @ v.T
    return float(np.mean(np.abs(gram) ** 2))


def fluctuation_histogram(
    values, n_bins: int = 20
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized histogram of per-script charge fluctuations.

    Bins cover [0, 1.01 * max(values)] (auto-padded; noisy fluctuations can
    transiently exceed L/4). Returns (edges, mass) with mass summing to 1.
    """
    v = np.clip(np.asarray(values, dtype=float), 0.0, None)
    if v.size == 0:
        raise ValueError("no values to histogram")
    hi = float(v.max()) * 1.01
    if hi <= 0.0:
        hi = 1e-12
    counts, edges = np.histogram(v, bins=n_bins, range=(0.0, hi))
    return edges, counts / counts.sum()


def sweep_grid(
    model: str,
    num_qubits: int,
    p_list,
    theta_list,
    counts: dict,
    master_seed: int,
    gamma: float = 0.5,
    depth: int | None = None,
    workers: int = 1,
) -> list[dict]:
    """One ensemble per (p_measure, amplitude) cell, each with an independently
    derived seed; cells are deterministic given master_seed and independent.

    counts: {"runs": n} for adaptive, {"scripts": n, "noise": m} for u1.
    """
    p_list = list(p_list)
    theta_list = list(theta_list)
    if not p_list or not theta_list:
        raise ValueError("empty parameter grid")
    rows = []
    for i, p_m in enumerate(p_list):
        for k, theta in enumerate(theta_list):
            cell_seed = derive_seed(master_seed, NS_CELL, i, k)
            config = CircuitConfig(
                model=model,
                num_qubits=num_qubits,
                p_measure=p_m,
                noise_amplitude=theta,
                noise_rate=gamma,
                depth=depth,
                master_seed=cell_seed,
            )
            row = {
                "pm": p_m,
                "theta": theta,
                "gamma": gamma,
                "L": num_qubits,
            }
            quarter = num_qubits / 4.0
            if model == "adaptive":
                res = adaptive_ensemble(config, counts["runs"], workers=workers)
                row.update(
                    steady_n=res.steady_n,
                    steady_fluct_scaled=res.steady_fluct / quarter,
                    discarded=0,
                    runs=counts["runs"],
                )
            else:
                res = u1_ensemble(
                    config, counts["scripts"], counts["noise"], workers=workers
                )
                row.update(
                    fluct_scaled=res.steady_fluct / quarter,
                    purity=res.purity,
                    scripts=counts["scripts"],
                    noise_reps=counts["noise"],
                    discarded_replays=res.metadata["discarded_replays"],
                    dropped_scripts=res.metadata["dropped_scripts"],
                )
            row["_result"] = res
            rows.append(row)
    return rows
