"""Quantum walks for 2-choice decision models.

A walk lives on a 1-d lattice of 2^n preference states with a tridiagonal
drift-diffusion Hamiltonian: H[i][i] = drift * i, H[i][i +/- 1] = coupling.
Reflecting walks evolve freely; absorbing walks project out the boundary
states (first and last lattice site) after every timestep.

The sampled absorbing path emulates post-selection: a one-ancilla detector
circuit flags interior states, the ancilla is measured mid-walk, and
trajectories that hit a boundary are discarded. Evolution steps are applied
exactly (dense exponential); depolarizing noise, when requested, attaches
to the detector's gates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    Circuit,
    Gate,
    NoiseModel,
    PauliSum,
    StateVector,
    evolution_operator,
    pauli_decompose,
)
from .qcore.sim import _apply_gate, _inject_pauli


class WalkError(ValueError):
    pass


@dataclass(frozen=True)
class WalkModel:
    n_states: int
    drift: float       # diagonal slope mu
    coupling: float    # nearest-neighbor amplitude sigma
    dt: float = 1.0    # evolution time per timestep

    def __post_init__(self):
        n = self.n_states
        if n < 4 or n & (n - 1):
            raise WalkError("n_states must be a power of two >= 4")
        if self.dt <= 0:
            raise WalkError("dt must be positive")

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.n_states)))


@dataclass
class WalkResult:
    """Per-timestep state probabilities (index 0 = initial state).

    For absorbing walks the tables are unnormalized: their sums give the
    post-selection survival probability, which is non-increasing.
    """

    kind: str
    tables: list[np.ndarray]
    survival: list[float] | None = None
    accepted_shots: list[int] | None = None
    shots: int | None = None

    def table(self, timestep: int) -> np.ndarray:
        return self.tables[timestep]


def build_walk_hamiltonian(model: WalkModel) -> tuple[PauliSum, np.ndarray]:
    """Tridiagonal walk Hamiltonian, as a PauliSum and its dense form."""
    n = model.n_states
    dense = np.zeros((n, n))
    for i in range(n):
        dense[i, i] = model.drift * i
        if i + 1 < n:
            dense[i, i + 1] = dense[i + 1, i] = model.coupling
    return pauli_decompose(dense), dense


def calibrated_walk_model(
    n_states: int = 4,
    coupling: float = 1.0,
    ground_energy: float = -7.22,
    dt: float = 1.0,
) -> WalkModel:
    """Bisect the drift so the walk Hamiltonian's minimum eigenvalue hits
    ``ground_energy`` (monotone in the drift, so bisection is exact)."""

    def lam_min(mu: float) -> float:
        _, dense = build_walk_hamiltonian(WalkModel(n_states, mu, coupling, dt))
        return float(np.linalg.eigvalsh(dense)[0])

    lo, hi = -abs(ground_energy) - 2 * abs(coupling), 0.0
    if not lam_min(lo) <= ground_energy <= lam_min(hi):
        raise WalkError(f"target {ground_energy} not bracketed by drift range")
    for _ in range(200):
        mid = (lo + hi) / 2
        if lam_min(mid) < ground_energy:
            lo = mid
        else:
            hi = mid
    return WalkModel(n_states, (lo + hi) / 2, coupling, dt)


def reflecting_walk(model: WalkModel, psi0: StateVector, steps: int) -> WalkResult:
    """Probability tables |U^k psi0|^2 for k = 0..steps, U = e^{-iH dt}."""
    if psi0.amplitudes.size != model.n_states:
        raise WalkError("initial state dimension does not match the lattice")
    _, dense = build_walk_hamiltonian(model)
    u = evolution_operator(dense, model.dt)
    amps = psi0.amplitudes.copy()
    tables = [np.abs(amps) ** 2]
    for _ in range(steps):
        amps = u @ amps
        tables.append(np.abs(amps) ** 2)
    return WalkResult(kind="reflecting", tables=tables)


# --- boundary detector ----------------------------------------------------

def _append_mcx(circuit: Circuit, controls: list[int], target: int, borrow: list[int]):
    """Multi-controlled X from CNOT/Toffoli, borrowing dirty wires.

    For >= 3 controls, splits into two halves around one borrowed wire a:
        t ^= B&a ; a ^= A ; t ^= B&a ; a ^= A
    which nets t ^= A&B for any initial a, and restores a.
    """
    m = len(controls)
    if m == 0:
        circuit.x(target)
    elif m == 1:
        circuit.cnot(controls[0], target)
    elif m == 2:
        circuit.toffoli(controls[0], controls[1], target)
    else:
        a = borrow[0]
        k1 = (m + 1) // 2
        s1, s2 = list(controls[:k1]), list(controls[k1:])
        for _ in range(2):
            _append_mcx(circuit, s2 + [a], target, borrow=s1)
            _append_mcx(circuit, s1, a, borrow=s2 + [target] + borrow[1:])


def boundary_detector(n_qubits: int) -> Circuit:
    """One-ancilla circuit flagging non-boundary lattice states.

    On input sum_i a_i |i> (x) |0> the output carries the ancilla in |1>
    exactly on the interior states: boundary amplitudes (|0..0>, |1..1>)
    keep ancilla |0>. Main-register amplitude magnitudes are unchanged.
    The ancilla is the appended qubit ``n_qubits``.
    """
    if n_qubits < 2:
        raise WalkError("detector needs at least 2 main qubits")
    c = Circuit(n_qubits + 1)
    anc = n_qubits
    xors = list(range(1, n_qubits))
    # q_i <- q_i xor q_0: all-equal registers (the two boundary states)
    # leave every xor bit 0.
    for q in xors:
        c.cnot(0, q)
    for q in xors:
        c.x(q)
    _append_mcx(c, xors, anc, borrow=[0])  # anc ^= "is boundary"
    for q in xors:
        c.x(q)
    c.x(anc)                               # anc = "is interior"
    for q in xors:
        c.cnot(0, q)
    return c


# --- absorbing walks -------------------------------------------------------

def _exact_absorbing(model: WalkModel, psi0: StateVector, steps: int) -> WalkResult:
    _, dense = build_walk_hamiltonian(model)
    u = evolution_operator(dense, model.dt)
    survivor = psi0.amplitudes.copy()
    tables = [np.abs(survivor) ** 2]
    survival = [1.0]
    for _ in range(steps):
        evolved = u @ survivor
        table = np.abs(evolved) ** 2
        tables.append(table)
        survival.append(float(table.sum()))
        survivor = evolved.copy()
        survivor[0] = 0.0        # project out both boundaries
        survivor[-1] = 0.0
    return WalkResult(kind="absorbing-exact", tables=tables, survival=survival)


def _collapse_to_interior(amps: np.ndarray, n_main: int) -> tuple[float, np.ndarray]:
    """Probability of ancilla=1 and the renormalized post-measurement state
    with the ancilla reset to |0> (one X after collapse)."""
    full = amps.reshape(-1, 2)
    p1 = float(np.sum(np.abs(full[:, 1]) ** 2))
    post = np.zeros_like(full)
    if p1 > 0:
        post[:, 0] = full[:, 1] / np.sqrt(p1)
    return p1, post.reshape(-1)


def _sampled_arm(
    model: WalkModel,
    u_full: np.ndarray,
    detector: Circuit,
    psi0: StateVector,
    arm: int,
    shots: int,
    rng: np.random.Generator,
    noise: NoiseModel | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One post-selection experiment measuring the lattice at timestep ``arm``.

    Returns (state counts, alive mask, ancilla outcomes per mid-step). Shots
    without a noise event share the deterministic trajectory and are drawn
    in a single batch; per-shot uniforms are drawn up front either way, so
    the output distribution matches literal shot-by-shot simulation.
    """
    n_main = model.n_qubits
    n_full = n_main + 1
    n_mid = arm - 1

    # Gate stream per mid-step: detector gates then the ancilla reset X.
    step_gates = list(detector.gates) + [Gate("X", (n_main,))]
    survival_draws = rng.random((shots, n_mid)) if n_mid else np.zeros((shots, 0))
    final_draws = rng.random(shots)
    if noise is not None and n_mid:
        probs = np.array([noise.gate_probability(g) for g in step_gates] * n_mid)
        events = rng.random((shots, probs.size)) < probs[None, :]
    else:
        events = np.zeros((shots, 0), dtype=bool)
    noisy_shots = set(np.flatnonzero(events.any(axis=1)).tolist())

    # Deterministic (injection-free) trajectory.
    amps = np.kron(psi0.amplitudes, [1.0, 0.0])
    clean_p1 = np.zeros(n_mid)
    for j in range(n_mid):
        amps = u_full @ amps
        for gate in detector.gates:
            amps = _apply_gate(amps, gate, n_full)
        clean_p1[j], amps = _collapse_to_interior(amps, n_main)
    amps = u_full @ amps
    clean_final = (np.abs(amps.reshape(-1, 2)) ** 2).sum(axis=1)
    clean_cdf = np.cumsum(clean_final / max(clean_final.sum(), 1e-300))

    outcomes = survival_draws < clean_p1[None, :]
    counts = np.zeros(model.n_states, dtype=np.int64)

    clean_mask = np.ones(shots, dtype=bool)
    for shot in noisy_shots:
        clean_mask[shot] = False
    alive = clean_mask & outcomes.all(axis=1)
    idx = np.searchsorted(clean_cdf, final_draws[alive])
    np.add.at(counts, np.minimum(idx, model.n_states - 1), 1)

    for shot in sorted(noisy_shots):
        amps = np.kron(psi0.amplitudes, [1.0, 0.0])
        dead = False
        for j in range(n_mid):
            amps = u_full @ amps
            for g_idx, gate in enumerate(step_gates[:-1]):
                amps = _apply_gate(amps, gate, n_full)
                if events[shot, j * len(step_gates) + g_idx]:
                    amps = _inject_pauli(amps, gate.qubits, n_full, rng)
            p1, amps = _collapse_to_interior(amps, n_main)
            outcomes[shot, j] = survival_draws[shot, j] < p1
            if not outcomes[shot, j]:
                dead = True
                break
            # ancilla reset X (possibly noisy)
            if events[shot, (j + 1) * len(step_gates) - 1]:
                amps = _inject_pauli(amps, (n_main,), n_full, rng)
        if dead:
            continue
        alive[shot] = True
        amps = u_full @ amps
        final = (np.abs(amps.reshape(-1, 2)) ** 2).sum(axis=1)
        cdf = np.cumsum(final / final.sum())
        counts[min(np.searchsorted(cdf, final_draws[shot]), model.n_states - 1)] += 1
    return counts, alive, outcomes


def _sampled_absorbing(
    model: WalkModel,
    psi0: StateVector,
    steps: int,
    shots: int,
    seed: int,
    noise: NoiseModel | None,
) -> WalkResult:
    if shots < 1:
        raise WalkError("sampled path requires shots >= 1")
    _, dense = build_walk_hamiltonian(model)
    u_main = evolution_operator(dense, model.dt)
    u_full = np.kron(u_main, np.eye(2))
    detector = boundary_detector(model.n_qubits)

    tables = [np.abs(psi0.amplitudes) ** 2]
    survival = [1.0]
    accepted = [shots]
    for arm in range(1, steps + 1):
        rng = np.random.default_rng([seed, arm])
        counts, alive, outcomes = _sampled_arm(
            model, u_full, detector, psi0, arm, shots, rng, noise
        )
        tables.append(counts / shots)
        survival.append(float(alive.sum()) / shots)
        accepted.append(int(alive.sum()))
    return WalkResult(
        kind="absorbing-sampled",
        tables=tables,
        survival=survival,
        accepted_shots=accepted,
        shots=shots,
    )


def absorbing_walk(
    model: WalkModel,
    psi0: StateVector,
    steps: int,
    shots: int | None = None,
    seed: int = 0,
    noise: NoiseModel | None = None,
) -> WalkResult:
    """Absorbing-boundary walk.

    With ``shots=None`` runs the exact path: the boundary projector is
    applied between evolutions and tables stay unnormalized. Otherwise runs
    the sampled path: the detector circuit runs after each mid-walk step,
    the ancilla is measured, and only all-interior trajectories survive to
    the final lattice measurement; one independent batch of ``shots``
    trajectories is run per reported timestep.
    """
    if psi0.amplitudes.size != model.n_states:
        raise WalkError("initial state dimension does not match the lattice")
    if steps < 1:
        raise WalkError("steps must be >= 1")
    if shots is None:
        if noise is not None:
            raise WalkError("noise applies to the sampled path only")
        return _exact_absorbing(model, psi0, steps)
    return _sampled_absorbing(model, psi0, steps, shots, seed, noise)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """TV distance treating any missing mass as an implicit absorbed outcome."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * (np.abs(p - q).sum() + abs((1.0 - p.sum()) - (1.0 - q.sum())))
