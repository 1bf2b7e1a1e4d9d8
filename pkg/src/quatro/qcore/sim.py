"""Exact dense statevector simulator.

States live on n <= ~10 qubits as complex vectors of length 2^n. Basis
index i renders as the bitstring of i with qubit 0 leftmost (most
significant). Evolution is exact (Hermitian eigendecomposition); noise is
a per-gate depolarizing channel realized by Pauli-twirl trajectory
sampling, not density matrices.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliSum

_NORM_TOL = 1e-10

_H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": _X_MAT,
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class SimulationError(ValueError):
    """Raised on dimension mismatches, bad indices, or norm violations."""


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise SimulationError(
                f"expected {2**self.n_qubits} amplitudes, got {self.amplitudes.shape}"
            )
        norm = np.sum(np.abs(self.amplitudes) ** 2)
        if abs(norm - 1.0) > 1e-8:
            raise SimulationError(f"state norm {norm} is not 1")

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise SimulationError("amplitude count is not a power of two")
        return cls(n, amps / np.linalg.norm(amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.n_qubits}b")


# --- gates --------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    """One circuit element. ``qubits`` lists controls first, target last."""

    kind: str
    qubits: tuple[int, ...]
    param: float | None = None
    matrix: np.ndarray | None = None  # for generic 1q/2q unitaries


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def _check(self, *qubits: int):
        if len(set(qubits)) != len(qubits):
            raise SimulationError(f"repeated qubit in {qubits}")
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise SimulationError(f"qubit {q} out of range for n={self.n_qubits}")

    def h(self, q: int) -> "Circuit":
        self._check(q)
        self.gates.append(Gate("H", (q,)))
        return self

    def x(self, q: int) -> "Circuit":
        self._check(q)
        self.gates.append(Gate("X", (q,)))
        return self

    def ry(self, theta: float, q: int) -> "Circuit":
        self._check(q)
        self.gates.append(Gate("RY", (q,), param=float(theta)))
        return self

    def rz(self, theta: float, q: int) -> "Circuit":
        self._check(q)
        self.gates.append(Gate("RZ", (q,), param=float(theta)))
        return self

    def cnot(self, control: int, target: int) -> "Circuit":
        self._check(control, target)
        self.gates.append(Gate("CNOT", (control, target)))
        return self

    def crx(self, theta: float, control: int, target: int) -> "Circuit":
        self._check(control, target)
        self.gates.append(Gate("CRX", (control, target), param=float(theta)))
        return self

    def toffoli(self, c1: int, c2: int, target: int) -> "Circuit":
        self._check(c1, c2, target)
        self.gates.append(Gate("TOFFOLI", (c1, c2, target)))
        return self

    def unitary(self, matrix: np.ndarray, *qubits: int) -> "Circuit":
        """Generic 1- or 2-qubit unitary."""
        self._check(*qubits)
        matrix = np.asarray(matrix, dtype=complex)
        if len(qubits) not in (1, 2) or matrix.shape != (2 ** len(qubits),) * 2:
            raise SimulationError("generic unitaries are 1- or 2-qubit only")
        self.gates.append(Gate("U", tuple(qubits), matrix=matrix))
        return self

    def __len__(self) -> int:
        return len(self.gates)


def _ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _rz_matrix(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex
    )


def _apply_1q(amps: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    t = amps.reshape([2] * n)
    t = np.moveaxis(np.tensordot(m, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def _apply_controlled_1q(
    amps: np.ndarray, m: np.ndarray, controls: tuple[int, ...], target: int, n: int
) -> np.ndarray:
    t = amps.reshape([2] * n).copy()
    sel: list[slice | int] = [slice(None)] * n
    for c in controls:
        sel[c] = 1
    sub = t[tuple(sel)]
    axis = target - sum(1 for c in controls if c < target)
    sub = np.moveaxis(np.tensordot(m, sub, axes=([1], [axis])), 0, axis)
    t[tuple(sel)] = sub
    return t.reshape(-1)


def _apply_2q(amps: np.ndarray, m: np.ndarray, q0: int, q1: int, n: int) -> np.ndarray:
    t = amps.reshape([2] * n)
    m4 = m.reshape(2, 2, 2, 2)
    t = np.tensordot(m4, t, axes=([2, 3], [q0, q1]))
    t = np.moveaxis(t, [0, 1], [q0, q1])
    return t.reshape(-1)


def _gate_unitary(gate: Gate) -> tuple[np.ndarray, str]:
    """Return (matrix, mode); mode is 'plain' or 'controlled'."""
    if gate.kind == "H":
        return _H_MAT, "plain"
    if gate.kind == "X":
        return _X_MAT, "plain"
    if gate.kind == "RY":
        return _ry_matrix(gate.param), "plain"
    if gate.kind == "RZ":
        return _rz_matrix(gate.param), "plain"
    if gate.kind == "CNOT":
        return _X_MAT, "controlled"
    if gate.kind == "CRX":
        return _rx_matrix(gate.param), "controlled"
    if gate.kind == "TOFFOLI":
        return _X_MAT, "controlled"
    if gate.kind == "U":
        return gate.matrix, "plain"
    raise SimulationError(f"unknown gate kind {gate.kind}")


def _apply_gate(amps: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    m, mode = _gate_unitary(gate)
    if mode == "controlled":
        return _apply_controlled_1q(amps, m, gate.qubits[:-1], gate.qubits[-1], n)
    if len(gate.qubits) == 1:
        return _apply_1q(amps, m, gate.qubits[0], n)
    return _apply_2q(amps, m, gate.qubits[0], gate.qubits[1], n)


def apply_circuit(circuit: Circuit, psi: StateVector) -> StateVector:
    """Apply gates in order; unitary, so the norm is preserved."""
    if circuit.n_qubits != psi.n_qubits:
        raise SimulationError(
            f"circuit has {circuit.n_qubits} qubits, state has {psi.n_qubits}"
        )
    amps = psi.amplitudes.copy()
    for gate in circuit.gates:
        amps = _apply_gate(amps, gate, circuit.n_qubits)
    norm = np.sum(np.abs(amps) ** 2)
    if abs(norm - 1.0) > _NORM_TOL:
        raise SimulationError(f"norm drifted to {norm}")
    return StateVector(psi.n_qubits, amps)


# --- evolution ----------------------------------------------------------

def evolve(h: PauliSum | np.ndarray, t: float, psi: StateVector) -> StateVector:
    """Return e^{-iHt} |psi> via Hermitian eigendecomposition (exact)."""
    dense = h.to_dense() if isinstance(h, PauliSum) else np.asarray(h, dtype=complex)
    if dense.shape != (psi.amplitudes.size,) * 2:
        raise SimulationError(
            f"operator shape {dense.shape} does not match state dim {psi.amplitudes.size}"
        )
    evals, evecs = np.linalg.eigh(dense)
    phases = np.exp(-1j * evals * t)
    amps = evecs @ (phases * (evecs.conj().T @ psi.amplitudes))
    norm = np.sum(np.abs(amps) ** 2)
    if abs(norm - 1.0) > _NORM_TOL:
        raise SimulationError(f"norm drifted to {norm}")
    return StateVector(psi.n_qubits, amps)


def evolution_operator(h: PauliSum | np.ndarray, t: float) -> np.ndarray:
    """Dense e^{-iHt}."""
    dense = h.to_dense() if isinstance(h, PauliSum) else np.asarray(h, dtype=complex)
    evals, evecs = np.linalg.eigh(dense)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


# --- measurement and sampling -------------------------------------------

def measure_probs(psi: StateVector, targets: list[int] | tuple[int, ...]) -> dict[str, float]:
    """Marginal probabilities over the target qubits, keyed by bitstring.

    Key bit order follows ``targets``; probabilities sum to 1.
    """
    targets = list(targets)
    if not targets:
        raise SimulationError("targets must be nonempty")
    if len(set(targets)) != len(targets):
        raise SimulationError("targets must be distinct")
    for q in targets:
        if not 0 <= q < psi.n_qubits:
            raise SimulationError(f"qubit {q} out of range")
    n = psi.n_qubits
    probs = psi.probabilities().reshape([2] * n)
    keep = sorted(targets)
    drop = tuple(ax for ax in range(n) if ax not in keep)
    marg = probs.sum(axis=drop) if drop else probs
    # Reorder the kept axes to the caller's target order.
    marg = np.transpose(marg, [keep.index(q) for q in targets])
    flat = marg.reshape(-1)
    width = len(targets)
    return {format(i, f"0{width}b"): float(p) for i, p in enumerate(flat)}


def measure_and_collapse(
    psi: StateVector, qubit: int, rng: np.random.Generator
) -> tuple[int, StateVector]:
    """Projectively measure one qubit; return (outcome, collapsed state)."""
    n = psi.n_qubits
    t = psi.amplitudes.reshape([2] * n)
    p1 = float(np.sum(np.abs(np.take(t, 1, axis=qubit)) ** 2))
    outcome = 1 if rng.random() < p1 else 0
    p = p1 if outcome == 1 else 1.0 - p1
    collapsed = np.zeros_like(t)
    idx: list[slice | int] = [slice(None)] * n
    idx[qubit] = outcome
    collapsed[tuple(idx)] = np.take(t, outcome, axis=qubit) / np.sqrt(p)
    return outcome, StateVector(n, collapsed.reshape(-1))


def sample(psi: StateVector, shots: int, seed: int) -> Counter[str]:
    """Draw ``shots`` i.i.d. full-register bitstrings; deterministic per seed."""
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = psi.probabilities()
    probs = probs / probs.sum()
    counts = rng.multinomial(shots, probs)
    out: Counter[str] = Counter()
    for i in np.flatnonzero(counts):
        out[psi.bitstring(i)] = int(counts[i])
    return out


# --- depolarizing noise ---------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Per-gate depolarizing probabilities for 1- and 2-qubit gates.

    Gates with k touched qubits use p1 (k == 1) or p2 (k >= 2); on a noise
    event a Pauli drawn uniformly from all 4^k strings (identity included)
    is injected on the touched qubits.
    """

    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for p in (self.p1, self.p2):
            if not 0.0 <= p <= 1.0:
                raise SimulationError(f"probability {p} outside [0, 1]")

    def gate_probability(self, gate: Gate) -> float:
        return self.p1 if len(gate.qubits) == 1 else self.p2


def _inject_pauli(amps: np.ndarray, qubits: tuple[int, ...], n: int,
                  rng: np.random.Generator) -> np.ndarray:
    for q in qubits:
        label = "IXYZ"[rng.integers(4)]
        if label != "I":
            amps = _apply_1q(amps, _PAULI_1Q[label], q, n)
    return amps


def run_noisy(
    circuit: Circuit, noise: NoiseModel, shots: int, seed: int
) -> Counter[str]:
    """Trajectory-sampled noisy execution from |0...0>, measured at the end.

    Per shot, after each gate, a uniformly random Pauli is injected on the
    gate's qubits with the gate-arity probability. Shots without any
    injection share the ideal final state; they are drawn in one batch,
    which leaves the output distribution unchanged.
    """
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    n = circuit.n_qubits
    gate_probs = np.array([noise.gate_probability(g) for g in circuit.gates])

    # Decide per shot which gates fire a noise event.
    if gate_probs.size:
        events = rng.random((shots, gate_probs.size)) < gate_probs[None, :]
    else:
        events = np.zeros((shots, 0), dtype=bool)
    noisy_shots = np.flatnonzero(events.any(axis=1))

    clean = apply_circuit(circuit, StateVector.zero(n))
    out: Counter[str] = Counter()

    n_clean = shots - noisy_shots.size
    if n_clean:
        clean_seed = int(rng.integers(2**63))
        out.update(sample(clean, n_clean, clean_seed))

    for shot in noisy_shots:
        amps = StateVector.zero(n).amplitudes
        for g_idx, gate in enumerate(circuit.gates):
            amps = _apply_gate(amps, gate, n)
            if events[shot, g_idx]:
                amps = _inject_pauli(amps, gate.qubits, n, rng)
        probs = np.abs(amps) ** 2
        probs /= probs.sum()
        idx = rng.choice(probs.size, p=probs)
        out[format(idx, f"0{n}b")] += 1
    return out
