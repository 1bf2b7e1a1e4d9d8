import numpy as np
import pytest

from quatro.qcore import Circuit, NoiseModel, StateVector, apply_circuit
from quatro.walks import (
    WalkError,
    WalkModel,
    absorbing_walk,
    boundary_detector,
    build_walk_hamiltonian,
    calibrated_walk_model,
    reflecting_walk,
    total_variation,
)


def dense_walk_matrix(n, mu, sigma):
    h = np.zeros((n, n))
    for i in range(n):
        h[i, i] = mu * i
        if i + 1 < n:
            h[i, i + 1] = h[i + 1, i] = sigma
    return h


class TestHamiltonian:
    def test_construction_by_definition(self):
        _, dense = build_walk_hamiltonian(WalkModel(4, drift=0.0, coupling=1.0))
        expected = [[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]]
        assert np.array_equal(dense, expected)

    def test_zero_coupling_makes_basis_states_stationary(self):
        from quatro.qcore import evolve

        model = WalkModel(4, drift=-1.5, coupling=0.0)
        _, dense = build_walk_hamiltonian(model)
        psi = StateVector.basis(2, 2)
        out = evolve(dense, 3.0, psi)
        assert np.abs(out.amplitudes[2]) == pytest.approx(1.0)

    def test_calibration_hits_paper_ground_energy(self):
        model = calibrated_walk_model(4, coupling=1.0, ground_energy=-7.22)
        _, dense = build_walk_hamiltonian(model)
        assert np.linalg.eigvalsh(dense)[0] == pytest.approx(-7.22, abs=1e-9)

    def test_pauli_form_matches_dense(self):
        ps, dense = build_walk_hamiltonian(WalkModel(8, drift=-0.7, coupling=0.9))
        assert np.max(np.abs(ps.to_dense() - dense)) < 1e-10

    def test_invalid_sizes(self):
        with pytest.raises(WalkError):
            WalkModel(3, 0.0, 1.0)
        with pytest.raises(WalkError):
            WalkModel(4, 0.0, 1.0, dt=0.0)


class TestReflecting:
    def test_zero_steps_returns_initial_probabilities(self):
        psi = StateVector.from_amplitudes([1, 1, 1, 1])
        res = reflecting_walk(WalkModel(4, -1.0, 1.0), psi, 0)
        assert len(res.tables) == 1
        assert np.allclose(res.tables[0], 0.25)

    def test_symmetric_drift_free_walk_stays_mirror_symmetric(self):
        psi = StateVector.from_amplitudes([0, 1, 1, 0])
        res = reflecting_walk(WalkModel(4, 0.0, 1.0), psi, 5)
        for table in res.tables:
            assert np.allclose(table, table[::-1], atol=1e-10)

    def test_matches_matrix_power_oracle(self):
        model = WalkModel(8, drift=-0.8, coupling=1.1, dt=0.6)
        psi = StateVector.basis(3, 4)
        res = reflecting_walk(model, psi, 4)
        h = dense_walk_matrix(8, -0.8, 1.1)
        evals, evecs = np.linalg.eigh(h)
        u = (evecs * np.exp(-1j * evals * 0.6)) @ evecs.conj().T
        amps = psi.amplitudes
        for k in range(5):
            assert np.max(np.abs(res.tables[k] - np.abs(amps) ** 2)) < 1e-9
            amps = u @ amps

    def test_tables_sum_to_one(self):
        psi = StateVector.from_amplitudes(np.arange(1, 9))
        res = reflecting_walk(WalkModel(8, -0.5, 1.0), psi, 6)
        for table in res.tables:
            assert table.sum() == pytest.approx(1.0, abs=1e-9)


class TestDetector:
    def run_detector(self, n, basis_index):
        circ = boundary_detector(n)
        psi = StateVector.basis(n + 1, basis_index << 1)  # ancilla |0>
        return apply_circuit(circ, psi)

    def test_all_zeros_keeps_ancilla_zero(self):
        out = self.run_detector(3, 0b000)
        assert np.abs(out.amplitudes[0b0000]) == pytest.approx(1.0)

    def test_all_ones_keeps_ancilla_zero(self):
        out = self.run_detector(3, 0b111)
        assert np.abs(out.amplitudes[0b1110]) == pytest.approx(1.0)

    def test_interior_state_flags_ancilla(self):
        out = self.run_detector(3, 0b011)
        assert np.abs(out.amplitudes[0b0111]) == pytest.approx(1.0)

    def test_boundary_superposition_keeps_ancilla_zero(self):
        circ = boundary_detector(3)
        amps = np.zeros(16)
        amps[0b0000] = amps[0b1110] = 1 / np.sqrt(2)
        out = apply_circuit(circ, StateVector(4, amps))
        anc1 = np.abs(out.amplitudes.reshape(-1, 2)[:, 1]) ** 2
        assert anc1.sum() == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_full_truth_table_and_magnitude_preservation(self, n):
        circ = boundary_detector(n)
        for basis in range(2**n):
            out = apply_circuit(circ, StateVector.basis(n + 1, basis << 1))
            probs = np.abs(out.amplitudes) ** 2
            hot = int(np.argmax(probs))
            assert probs[hot] == pytest.approx(1.0)  # basis -> basis
            expected_anc = 0 if basis in (0, 2**n - 1) else 1
            assert hot == (basis << 1) | expected_anc

    def test_gate_kinds_restricted(self):
        for n in (2, 3, 5):
            for gate in boundary_detector(n).gates:
                assert gate.kind in {"X", "CNOT", "TOFFOLI"}

    def test_too_small_register(self):
        with pytest.raises(WalkError):
            boundary_detector(1)


class TestAbsorbing:
    def test_single_step_matches_reflecting(self):
        model = WalkModel(8, -0.9, 1.0)
        psi = StateVector.basis(3, 3)
        absorbed = absorbing_walk(model, psi, 1)
        reflected = reflecting_walk(model, psi, 1)
        assert np.allclose(absorbed.tables[1], reflected.tables[1], atol=1e-12)
        assert absorbed.survival[1] == pytest.approx(1.0)

    def test_boundary_start_survival_is_interior_mass(self):
        # Start on a boundary: step 1 measures freely; survival into step 2
        # equals the probability U kept the walker interior, checked with
        # plain 4x4 arithmetic.
        model = WalkModel(4, -0.5, 0.8, dt=0.7)
        psi = StateVector.basis(2, 0)
        res = absorbing_walk(model, psi, 2)
        h = dense_walk_matrix(4, -0.5, 0.8)
        evals, evecs = np.linalg.eigh(h)
        u = (evecs * np.exp(-1j * evals * 0.7)) @ evecs.conj().T
        one = u @ psi.amplitudes
        interior = np.abs(one[1]) ** 2 + np.abs(one[2]) ** 2
        assert res.survival[2] == pytest.approx(interior, abs=1e-12)

    def test_survival_non_increasing(self):
        model = WalkModel(8, -0.6, 1.0)
        psi = StateVector.from_amplitudes(np.ones(8))
        res = absorbing_walk(model, psi, 6)
        for a, b in zip(res.survival, res.survival[1:]):
            assert b <= a + 1e-12

    def test_sampled_matches_exact_within_tv_bound(self):
        model = WalkModel(8, -0.6, 1.0)
        psi = StateVector.basis(3, 4)
        exact = absorbing_walk(model, psi, 4)
        sampled = absorbing_walk(model, psi, 4, shots=100_000, seed=5)
        for k in range(1, 5):
            assert total_variation(exact.tables[k], sampled.tables[k]) <= 0.02

    def test_sampled_within_five_sigma_per_state(self):
        model = WalkModel(8, -0.6, 1.0)
        psi = StateVector.basis(3, 4)
        shots = 100_000
        exact = absorbing_walk(model, psi, 3)
        sampled = absorbing_walk(model, psi, 3, shots=shots, seed=11)
        for k in range(1, 4):
            for p_exact, p_hat in zip(exact.tables[k], sampled.tables[k]):
                sigma = np.sqrt(max(p_exact * (1 - p_exact), 1e-12) / shots)
                assert abs(p_hat - p_exact) <= 5 * sigma + 1e-9

    def test_accepted_trajectories_never_saw_boundary(self):
        from quatro.qcore import evolution_operator
        from quatro.walks import _sampled_arm, boundary_detector

        model = WalkModel(4, -0.5, 1.0)
        _, dense = build_walk_hamiltonian(model)
        u_full = np.kron(evolution_operator(dense, 1.0), np.eye(2))
        rng = np.random.default_rng(3)
        psi = StateVector.basis(2, 1)
        counts, alive, outcomes = _sampled_arm(
            model, u_full, boundary_detector(2), psi, 4, 500, rng, None
        )
        assert np.all(outcomes[alive].all(axis=1))
        assert counts.sum() == alive.sum()

    def test_sampled_path_deterministic(self):
        model = WalkModel(4, -0.5, 1.0)
        psi = StateVector.basis(2, 1)
        a = absorbing_walk(model, psi, 3, shots=2000, seed=9)
        b = absorbing_walk(model, psi, 3, shots=2000, seed=9)
        for ta, tb in zip(a.tables, b.tables):
            assert np.array_equal(ta, tb)

    def test_zero_shots_rejected(self):
        model = WalkModel(4, -0.5, 1.0)
        with pytest.raises(WalkError):
            absorbing_walk(model, StateVector.basis(2, 1), 2, shots=0)


class TestNoisyAbsorbing:
    def test_noise_ordering(self):
        model = WalkModel(8, -0.6, 1.0)
        psi = StateVector.basis(3, 4)
        exact = absorbing_walk(model, psi, 4)
        shots = 50_000
        tvs = []
        for p in (1e-2, 1e-3, 1e-4):
            noisy = absorbing_walk(
                model, psi, 4, shots=shots, seed=31, noise=NoiseModel(p, p)
            )
            tvs.append(total_variation(exact.tables[4], noisy.tables[4]))
        assert tvs[0] > tvs[1] > tvs[2]
        assert tvs[2] <= 0.05
