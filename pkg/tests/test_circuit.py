import numpy as np
import pytest

from qkclass import qmath
from qkclass.circuit import (Observable, ancilla_label_parity,
                             apply_swap_test_unitary,
                             build_effective_observable,
                             build_swap_test_unitary, embed_operators,
                             empirical_expectation, expectation,
                             outcome_probabilities, run_swap_test,
                             sample_shots, swap_label_observable,
                             swap_operator)
from qkclass.encoding import TrainingSet, assemble_mixed_stc_input, assemble_pure_stc_input
from qkclass.errors import DataError, DimensionError, NumericError
from qkclass.qmath import (PAULIS, SIGMA_Z, QState, basis_state,
                           random_density_matrix, random_state_vector,
                           tensor, tensor_power)
from qkclass.registers import block_layout, pair_layout


def pauli_sum_swap():
    """Two-qubit swap written as half the sum of matched Pauli pairs."""
    return sum(tensor(s, s) for s in PAULIS) / 2.0


class TestSwapOperator:
    def test_definition_on_basis(self):
        s = swap_operator(2).matrix
        ket01 = tensor(basis_state(2, 0), basis_state(2, 1))
        ket10 = tensor(basis_state(2, 1), basis_state(2, 0))
        assert np.allclose(s @ ket01, ket10)

    def test_eigenvalues_one_qubit_pair(self):
        vals = np.sort(np.linalg.eigvalsh(swap_operator(2).matrix))
        assert np.allclose(vals, [-1, 1, 1, 1], atol=1e-12)

    def test_equals_pauli_sum_one_qubit(self):
        assert np.abs(swap_operator(2).matrix - pauli_sum_swap()).max() < 1e-14

    def test_equals_pauli_sum_two_qubits(self):
        # The Pauli-pair form acts on interleaved qubits (t1 d1 t2 d2);
        # permuting to block order (t1 t2 d1 d2) must give the register swap.
        interleaved = tensor(pauli_sum_swap(), pauli_sum_swap())
        p = qmath.register_permutation_matrix((2, 2, 2, 2), (0, 2, 1, 3))
        block = p @ interleaved @ p.conj().T
        assert np.abs(swap_operator(4).matrix - block).max() < 1e-14


class TestSwapTestUnitary:
    @pytest.mark.parametrize("layout", [
        block_layout(2, 1), block_layout(2, 2), block_layout(4, 1),
        block_layout(2, 1, index_slots=3), pair_layout(2, 2), pair_layout(4, 1),
    ])
    def test_unitarity_and_structural_agreement(self, layout):
        rng = np.random.default_rng(layout.dim)
        v = build_swap_test_unitary(layout)
        assert np.abs(v @ v.conj().T - np.eye(layout.dim)).max() < 1e-12
        vec = random_state_vector(layout.dim, rng).vec
        assert np.allclose(apply_swap_test_unitary(vec, layout), v @ vec, atol=1e-12)
        rho = random_density_matrix(layout.dim, rng, rank=3)
        assert np.allclose(apply_swap_test_unitary(rho.entries, layout),
                           v @ rho.entries @ v.conj().T, atol=1e-12)

    def test_swap_invariant_input_unchanged(self):
        rng = np.random.default_rng(1)
        psi = random_state_vector(2, rng)
        layout = block_layout(2, 1)
        vec = tensor(basis_state(2, 0), psi.vec, psi.vec, basis_state(2, 0))
        out = apply_swap_test_unitary(vec, layout)
        assert np.allclose(out, vec, atol=1e-12)

    @pytest.mark.parametrize("k", [1, 2])
    def test_output_structure_on_indexed_input(self, k):
        # Oracle: construct the post-circuit state explicitly as
        # sum_m sqrt(a_m)/2 (|0>|psi_k+> + |1>|psi_k->)|y_m>|m> with
        # |psi_k+-> = |t>|d_m> +- |d_m>|t>.
        rng = np.random.default_rng(40 + k)
        xs = [random_state_vector(2, rng) for _ in range(2)]
        ys = [0, 1]
        ws = [0.25, 0.75]
        test = random_state_vector(2, rng)
        ts = TrainingSet.from_states(list(zip(xs, ys, ws)), k=k)
        state = assemble_pure_stc_input(ts, test, with_index=True)
        got = apply_swap_test_unitary(state.vector, state.layout)
        t_block = tensor_power(test.vec, k)
        expect = np.zeros_like(got)
        for m, (x, y, w) in enumerate(zip(xs, ys, ws)):
            d_block = tensor_power(x.vec, k)
            plus = tensor(t_block, d_block) + tensor(d_block, t_block)
            minus = tensor(t_block, d_block) - tensor(d_block, t_block)
            branch = (tensor(basis_state(2, 0), plus)
                      + tensor(basis_state(2, 1), minus)) / 2.0
            expect += np.sqrt(w) * tensor(branch, basis_state(2, y), basis_state(2, m))
        assert np.allclose(got, expect, atol=1e-12)

    def test_layout_without_ancilla_rejected(self):
        with pytest.raises(DimensionError):
            build_swap_test_unitary(block_layout(2, 1, ancilla=False))

    @pytest.mark.parametrize("seed", range(6))
    def test_index_register_is_optional(self, seed):
        # The indexed superposition and the index-free mixture produce the
        # same measured parity for identical data, weights, and copies.
        rng = np.random.default_rng(700 + seed)
        n = int(rng.integers(1, 3))
        k = int(rng.integers(1, 3))
        m = int(rng.integers(1, 4))
        states = [random_state_vector(2 ** n, rng) for _ in range(m)]
        labels = [int(rng.integers(0, 2)) for _ in range(m)]
        weights = rng.random(m) + 0.1
        test = random_state_vector(2 ** n, rng)
        ts = TrainingSet.from_states(list(zip(states, labels, weights)), k=k)
        indexed = assemble_pure_stc_input(ts, test, with_index=True)
        vec = apply_swap_test_unitary(indexed.vector, indexed.layout)
        with_index = expectation(ancilla_label_parity(indexed.layout), vec)
        index_free = run_swap_test(assemble_pure_stc_input(ts, test))
        without_index = expectation(ancilla_label_parity(index_free.layout), index_free)
        assert abs(with_index - without_index) < 1e-10


class TestEffectiveObservable:
    def test_expected_eigenvector_table(self):
        obs = build_effective_observable(1, 1)
        spec = obs.spectrum
        assert np.allclose(sorted(spec.eigenvalues), [-1] * 4 + [1] * 4, atol=1e-10)
        s2 = 1 / np.sqrt(2)
        plus_pairs = [
            np.kron([1, 0, 0, 0], [1, 0]),            # |000>
            np.kron([0, 0, 0, 1], [1, 0]),            # |110>
            np.kron([0, s2, s2, 0], [1, 0]),          # sym x |0>
            np.kron([0, s2, -s2, 0], [0, 1]),         # antisym x |1>
        ]
        minus_pairs = [
            np.kron([1, 0, 0, 0], [0, 1]),            # |001>
            np.kron([0, 0, 0, 1], [0, 1]),            # |111>
            np.kron([0, s2, s2, 0], [0, 1]),          # sym x |1>
            np.kron([0, s2, -s2, 0], [1, 0]),         # antisym x |0>
        ]
        for lam, vecs in ((1.0, plus_pairs), (-1.0, minus_pairs)):
            proj = spec.projector_onto(lam)
            for v in vecs:
                assert np.linalg.norm(proj @ v - v) < 1e-10

    def test_identical_states_label_zero_gives_plus_one(self):
        rng = np.random.default_rng(2)
        x = random_state_vector(2, rng)
        state = tensor(x.vec, x.vec, basis_state(2, 0))
        obs = build_effective_observable(1, 1)
        assert abs(expectation(obs.matrix, np.outer(state, state.conj())) - 1.0) < 1e-12

    @pytest.mark.parametrize("n,k", [(1, 1), (1, 2), (2, 1)])
    def test_conjugated_parity_equals_effective_observable_block(self, n, k):
        layout = block_layout(2 ** n, k)
        v = build_swap_test_unitary(layout)
        zal = ancilla_label_parity(layout).matrix
        conjugated = v.conj().T @ zal @ v
        effective = tensor(SIGMA_Z, build_effective_observable(n, k).matrix)
        assert np.linalg.norm(conjugated - effective) < 1e-12

    @pytest.mark.parametrize("n,k", [(1, 1), (1, 2)])
    def test_conjugated_parity_equals_swap_label_pair_order(self, n, k):
        layout = pair_layout(2 ** n, k)
        v = build_swap_test_unitary(layout)
        zal = ancilla_label_parity(layout).matrix
        conjugated = v.conj().T @ zal @ v
        bare = pair_layout(2 ** n, k, ancilla=False)
        effective = tensor(SIGMA_Z, swap_label_observable(bare).matrix)
        assert np.linalg.norm(conjugated - effective) < 1e-12

    def test_observables_square_to_identity(self):
        for obs in (build_effective_observable(1, 2), swap_operator(4),
                    ancilla_label_parity(block_layout(2, 1))):
            sq = obs.matrix @ obs.matrix
            assert np.abs(sq - np.eye(obs.dim)).max() < 1e-10


class TestExpectation:
    def test_sigma_z_on_ground_state(self):
        assert expectation(SIGMA_Z, np.diag([1.0, 0.0]).astype(complex)) == pytest.approx(1.0)

    def test_identity_gives_trace(self):
        rho = random_density_matrix(4, np.random.default_rng(3))
        assert expectation(np.eye(4, dtype=complex), rho) == pytest.approx(1.0)

    def test_single_datum_kernel_value(self):
        rng = np.random.default_rng(4)
        x = random_state_vector(2, rng)
        test = random_state_vector(2, rng)
        ts = TrainingSet.from_states([(x, 0, 1.0)])
        after = run_swap_test(assemble_pure_stc_input(ts, test))
        value = expectation(ancilla_label_parity(after.layout), after)
        assert abs(value - abs(test.overlap(x)) ** 2) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            expectation(SIGMA_Z, np.eye(4) / 4)


class TestOutcomeProbabilities:
    def test_identical_pure_states_certain(self):
        rng = np.random.default_rng(5)
        x = random_state_vector(2, rng)
        ts = [(x.to_density(), 0, 1.0)]
        state = assemble_mixed_stc_input(x.to_density(), ts, 1, with_ancilla=False)
        probs = outcome_probabilities(swap_label_observable(state.layout), state)
        assert probs[1] == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_states_even_odds(self):
        state = assemble_mixed_stc_input(
            QState(basis_state(2, 0)).to_density(),
            [(QState(basis_state(2, 1)).to_density(), 0, 1.0)], 1, with_ancilla=False)
        probs = outcome_probabilities(swap_label_observable(state.layout), state)
        assert probs[1] == pytest.approx(0.5, abs=1e-12)
        assert probs[-1] == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_projectors_match_kernel_closed_form(self, seed):
        rng = np.random.default_rng(100 + seed)
        test = random_density_matrix(2, rng)
        train = [(random_density_matrix(2, rng), int(rng.integers(0, 2)), w)
                 for w in (0.2, 0.5, 0.3)]
        state = assemble_mixed_stc_input(test, train, 1, with_ancilla=False)
        probs = outcome_probabilities(swap_label_observable(state.layout), state)
        signed = sum((1 - 2 * y) * w * qmath.hs_inner(test, rho)
                     for rho, y, w in train)
        for lam in (1, -1):
            assert abs(probs[lam] - 0.5 * (1 + lam * signed)) < 1e-10
        value = expectation(swap_label_observable(state.layout), state)
        assert abs(value - (probs[1] - probs[-1])) < 1e-10

    def test_requires_pm_one_spectrum(self):
        bad = Observable(np.diag([2.0, 0.5]).astype(complex))
        with pytest.raises(NumericError):
            outcome_probabilities(bad, np.eye(2) / 2)


class TestSampling:
    def _even_odds_state(self):
        return assemble_mixed_stc_input(
            QState(basis_state(2, 0)).to_density(),
            [(QState(basis_state(2, 1)).to_density(), 0, 1.0)], 1, with_ancilla=False)

    def test_certain_outcome(self):
        rng = np.random.default_rng(6)
        x = random_state_vector(2, rng)
        state = assemble_mixed_stc_input(x.to_density(), [(x.to_density(), 0, 1.0)],
                                         1, with_ancilla=False)
        records = sample_shots(swap_label_observable(state.layout), state, 1000, seed=7)
        assert dict((r.outcome, r.count) for r in records)[1] == 1000

    def test_balanced_outcome_within_binomial_bounds(self):
        state = self._even_odds_state()
        records = sample_shots(swap_label_observable(state.layout), state, 10**5, seed=8)
        mean = empirical_expectation(records)
        # 3 sigma of a +-1 coin over 1e5 draws
        assert abs(mean) < 3.0 / np.sqrt(10**5)

    def test_empirical_mean_converges_at_binomial_rate(self):
        # variance of a +-1 outcome is 1 - <Z>**2
        rng = np.random.default_rng(55)
        x, test = random_state_vector(2, rng), random_state_vector(2, rng)
        state = assemble_mixed_stc_input(test.to_density(), [(x.to_density(), 0, 1.0)],
                                         1, with_ancilla=False)
        obs = swap_label_observable(state.layout)
        value = expectation(obs, state)
        shots = 10**5
        records = sample_shots(obs, state, shots, seed=56)
        sigma = np.sqrt(max(1.0 - value**2, 1e-12) / shots)
        assert abs(empirical_expectation(records) - value) < 3 * sigma

    def test_seed_determinism(self):
        state = self._even_odds_state()
        obs = swap_label_observable(state.layout)
        assert sample_shots(obs, state, 500, seed=9) == sample_shots(obs, state, 500, seed=9)

    def test_counts_sum_to_shots(self):
        state = self._even_odds_state()
        records = sample_shots(swap_label_observable(state.layout), state, 123, seed=10)
        assert sum(r.count for r in records) == 123
        assert all(r.seed == 10 for r in records)

    def test_shots_must_be_positive(self):
        state = self._even_odds_state()
        with pytest.raises(DataError):
            sample_shots(swap_label_observable(state.layout), state, 0, seed=1)


class TestEmbedding:
    def test_embed_checks_dimensions(self):
        layout = block_layout(2, 1)
        with pytest.raises(DimensionError):
            embed_operators(layout, {0: np.eye(4)})

    def test_parity_needs_ancilla(self):
        with pytest.raises(DimensionError):
            ancilla_label_parity(block_layout(2, 1, ancilla=False))
