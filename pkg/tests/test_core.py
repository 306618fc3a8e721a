"""Core state/channel algebra: construction invariants, examples, properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsim.core import (
    AnnihilationError,
    Completeness,
    DensityOperator,
    DimensionMismatchError,
    Ensemble,
    OperatorSet,
    PureState,
    apply_channel,
    apply_operator,
    check_completeness,
    completeness_defect,
    embed_operator,
    haar_unitary,
    holevo_chi,
    partial_trace,
    random_complete_channel,
    random_density,
    random_pure_state,
    reduced_density,
    trace_distance,
    von_neumann_entropy,
)
from qsim.gates import constant_q2, deleter_channel, g_gate

RT2 = math.sqrt(2.0)


def bell(a, b, c, d):
    return PureState(np.array([a, b, c, d]) / RT2, (2, 2))


class TestStateConstruction:
    def test_dims_amplitude_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            PureState([1, 0, 0], (2, 2))

    def test_normalized_flag(self):
        assert PureState([1, 0], (2,)).normalized
        assert not PureState([1, 1], (2,)).normalized

    def test_unnormalized_states_are_first_class(self):
        s = PureState([1, 2], (2,))
        assert s.norm == pytest.approx(math.sqrt(5.0))

    def test_dimension_cap(self):
        with pytest.raises(DimensionMismatchError):
            PureState(np.zeros(2**15), (2,) * 15)
        PureState(np.zeros(2**15), (2,) * 15, max_dim=2**15)

    def test_immutability(self):
        s = PureState([1, 0], (2,))
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0

    def test_density_operator_validation(self):
        with pytest.raises(DimensionMismatchError):
            DensityOperator([[0.5, 0.5j], [0.5j, 0.5]], (2,))   # not Hermitian
        with pytest.raises(DimensionMismatchError):
            DensityOperator([[1.5, 0], [0, -0.5]], (2,))        # negative eigenvalue
        with pytest.raises(DimensionMismatchError):
            DensityOperator(np.eye(2), (2,))                    # trace 2
        DensityOperator(np.eye(2), (2,), unnormalized=True)

    def test_ensemble_probabilities(self):
        rho = DensityOperator.maximally_mixed((2,))
        with pytest.raises(ValueError):
            Ensemble([(0.7, rho), (0.7, rho)])
        ens = Ensemble([(0.5, rho), (0.5, rho)])
        assert ens.average().trace == pytest.approx(1.0)


class TestApplyOperator:
    def test_identity_keeps_state(self):
        s = bell(0, 1, 1, 0)
        out = apply_operator(s, np.eye(2), [0])
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-15)
        assert out.normalized

    def test_amplification_on_first_qubit(self):
        # (|01> + |10>)/sqrt(2) with diag(1, 2) on qubit 0 -> (|01> + 2|10>)/sqrt(2)
        out = apply_operator(bell(0, 1, 1, 0), g_gate(1.0, 1), [0])
        np.testing.assert_allclose(out.amplitudes,
                                   np.array([0, 1, 2, 0]) / RT2, atol=1e-15)
        assert out.norm**2 == pytest.approx(2.5, abs=1e-12)
        assert not out.normalized

    def test_constant_gate_factorizes_bob(self):
        # Q on qubit 0 of (|01> + |10>)/sqrt(2) -> |0> (x) (|0>+|1>)/sqrt(2)
        out = apply_operator(bell(0, 1, 1, 0), constant_q2(0.0), [0])
        np.testing.assert_allclose(out.amplitudes,
                                   np.array([1, 1, 0, 0]) / RT2, atol=1e-15)
        assert out.norm == pytest.approx(1.0, abs=1e-12)

    def test_target_validation(self):
        s = bell(1, 0, 0, 1)
        with pytest.raises(DimensionMismatchError):
            apply_operator(s, np.eye(2), [2])
        with pytest.raises(DimensionMismatchError):
            apply_operator(s, np.eye(4), [0])
        with pytest.raises(DimensionMismatchError):
            apply_operator(s, np.eye(2), [0, 0])

    def test_two_qubit_target_order(self):
        # swap realized by applying X (x) I on targets [1, 0] vs [0, 1]
        s = PureState([1, 0, 0, 0], (2, 2))
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        a = apply_operator(s, np.kron(x, np.eye(2)), [0, 1])
        b = apply_operator(s, np.kron(x, np.eye(2)), [1, 0])
        assert abs(a.amplitudes[2] - 1) < 1e-15   # |10>
        assert abs(b.amplitudes[1] - 1) < 1e-15   # |01>

    def test_rectangular_operator_grows_subsystem(self):
        iso = np.zeros((3, 2), dtype=complex)
        iso[0, 0] = iso[2, 1] = 1.0
        out = apply_operator(PureState([0, 1], (2,)), iso, [0])
        assert out.dims == (3,)
        assert abs(out.amplitudes[2] - 1) < 1e-15

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_linearity_including_constant_gates(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_pure_state((2, 2), rng)
        phi = random_pure_state((2, 2), rng)
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        combo = PureState(a * psi.amplitudes + b * phi.amplitudes, (2, 2))
        for op in (constant_q2(rng.uniform(0, 2 * math.pi)), g_gate(0.3, 2),
                   haar_unitary(2, rng)):
            lhs = apply_operator(combo, op, [0]).amplitudes
            rhs = (a * apply_operator(psi, op, [0]).amplitudes
                   + b * apply_operator(phi, op, [0]).amplitudes)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestPartialTrace:
    def test_maximally_entangled_reduces_to_mixed(self):
        rho = bell(1, 0, 0, 1).density()
        for keep in ([0], [1]):
            red = partial_trace(rho, keep)
            np.testing.assert_allclose(red.matrix, np.eye(2) / 2, atol=1e-15)

    def test_product_state_reduces_to_factor(self):
        psi = PureState([0.6, 0.8], (2,))
        phi = PureState([1 / RT2, 1j / RT2], (2,))
        red = partial_trace(psi.tensor(phi).density(), keep=[1])
        np.testing.assert_allclose(red.matrix, phi.density().matrix, atol=1e-15)

    def test_schmidt_weights(self):
        # cos(pi/6)|00> + sin(pi/6)|11> -> diag(3/4, 1/4)
        t = math.pi / 6
        s = PureState([math.cos(t), 0, 0, math.sin(t)], (2, 2))
        red = partial_trace(s.density(), keep=[1])
        np.testing.assert_allclose(red.matrix, np.diag([0.75, 0.25]), atol=1e-15)

    def test_trace_preserved_and_matches_pure_path(self):
        rng = np.random.default_rng(11)
        s = random_pure_state((2, 3, 2), rng)
        full = partial_trace(s.density(), keep=[0, 2])
        fast = reduced_density(s, keep=[0, 2])
        np.testing.assert_allclose(full.matrix, fast.matrix, atol=1e-14)
        assert full.trace == pytest.approx(1.0, abs=1e-12)

    def test_invalid_keep(self):
        rho = DensityOperator.maximally_mixed((2, 2))
        with pytest.raises(DimensionMismatchError):
            partial_trace(rho, [5])
        with pytest.raises(DimensionMismatchError):
            partial_trace(rho, [])


class TestApplyChannel:
    def test_deleter_on_mixed_state(self):
        rho = DensityOperator.maximally_mixed((2,))
        out, norm = apply_channel(rho, deleter_channel(2), [0])
        assert norm == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(out.matrix, np.diag([1.0, 0.0]), atol=1e-15)

    def test_constant_gate_as_channel(self):
        rho = DensityOperator.maximally_mixed((2,))
        ops = OperatorSet([constant_q2(0.0)])
        out, norm = apply_channel(rho, ops, [0])
        assert norm == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(out.matrix, np.diag([1.0, 0.0]), atol=1e-15)

    def test_amplifying_channel_relabels_bob(self):
        # 20-fold eps=0.1 amplification on Alice's half of (|01>+|10>)/sqrt(2):
        # Alice's |1> branch carries Bob's |0>, so Bob gains weight on |0>.
        rho = bell(0, 1, 1, 0).density()
        ops = OperatorSet([g_gate(0.1, 20)])
        out, norm = apply_channel(rho, ops, [0])
        bob = partial_trace(out, keep=[1])
        k = 1.1**40
        np.testing.assert_allclose(bob.matrix, np.diag([k, 1.0]) / (1 + k),
                                   atol=1e-12)

    def test_annihilated_state_raises(self):
        rho = PureState([0, 1], (2,)).density()
        kill = OperatorSet([np.array([[1, 0], [0, 0]], dtype=complex)])
        with pytest.raises(AnnihilationError):
            apply_channel(rho, kill, [0])

    def test_channel_commutes_on_disjoint_subsystems(self):
        rng = np.random.default_rng(5)
        for i in range(10):
            rho = random_density((2, 2), rng)
            ops_a = random_complete_channel(2, rng)
            ops_b = random_complete_channel(2, rng)
            a_first, _ = apply_channel(rho, ops_a, [0])
            ab1, _ = apply_channel(a_first, ops_b, [1])
            b_first, _ = apply_channel(rho, ops_b, [1])
            ab2, _ = apply_channel(b_first, ops_a, [0])
            np.testing.assert_allclose(ab1.matrix, ab2.matrix, atol=1e-12)


class TestMetrics:
    def test_trace_distance_basics(self):
        rho = DensityOperator.maximally_mixed((2,))
        assert trace_distance(rho, rho) == 0.0
        zero = PureState([1, 0], (2,)).density()
        one = PureState([0, 1], (2,)).density()
        assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-15)
        plus = PureState([1 / RT2, 1 / RT2], (2,)).density()
        assert trace_distance(rho, plus) == pytest.approx(0.5, abs=1e-15)

    def test_trace_distance_triangle_and_unitary_invariance(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            a, b, c = (random_density((2, 2), rng) for _ in range(3))
            assert trace_distance(a, c) <= (trace_distance(a, b)
                                            + trace_distance(b, c) + 1e-12)
            u = haar_unitary(4, rng)
            ua = DensityOperator(u @ a.matrix @ u.conj().T, (2, 2))
            ub = DensityOperator(u @ b.matrix @ u.conj().T, (2, 2))
            assert trace_distance(ua, ub) == pytest.approx(
                trace_distance(a, b), abs=1e-12)

    def test_entropy_clipping(self):
        pure = PureState([1, 0], (2,)).density()
        assert von_neumann_entropy(pure) == pytest.approx(0.0, abs=1e-12)
        assert von_neumann_entropy(
            DensityOperator.maximally_mixed((2,))) == pytest.approx(1.0, abs=1e-12)

    def test_holevo_examples(self):
        mixed = DensityOperator.maximally_mixed((2,))
        assert holevo_chi(Ensemble([(1.0, mixed)])) == pytest.approx(0.0, abs=1e-12)
        zero = PureState([1, 0], (2,)).density()
        one = PureState([0, 1], (2,)).density()
        assert holevo_chi(Ensemble([(0.5, zero), (0.5, one)])) == pytest.approx(
            1.0, abs=1e-12)
        plus = PureState([1 / RT2, 1 / RT2], (2,)).density()
        h34 = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
        assert holevo_chi(Ensemble([(0.5, mixed), (0.5, plus)])) == pytest.approx(
            h34 - 0.5, abs=1e-12)


class TestCompleteness:
    def test_deleter_is_complete(self):
        status, defect = check_completeness(deleter_channel(2))
        assert status is Completeness.COMPLETE
        assert defect == 0.0

    def test_constant_gate_is_not(self):
        status, defect = check_completeness(OperatorSet([constant_q2(0.0)]))
        assert status is Completeness.NON_COMPLETE
        assert defect > 0.5

    def test_normalized_mode_sum_is_not(self):
        # (<2| + <5|)/sqrt(2) restricted to its two-mode span
        e = np.array([[1.0, 1.0]]) / RT2
        status, defect = check_completeness(OperatorSet([e]))
        assert status is Completeness.NON_COMPLETE
        assert defect == pytest.approx(0.5, abs=1e-12)

    def test_tagged_complete_is_verified(self):
        with pytest.raises(DimensionMismatchError):
            OperatorSet([constant_q2(0.0)], completeness=Completeness.COMPLETE)


class TestNoSignalingProperty:
    def test_complete_channels_leave_partner_fixed(self):
        # the full 1000-channel suite runs in the acceptance module
        rng = np.random.default_rng(3)
        for i in range(100):
            shared = random_pure_state((2, 2), rng)
            ops = random_complete_channel(2, rng)
            before = partial_trace(shared.density(), keep=[1])
            after, norm = apply_channel(shared.density(), ops, targets=[0])
            assert norm == pytest.approx(1.0, abs=1e-12)
            shift = trace_distance(before, partial_trace(after, keep=[1]))
            assert shift < 1e-10

    def test_embed_matches_kron_for_leading_target(self):
        rng = np.random.default_rng(4)
        op = haar_unitary(2, rng)
        full = embed_operator(op, (2, 2), [0])
        np.testing.assert_allclose(full, np.kron(op, np.eye(2)), atol=1e-14)
        full_b = embed_operator(op, (2, 2), [1])
        np.testing.assert_allclose(full_b, np.kron(np.eye(2), op), atol=1e-14)

    def test_completeness_defect_helper(self):
        assert completeness_defect([np.eye(3)]) == 0.0
