"""Search/counting gadgets against the classical truth-table oracle."""

import math

import numpy as np
import pytest

from qsim.core import AnnihilationError, PureState, random_pure_state
from qsim.complexity import (
    AlgorithmResult,
    BooleanOracle,
    amplification_schedule,
    apply_q2_directly,
    build_sat_state,
    flag_one_terms,
    grover_baseline,
    grover_iterations,
    interferometric_search,
    nondet_via_r,
    q2_norm_formula,
    sat_via_g,
    sat_via_postselection,
    simulate_q2,
)

RT2 = math.sqrt(2.0)


def all_oracles(n):
    for bits in range(2 ** (2**n)):
        yield BooleanOracle(n, [(bits >> i) & 1 for i in range(2**n)])


class TestBooleanOracle:
    def test_construction_and_scan(self):
        o = BooleanOracle.from_solutions(3, [5])
        assert o(5) == 1 and o(4) == 0
        assert o.has_solution() and o.count() == 1
        assert list(o.solutions()) == [5]

    def test_json_round_trip(self):
        o = BooleanOracle.from_solutions(4, [3, 9])
        again = BooleanOracle.from_json(o.to_json())
        np.testing.assert_array_equal(again.truth_table, o.truth_table)
        direct = BooleanOracle.from_json({"n": 2, "truth_table": "0110"})
        assert list(direct.solutions()) == [1, 2]

    def test_from_callable(self):
        o = BooleanOracle.from_callable(3, lambda x: x == 6)
        assert list(o.solutions()) == [6]

    def test_validation(self):
        with pytest.raises(ValueError):
            BooleanOracle(0, [])
        with pytest.raises(ValueError):
            BooleanOracle(2, [0, 1, 2, 0])
        with pytest.raises(ValueError):
            BooleanOracle(15, np.zeros(2**15, dtype=np.uint8))


class TestBuildSatState:
    def test_constant_false(self):
        state = build_sat_state(BooleanOracle.from_solutions(1, []))
        np.testing.assert_allclose(state.amplitudes,
                                   np.array([1, 0, 1, 0]) / RT2, atol=1e-15)

    def test_single_solution_layout(self):
        state = build_sat_state(BooleanOracle.from_solutions(2, [3]))
        want = np.zeros(8)
        want[[0, 2, 4, 7]] = 0.5      # |00,0>, |01,0>, |10,0>, |11,1>
        np.testing.assert_allclose(state.amplitudes, want, atol=1e-15)

    def test_flag_marginal_counts_solutions(self):
        rng = np.random.default_rng(2)
        o = BooleanOracle.random(6, rng)
        state = build_sat_state(o)
        from qsim.gates import measure_with_renorm
        p1 = measure_with_renorm(state, targets=[6])[1].probability
        assert p1 == pytest.approx(o.count() / 2**6, abs=1e-12)


class TestSatViaG:
    def test_schedule_matches_base2_logs(self):
        assert amplification_schedule(8, 1.0) == 4
        assert amplification_schedule(10, 1.0) == 5
        assert amplification_schedule(8, 0.1) == math.ceil(8 / (2 * math.log2(1.1)))

    def test_single_solution_probability(self):
        res = sat_via_g(BooleanOracle.from_solutions(8, [3]), 1.0)
        assert res.resources["gate_applications"] == 4
        assert res.success_probability == pytest.approx(1 / (2 - 2.0**-8), abs=1e-12)
        assert res.decision is True

    def test_unsatisfiable_stays_at_zero(self):
        res = sat_via_g(BooleanOracle.from_solutions(6, []), 1.0)
        assert res.success_probability == 0.0
        assert res.decision is False

    def test_agrees_with_scan_on_random_oracles(self):
        rng = np.random.default_rng(8)
        for n in (5, 7, 10):
            for i in range(20):
                o = BooleanOracle.random(n, rng)
                res = sat_via_g(o, 1.0, rng_seed=i)
                assert res.decision == o.has_solution()

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            sat_via_g(BooleanOracle.from_solutions(2, [1]), 0.0)


class TestNondetViaR:
    def test_flag_term_doubling_single_solution(self):
        from qsim.gates import apply_nonlinear_or
        o = BooleanOracle.from_solutions(3, [6])
        state = build_sat_state(o)
        counts = [flag_one_terms(state, 3)]
        for i in range(3):
            state = apply_nonlinear_or(state, control=i, flag=3)
            counts.append(flag_one_terms(state, 3))
        assert counts == [1, 2, 4, 8]

    def test_or_decision(self):
        assert nondet_via_r(BooleanOracle.from_solutions(3, [6])).decision is True
        assert nondet_via_r(BooleanOracle.from_solutions(3, [])).decision is False

    def test_count_mode(self):
        o = BooleanOracle.from_solutions(6, list(range(13)))
        res = nondet_via_r(o, mode="count")
        assert res.decision == 13
        rng = np.random.default_rng(17)
        for n in (3, 4, 6):
            o = BooleanOracle.random(n, rng)
            assert nondet_via_r(o, mode="count").decision == o.count()

    def test_qbf_forall_exists_xor(self):
        # forall x exists y: x xor y  -> true
        o = BooleanOracle(2, [0, 1, 1, 0])
        res = nondet_via_r(o, mode="qbf", quantifiers="AE")
        assert res.decision is True
        # exists x forall y: x xor y  -> false
        res = nondet_via_r(o, mode="qbf", quantifiers="EA")
        assert res.decision is False

    def test_qbf_matches_classical_evaluation(self):
        def classical_qbf(prefix, oracle):
            vals = oracle.truth_table.astype(bool).reshape((2,) * oracle.n)
            for i in reversed(range(oracle.n)):
                vals = vals.any(axis=i) if prefix[i] == "E" else vals.all(axis=i)
            return bool(vals)

        rng = np.random.default_rng(23)
        for _ in range(25):
            n = int(rng.integers(1, 5))
            o = BooleanOracle.random(n, rng)
            prefix = "".join(rng.choice(["A", "E"], size=n))
            assert nondet_via_r(o, mode="qbf", quantifiers=prefix).decision == \
                classical_qbf(prefix, o)

    def test_validation(self):
        o = BooleanOracle.from_solutions(2, [1])
        with pytest.raises(ValueError):
            nondet_via_r(o, mode="qbf")
        with pytest.raises(ValueError):
            nondet_via_r(o, mode="qbf", quantifiers="AX")
        with pytest.raises(ValueError):
            nondet_via_r(o, mode="or", quantifiers="AE")
        with pytest.raises(ValueError):
            nondet_via_r(o, mode="bogus")


class TestSatViaPostselection:
    def test_unsatisfiable_reports_false(self):
        res = sat_via_postselection(BooleanOracle.from_solutions(4, []))
        assert res.decision is False

    def test_two_solution_post_state(self):
        from qsim.gates import post_select
        o = BooleanOracle.from_solutions(4, [3, 9])
        state = post_select(build_sat_state(o), target=4, outcome=1)
        want = np.zeros(32)
        want[[3 * 2 + 1, 9 * 2 + 1]] = 1 / RT2
        np.testing.assert_allclose(state.amplitudes, want, atol=1e-12)
        res = sat_via_postselection(o, rng_seed=5)
        assert res.decision is True
        assert res.assignment in (3, 9)

    def test_single_call_resources(self):
        res = sat_via_postselection(BooleanOracle.from_solutions(5, [17]))
        assert res.resources == {"gate_applications": 1, "oracle_calls": 1}
        assert res.assignment == 17


class TestSimulateQ2:
    def test_success_probability_equals_half_norm(self):
        rng = np.random.default_rng(14)
        for _ in range(60):
            n = int(rng.integers(1, 5))
            state = random_pure_state((2,) * (n + 1), rng)
            phi = float(rng.uniform(0, 2 * math.pi))
            sim = simulate_q2(state, phi)
            assert sim.success_prob == pytest.approx(
                q2_norm_formula(state, phi) / 2.0, abs=1e-12)

    def test_conditional_output_matches_direct_gate(self):
        rng = np.random.default_rng(15)
        for _ in range(60):
            state = random_pure_state((2,) * 4, rng)
            phi = float(rng.uniform(0, 2 * math.pi))
            sim = simulate_q2(state, phi)
            direct = apply_q2_directly(state, phi)
            fidelity = abs(sim.out_state.overlap(direct)) ** 2
            assert fidelity == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_branches_give_exactly_half(self):
        for n in range(2, 11):
            amps = np.zeros(2 ** (n + 1), dtype=complex)
            amps[0b00] = 1 / RT2          # |0..0>|0>
            amps[0b11] = 1 / RT2          # |0..1>|1>, branch vectors orthogonal
            state = PureState(amps, (2,) * (n + 1))
            sim = simulate_q2(state, 0.37)
            assert sim.success_prob == pytest.approx(0.5, abs=1e-12)

    def test_annihilation_raises(self):
        plus = PureState(np.array([1, 1]) / RT2, (2,))
        with pytest.raises(AnnihilationError):
            simulate_q2(plus, math.pi)

    def test_sampled_success_is_deterministic_per_stream(self):
        state = PureState(np.array([1, 1]) / RT2, (2,))
        outcomes = [simulate_q2(state, 0.0, rng=np.random.default_rng(4)).success
                    for _ in range(3)]
        assert len(set(outcomes)) == 1


class TestInterferometricSearch:
    def test_detection_weight_is_four_over_dim(self):
        assert interferometric_search(2, marked=1).detect_prob == pytest.approx(
            1.0, abs=1e-15)
        assert interferometric_search(10, marked=0).detect_prob == pytest.approx(
            4 * 2.0**-10, rel=1e-14)

    def test_detection_collapses_to_marked(self):
        res = interferometric_search(5, marked=19)
        assert res.post_detection_index == 19

    def test_bright_fringe_slightly_dim(self):
        res = interferometric_search(8, marked=3)
        assert res.bright_value == pytest.approx(4 * (1 - 2.0**-8), rel=1e-14)
        assert res.bright_value < 4.0
        assert res.dark_value == pytest.approx(4 * 2.0**-8, rel=1e-13)

    def test_fringe_mean_conserves_probability(self):
        # across one full fringe period the mean intensity equals the
        # orthogonal-arms level 2 regardless of the overlap
        for n in (2, 6, 12):
            res = interferometric_search(n, marked=0)
            assert res.mean_intensity == pytest.approx(2.0, abs=1e-10)

    def test_oracle_input_requires_single_mark(self):
        res = interferometric_search(0, oracle=BooleanOracle.from_solutions(3, [4]))
        assert res.n == 3 and res.detect_prob == pytest.approx(0.5, rel=1e-14)
        with pytest.raises(ValueError):
            interferometric_search(0, oracle=BooleanOracle.from_solutions(3, [1, 2]))
        with pytest.raises(ValueError):
            interferometric_search(3)


class TestGroverBaseline:
    def test_iteration_count(self):
        assert grover_iterations(4) == 3

    def test_single_solution_success_high(self):
        res = grover_baseline(BooleanOracle.from_solutions(4, [11]))
        assert res.resources["gate_applications"] == 3
        assert res.success_probability >= 0.96
        assert res.decision is True and res.assignment == 11

    def test_zero_iterations_is_uniform(self):
        # closed form sin^2((2k+1) asin(2^{-n/2})) at k=0 is 2^-n
        for n in (2, 5, 9):
            assert math.sin(math.asin(math.sqrt(2.0**-n))) ** 2 == pytest.approx(
                2.0**-n, rel=1e-12)

    def test_unsatisfiable(self):
        res = grover_baseline(BooleanOracle.from_solutions(4, []))
        assert res.success_probability == 0.0
        assert res.decision is False

    def test_exhaustive_small_oracles(self):
        for n in (1, 2):
            for o in all_oracles(n):
                res = grover_baseline(o, rng_seed=int(o.truth_table.sum()))
                assert res.decision == o.has_solution()

    def test_success_probability_closed_form(self):
        for n, s in ((3, 1), (3, 2), (4, 3), (5, 7)):
            o = BooleanOracle.from_solutions(n, list(range(s)))
            res = grover_baseline(o)
            theta = math.asin(math.sqrt(s / 2.0**n))
            want = math.sin((2 * grover_iterations(n) + 1) * theta) ** 2
            assert res.success_probability == pytest.approx(want, abs=1e-12)
