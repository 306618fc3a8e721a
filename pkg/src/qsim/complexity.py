"""Search and counting gadgets built from the non-standard primitives.

Every algorithm here is paired with a classical truth-table scan
(:meth:`BooleanOracle.has_solution` / :meth:`BooleanOracle.count`), which the
test suite uses as the independent oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    AnnihilationError,
    DimensionMismatchError,
    PureState,
    apply_operator,
)
from .gates import (
    HADAMARD,
    NonlinearGateDomainError,
    ZeroAmplitudeError,
    apply_nonlinear_and,
    apply_nonlinear_or,
    constant_q2,
    g_gate,
    measure_with_renorm,
    phase_gate,
    post_select,
)

MAX_ORACLE_BITS = 14


@dataclass(frozen=True)
class BooleanOracle:
    """A black-box f: {0,1}^n -> {0,1} held as an explicit truth table."""

    n: int
    truth_table: np.ndarray

    def __init__(self, n: int, truth_table):
        n = int(n)
        if not 1 <= n <= MAX_ORACLE_BITS:
            raise ValueError(f"oracle size n={n} outside 1..{MAX_ORACLE_BITS}")
        tt = np.array(truth_table, dtype=np.uint8).reshape(-1)
        if tt.size != 2**n or not np.isin(tt, (0, 1)).all():
            raise ValueError(f"truth table must hold 2^{n} bits")
        tt.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "truth_table", tt)

    @classmethod
    def from_solutions(cls, n: int, solutions: Sequence[int]) -> "BooleanOracle":
        tt = np.zeros(2**n, dtype=np.uint8)
        tt[list(solutions)] = 1
        return cls(n, tt)

    @classmethod
    def from_callable(cls, n: int, f: Callable[[int], int]) -> "BooleanOracle":
        return cls(n, [1 if f(x) else 0 for x in range(2**n)])

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BooleanOracle":
        return cls(n, rng.integers(0, 2, size=2**n, dtype=np.uint8))

    @classmethod
    def from_json(cls, obj: str | dict) -> "BooleanOracle":
        data = json.loads(obj) if isinstance(obj, str) else obj
        if "solutions" in data:
            return cls.from_solutions(int(data["n"]), data["solutions"])
        return cls(int(data["n"]), [int(c) for c in data["truth_table"]])

    def to_json(self) -> str:
        return json.dumps({"n": self.n,
                           "solutions": [int(s) for s in self.solutions()]})

    def __call__(self, x: int) -> int:
        return int(self.truth_table[x])

    def solutions(self) -> np.ndarray:
        return np.flatnonzero(self.truth_table)

    def count(self) -> int:
        """Classical brute-force count of satisfying inputs."""
        return int(self.truth_table.sum())

    def has_solution(self) -> bool:
        """Classical brute-force satisfiability scan."""
        return bool(self.truth_table.any())


@dataclass(frozen=True)
class AlgorithmResult:
    """Decision (or count, or assignment) plus success statistics."""

    decision: bool | int
    success_probability: float
    resources: dict = field(default_factory=dict)
    assignment: int | None = None


def build_sat_state(oracle: BooleanOracle, max_dim: int | None = None) -> PureState:
    """Uniform (n+1)-qubit oracle state: index register tensored with f(x)."""
    n = oracle.n
    amps = np.zeros(2 ** (n + 1), dtype=np.complex128)
    idx = (np.arange(2**n) << 1) | oracle.truth_table
    amps[idx] = 2.0 ** (-n / 2.0)
    return PureState(amps, (2,) * (n + 1), max_dim=max_dim)


def _flag_probability(state: PureState, flag: int) -> float:
    return measure_with_renorm(state, targets=[flag])[1].probability


# ---------------------------------------------------------------------------
# amplification-gate SAT


def amplification_schedule(n: int, epsilon: float) -> int:
    """Number of gate applications, ceil(n / (2 log2(1+eps))).

    Base-2 logs make the unnormalized weight of a lone solution reach at
    least 1 (exactly 1 when 2 log2(1+eps) divides n).
    """
    return math.ceil(n / (2.0 * math.log2(1.0 + epsilon)))


def sat_via_g(oracle: BooleanOracle, epsilon: float, shots: int = 128,
              rng_seed: int = 0) -> AlgorithmResult:
    """Satisfiability via flag amplification plus a majority-shot readout.

    The flag qubit's weight is amplified m times; an unsatisfiable instance
    keeps P(flag=1) = 0 exactly while any solution pushes it to ~1/2 or more,
    so the majority vote (more than shots/4 ones) errs with probability
    exponentially small in the shot count, and never errs on unsatisfiable
    instances.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    m = amplification_schedule(oracle.n, epsilon)
    state = build_sat_state(oracle)
    state = apply_operator(state, g_gate(epsilon, m), [oracle.n])
    p1 = _flag_probability(state, oracle.n)
    rng = np.random.default_rng([rng_seed, oracle.n])
    ones = int((rng.random(shots) < p1).sum())
    return AlgorithmResult(
        decision=bool(ones > shots / 4),
        success_probability=p1,
        resources={"gate_applications": m, "oracle_calls": 1, "shots": shots,
                   "flag_ones": ones},
    )


# ---------------------------------------------------------------------------
# nonlinear OR / AND / counting


def flag_one_terms(state: PureState, flag: int) -> int:
    """Number of computational-basis terms carrying flag = 1."""
    arr = np.abs(state.amplitudes.reshape(state.dims))
    arr = np.moveaxis(arr, flag, -1).reshape(-1, state.dims[flag])
    return int((arr[:, 1] > 1e-12 * arr.max()).sum())


def _nonlinear_count_pairing(state: PureState, control: int, register: int) -> PureState:
    """Counting analog of the nonlinear OR on a width-M count register.

    In each spectator subspace the two branches (control=0, count c0) and
    (control=1, count c1) both move to count c0 + c1; basis states are fixed.
    Domain checks mirror the OR table (two equal-magnitude +-1-phase terms at
    distinct control values).
    """
    n = state.n_subsystems
    reg_dim = state.dims[register]
    arr = state.amplitudes.reshape(state.dims)
    arr = np.moveaxis(arr, (control, register), (n - 2, n - 1))
    spect_shape = arr.shape[:-2]
    v = arr.reshape(-1, 2 * reg_dim).copy()
    mags = np.abs(v)
    cutoff = 1e-12 * mags.max()
    nz = mags > cutoff
    counts = nz.sum(axis=1)
    if counts.max() > 2:
        raise NonlinearGateDomainError("more than two basis terms in a subspace")
    rows = np.where(counts == 2)[0]
    if rows.size:
        order = np.argsort(~nz[rows], axis=1, kind="stable")
        i, j = order[:, 0], order[:, 1]
        a, b = v[rows, i], v[rows, j]
        if ((i // reg_dim) == (j // reg_dim)).any():
            raise NonlinearGateDomainError("superposed counts at one control value")
        scale = np.maximum(np.abs(a), np.abs(b))
        if (np.minimum(np.abs(a - b), np.abs(a + b)) > 1e-9 * scale).any():
            raise NonlinearGateDomainError("unequal magnitudes or non +-1 phase")
        new_c = (i % reg_dim) + (j % reg_dim)
        if (new_c >= reg_dim).any():
            raise DimensionMismatchError("count register overflow")
        out_rows = np.zeros((rows.size, 2 * reg_dim), dtype=np.complex128)
        out_rows[np.arange(rows.size), (i // reg_dim) * reg_dim + new_c] = a
        out_rows[np.arange(rows.size), (j // reg_dim) * reg_dim + new_c] += b
        v[rows] = out_rows
    out = v.reshape(spect_shape + (2, reg_dim))
    out = np.moveaxis(out, (n - 2, n - 1), (control, register))
    return PureState(out.reshape(-1), state.dims, max_dim=state.dim)


def nondet_via_r(oracle: BooleanOracle, mode: str = "or",
                 quantifiers: str | None = None) -> AlgorithmResult:
    """Pair every index qubit with the flag through the nonlinear gates.

    ``mode='or'``: after n pairings the flag disentangles to |has_solution>.
    ``mode='count'``: the flag is widened to a count register (dimension
    2^n + 1) and the counting pairing leaves the exact number of solutions.
    ``mode='qbf'``: a quantifier prefix over the index qubits ('E'/'A' per
    qubit) alternates OR and AND pairings innermost-first, evaluating the
    quantified formula.
    """
    n = oracle.n
    if mode == "qbf":
        if quantifiers is None or len(quantifiers) != n or set(quantifiers) - set("AE"):
            raise ValueError("qbf mode needs an 'A'/'E' prefix of length n")
    elif quantifiers is not None:
        raise ValueError(f"quantifiers are only meaningful in qbf mode")

    if mode in ("or", "qbf"):
        state = build_sat_state(oracle)
        if mode == "or":
            for i in range(n):
                state = apply_nonlinear_or(state, control=i, flag=n)
        else:
            for i in reversed(range(n)):
                gate = apply_nonlinear_or if quantifiers[i] == "E" else apply_nonlinear_and
                state = gate(state, control=i, flag=n)
        p1 = _flag_probability(state, n)
        if min(p1, 1.0 - p1) > 1e-12:
            raise NonlinearGateDomainError(
                f"flag failed to disentangle (P(1) = {p1})")
        return AlgorithmResult(
            decision=bool(p1 > 0.5),
            success_probability=1.0,
            resources={"gate_applications": n, "oracle_calls": 1},
        )

    if mode == "count":
        reg_dim = 2**n + 1
        amps = np.zeros(2**n * reg_dim, dtype=np.complex128)
        idx = np.arange(2**n) * reg_dim + oracle.truth_table
        amps[idx] = 2.0 ** (-n / 2.0)
        state = PureState(amps, (2,) * n + (reg_dim,), max_dim=2**n * reg_dim)
        for i in range(n):
            state = _nonlinear_count_pairing(state, control=i, register=n)
        outcomes = measure_with_renorm(state, targets=[n])
        probs = np.array([oc.probability for oc in outcomes])
        value = int(np.argmax(probs))
        if abs(probs[value] - 1.0) > 1e-12:
            raise NonlinearGateDomainError("count register failed to disentangle")
        return AlgorithmResult(
            decision=value,
            success_probability=1.0,
            resources={"gate_applications": n, "oracle_calls": 1,
                       "register_dim": reg_dim},
        )

    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# post-selection SAT


def sat_via_postselection(oracle: BooleanOracle, rng_seed: int = 0) -> AlgorithmResult:
    """One oracle call, one post-selection on flag = 1.

    A satisfiable instance collapses the index register to the uniform
    superposition over solutions (one is sampled as the returned assignment);
    an unsatisfiable one makes the post-selection a zero-amplitude error,
    reported as decision False.
    """
    state = build_sat_state(oracle)
    resources = {"gate_applications": 1, "oracle_calls": 1}
    try:
        post = post_select(state, target=oracle.n, outcome=1)
    except ZeroAmplitudeError:
        return AlgorithmResult(decision=False, success_probability=1.0,
                               resources=resources)
    index_probs = np.array([oc.probability for oc in
                            measure_with_renorm(post, targets=list(range(oracle.n)))])
    rng = np.random.default_rng([rng_seed, oracle.n])
    assignment = int(rng.choice(2**oracle.n, p=index_probs))
    return AlgorithmResult(decision=True, success_probability=1.0,
                           resources=resources, assignment=assignment)


# ---------------------------------------------------------------------------
# constant-gate simulation (the polynomial-cost protocol)


@dataclass(frozen=True)
class Q2Simulation:
    success: bool
    out_state: PureState
    success_prob: float


def simulate_q2(state: PureState, phi: float,
                rng: np.random.Generator | None = None) -> Q2Simulation:
    """Standard-resource simulation of the phase-parametrized constant gate.

    Phase the last qubit, Hadamard it, and measure: outcome 0 occurs with
    probability N/2, where N is the squared norm of the constant gate's
    (unrenormalized) output, and conditions the register on exactly that
    output, renormalized.  Without an rng the conditioned branch is returned
    deterministically; with one, success is sampled.
    """
    if state.dims[-1] != 2:
        raise DimensionMismatchError("the last subsystem must be a qubit")
    last = state.n_subsystems - 1
    worked = apply_operator(state, phase_gate(phi), [last])
    worked = apply_operator(worked, HADAMARD, [last])
    outcomes = measure_with_renorm(worked, targets=[last])
    p0 = outcomes[0].probability
    if p0 <= 1e-15:
        raise AnnihilationError("constant gate annihilates this state (N = 0)")
    success = bool(rng.random() < p0) if rng is not None else True
    return Q2Simulation(success=success, out_state=outcomes[0].post_state,
                        success_prob=p0)


def q2_norm_formula(state: PureState, phi: float) -> float:
    """Closed-form N = 1 + 2[cos(phi) Re<a|b> - sin(phi) Im<a|b>].

    <a|b> is the overlap of the last qubit's two branch vectors; the input
    must be normalized for the formula to apply.
    """
    arr = state.amplitudes.reshape(-1, 2)
    ab = complex(np.vdot(arr[:, 0], arr[:, 1]))
    return float(1.0 + 2.0 * (math.cos(phi) * ab.real - math.sin(phi) * ab.imag))


def apply_q2_directly(state: PureState, phi: float) -> PureState:
    """The constant gate applied to the last qubit, output renormalized."""
    out = apply_operator(state, constant_q2(phi), [state.n_subsystems - 1])
    return out.normalize()


# ---------------------------------------------------------------------------
# interferometric search


@dataclass(frozen=True)
class InterferometricResult:
    """Path-singularity search: detection weight and the fringe sweep."""

    n: int
    detect_prob: float
    thetas: np.ndarray
    intensities: np.ndarray
    kappa_weights: np.ndarray
    dark_value: float
    bright_value: float
    mean_intensity: float
    post_detection_index: int


def interferometric_search(n: int, oracle: BooleanOracle | None = None,
                           marked: int | None = None,
                           theta_points: int = 256,
                           kappa_sigma: float = math.pi) -> InterferometricResult:
    """Two-subwave convergence with a sign oracle on one arm.

    The reference arm holds the uniform superposition; the oracle arm has
    every unmarked amplitude sign-flipped.  At the convergence point the arms
    add, every unmarked component cancels exactly, and a particle is detected
    with weight 4 * 2^-n, always collapsed onto the marked state.  The fringe
    sweep evaluates |arm_a + e^{i theta} arm_b|^2 over one full period
    (trapezoid-mean reported for the across-fringe conservation check) along
    with a Gaussian envelope kappa(theta) = exp(-theta^2 / 2 sigma^2).
    """
    if oracle is not None:
        sols = oracle.solutions()
        if sols.size != 1:
            raise ValueError("interferometric search needs exactly one marked state")
        n = oracle.n
        marked = int(sols[0])
    if marked is None:
        raise ValueError("provide an oracle or a marked index")
    dim = 2**n
    if not 0 <= marked < dim:
        raise ValueError(f"marked index {marked} out of range")
    a = np.full(dim, 2.0 ** (-n / 2.0))
    b = -a.copy()
    b[marked] = -b[marked]
    summed = a + b
    detect_prob = float(np.vdot(summed, summed).real)
    post_detection_index = int(np.argmax(np.abs(summed)))

    thetas = np.linspace(0.0, 2.0 * math.pi, theta_points + 1)
    overlap = float(a @ b)
    intensities = 2.0 + 2.0 * np.cos(thetas) * overlap
    kappa = np.exp(-(thetas**2) / (2.0 * kappa_sigma**2))
    dark = float(intensities[0])
    bright = 2.0 - 2.0 * overlap
    h = thetas[1] - thetas[0]
    trap = h * (0.5 * intensities[0] + intensities[1:-1].sum() + 0.5 * intensities[-1])
    mean = float(trap / (2.0 * math.pi))
    return InterferometricResult(
        n=n, detect_prob=detect_prob, thetas=thetas, intensities=intensities,
        kappa_weights=kappa**2 * intensities, dark_value=dark,
        bright_value=bright, mean_intensity=mean,
        post_detection_index=post_detection_index)


# ---------------------------------------------------------------------------
# standard-theory baseline


def grover_iterations(n: int) -> int:
    return int(math.floor(math.pi * math.sqrt(2.0**n) / 4.0))


def grover_baseline(oracle: BooleanOracle, shots: int = 64,
                    rng_seed: int = 0) -> AlgorithmResult:
    """Fixed-iteration Grover search with verified-sample decisions.

    Runs floor(pi sqrt(N)/4) reflections; the reported success probability is
    the exact solution mass of the final state.  The decision draws ``shots``
    verified samples from both the final state and the uniform start (some
    solution counts make the fixed iteration count land on a zero of the
    rotation, so the k=0 samples keep false negatives negligible; false
    positives cannot occur because every candidate is oracle-checked).
    """
    n = oracle.n
    dim = 2**n
    k = grover_iterations(n)
    amps = np.full(dim, dim ** -0.5)
    sols = oracle.solutions()
    for _ in range(k):
        amps[sols] = -amps[sols]
        amps = 2.0 * amps.mean() - amps
    probs = np.abs(amps) ** 2
    probs = probs / probs.sum()
    p_success = float(probs[sols].sum()) if sols.size else 0.0

    rng = np.random.default_rng([rng_seed, n])
    candidates = list(rng.choice(dim, size=shots, p=probs))
    candidates += list(rng.integers(0, dim, size=shots))
    hit = None
    for c in candidates:
        if oracle(int(c)):
            hit = int(c)
            break
    return AlgorithmResult(
        decision=hit is not None,
        success_probability=p_success,
        resources={"gate_applications": k, "oracle_calls": k + 2 * shots,
                   "shots": 2 * shots},
        assignment=hit,
    )
