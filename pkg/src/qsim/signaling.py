"""End-to-end Alice/Bob signaling experiments.

Every protocol returns a :class:`SignalReport` holding Bob's reduced state
under each of Alice's two choices plus distinguishability metrics (trace
distance and the Holevo quantity of the equal-prior two-state ensemble).
All randomized protocols derive per-trial generators from
``(seed, stream indices)`` so results are reproducible and order independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Completeness,
    DensityOperator,
    Ensemble,
    OperatorSet,
    PureState,
    apply_channel,
    haar_unitary,
    holevo_chi,
    partial_trace,
    random_complete_channel,
    random_pure_state,
    reduced_density,
    trace_distance,
)
from .gates import (
    CNOT,
    HADAMARD,
    apply_nonlinear_or,
    apply_operator,
    constant_q2,
    constant_q3,
    g_gate,
    measure_with_renorm,
    p_norm_measure,
)

BELL_PHI_PLUS = PureState([1, 0, 0, 1] / np.sqrt(2.0), (2, 2))


@dataclass(frozen=True)
class SignalReport:
    """Bob's two remotely prepared states and how distinguishable they are."""

    label: str
    rho_choice0: DensityOperator
    rho_choice1: DensityOperator
    trace_dist: float
    holevo_bits: float
    per_trial_stats: list | None = None
    details: dict = field(default_factory=dict)


def _report(label: str, rho0: DensityOperator, rho1: DensityOperator,
            per_trial_stats=None, **details) -> SignalReport:
    ens = Ensemble([(0.5, rho0), (0.5, rho1)])
    return SignalReport(
        label=label,
        rho_choice0=rho0,
        rho_choice1=rho1,
        trace_dist=trace_distance(rho0, rho1),
        holevo_bits=holevo_chi(ens),
        per_trial_stats=per_trial_stats,
        details=dict(details),
    )


def _bob_state_with_renorm(joint: PureState) -> DensityOperator:
    """Bob's reduced state of a possibly unnormalized joint pure state."""
    rho = reduced_density(joint, keep=[1])
    t = rho.trace
    return DensityOperator(rho.matrix / t, rho.dims)


# ---------------------------------------------------------------------------
# non-complete diagonal amplification


def run_g_signal(epsilon: float, m: int,
                 shared_state: PureState | None = None) -> SignalReport:
    """Alice applies the amplification gate m times, or does nothing.

    With the default shared state (|00>+|11>)/sqrt(2), Bob's conditioned
    state is diag(1, (1+eps)^{2m}) / (1 + (1+eps)^{2m}); the trace distance
    grows monotonically with m.
    """
    shared = shared_state if shared_state is not None else BELL_PHI_PLUS
    if shared.dims != (2, 2):
        raise ValueError("g-signal protocol runs on a two-qubit shared state")
    rho0 = _bob_state_with_renorm(shared)
    amplified = apply_operator(shared, g_gate(epsilon, m), [0])
    rho1 = _bob_state_with_renorm(amplified)
    k = (1.0 + epsilon) ** (2 * m)
    return _report(
        "g-signal", rho0, rho1,
        epsilon=epsilon, m=m,
        amplification=k,
        closed_form_p1=k / (1.0 + k),
        raw_norm_sq=amplified.norm ** 2,
    )


def run_single_particle_context(theta: float, epsilon: float,
                                m: int) -> tuple[float, float]:
    """Probability of |0> on a delocalized qubit before/after amplification.

    Returns the simulated values; the closed form for the after-probability
    is cos^2(t/2) / (cos^2(t/2) + (1+eps)^{2m} sin^2(t/2)).
    """
    if not 0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    state = PureState([math.cos(theta / 2), math.sin(theta / 2)], (2,))
    p_before = measure_with_renorm(state)[0].probability
    after = apply_operator(state, g_gate(epsilon, m), [0])
    p_after = measure_with_renorm(after)[0].probability
    return p_before, p_after


# ---------------------------------------------------------------------------
# nonlinear OR


def _bob_branch_p1(bob_state: np.ndarray) -> tuple[float, PureState]:
    """Bob's ancilla protocol on one branch: CNOT, nonlinear OR, read ancilla.

    Returns P(ancilla=1) and the post-gate (system, ancilla) state.
    """
    joint = PureState(np.kron(bob_state, [1.0, 0.0]), (2, 2))
    joint = apply_operator(joint, CNOT, [0, 1])
    joint = apply_nonlinear_or(joint, control=0, flag=1)
    p1 = measure_with_renorm(joint, targets=[1])[1].probability
    return p1, joint


_R_BRANCHES = {
    "computational": [np.array([1.0, 0.0]), np.array([0.0, 1.0])],
    "diagonal": [np.array([1.0, 1.0]) / np.sqrt(2.0),
                 np.array([1.0, -1.0]) / np.sqrt(2.0)],
}


def run_r_signal(n_trials: int, rng_seed: int = 0) -> SignalReport:
    """Ensemble discrimination through the nonlinear OR gate.

    Alice measures her half of (|00>-|11>)/sqrt(2) in the computational or
    the diagonal basis, leaving Bob's qubit in one of two ensembles that are
    equivalent in standard theory.  Bob's CNOT + nonlinear OR + ancilla
    readout yields 1 with probability 1/2 (computational) vs 1 (diagonal).
    Empirical frequencies over ``n_trials`` per choice are recorded; each
    trial draws from its own (seed, choice, trial) stream.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    analytic = {}
    averaged = {}
    branch_p1 = {}
    for name, branches in _R_BRANCHES.items():
        probs = []
        post_mats = []
        for branch in branches:
            p1, post = _bob_branch_p1(branch)
            probs.append(p1)
            post_mats.append(post.density().matrix)
        branch_p1[name] = probs
        analytic[name] = float(np.mean(probs))
        averaged[name] = DensityOperator(0.5 * (post_mats[0] + post_mats[1]), (2, 2))

    trials = []
    freq = {}
    for choice, name in enumerate(("computational", "diagonal")):
        ones = 0
        for t in range(n_trials):
            rng = np.random.default_rng([rng_seed, choice, t])
            alice = int(rng.random() < 0.5)
            p1 = branch_p1[name][alice]
            ancilla = int(rng.random() < p1)
            ones += ancilla
            trials.append({"ensemble": name, "trial": t,
                           "alice_outcome": alice, "ancilla": ancilla})
        freq[name] = ones / n_trials

    return _report(
        "r-signal",
        averaged["computational"], averaged["diagonal"],
        per_trial_stats=trials,
        n_trials=n_trials,
        rng_seed=rng_seed,
        analytic_p1_computational=analytic["computational"],
        analytic_p1_diagonal=analytic["diagonal"],
        empirical_p1_computational=freq["computational"],
        empirical_p1_diagonal=freq["diagonal"],
    )


def r_signal_discrimination_error(m_values, n_reps: int, rng_seed: int = 0) -> dict[int, float]:
    """Empirical error of the m-trial all-ones discriminator.

    Bob declares "diagonal" when all m ancilla readouts are 1.  On the
    computational ensemble each readout is 1 with probability 1/2, so the
    error decays as 2^-m; the returned empirical rates let a fit confirm the
    exponential law.
    """
    out = {}
    for m in m_values:
        errors = 0
        for rep in range(n_reps):
            rng = np.random.default_rng([rng_seed, m, rep])
            # computational ensemble: every readout is Bernoulli(1/2)
            if all(rng.random() < 0.5 for _ in range(m)):
                errors += 1
        out[int(m)] = errors / n_reps
    return out


# ---------------------------------------------------------------------------
# deformed Born rule


def _pnorm_bob_ensemble(joint: PureState, alice_targets: list[int], p: float) -> DensityOperator:
    """Bob's average state when Alice reads her registers with the p rule."""
    outcomes = p_norm_measure(joint, p, targets=alice_targets)
    bob_index = [i for i in range(joint.n_subsystems) if i not in alice_targets]
    mat = None
    for oc in outcomes:
        if oc.post_state is None or oc.probability == 0.0:
            continue
        rho_b = reduced_density(oc.post_state, keep=bob_index)
        term = oc.probability * rho_b.matrix
        mat = term if mat is None else mat + term
    return DensityOperator(mat, tuple(joint.dims[i] for i in bob_index))


def run_pnorm_signal(theta: float, p: float) -> SignalReport:
    """Two of Alice's measurement procedures that agree only at p = 2.

    Procedure 0: direct readout of her half of cos(t)|00> + sin(t)|11>.
    Procedure 1: adjoin an ancilla, Hadamard it when her qubit is |0>, then
    read both of her registers.  Under the |amp|^p rule Bob is left in
    different states unless p = 2.
    """
    if not 0 < theta < math.pi / 2:
        raise ValueError("theta must lie strictly inside (0, pi/2)")
    if p < 0:
        raise ValueError("p must be >= 0")
    c, s = math.cos(theta), math.sin(theta)
    direct = PureState([c, 0, 0, s], (2, 2))
    rho1 = _pnorm_bob_ensemble(direct, alice_targets=[0], p=p)

    # (Alice, Bob, ancilla); Hadamard on the ancilla controlled on Alice=|0>
    with_ancilla = PureState(np.kron([c, 0, 0, s], [1.0, 0.0]), (2, 2, 2))
    ctrl_h = np.eye(8, dtype=np.complex128)
    ctrl_h[0:2, 0:2] = HADAMARD
    ctrl_h[2:4, 2:4] = HADAMARD
    with_ancilla = apply_operator(with_ancilla, ctrl_h, [0, 1, 2])
    rho2 = _pnorm_bob_ensemble(with_ancilla, alice_targets=[0, 2], p=p)

    cp, sp = c ** p, s ** p
    w = 2.0 ** (1.0 - p / 2.0)
    return _report(
        "pnorm-signal", rho1, rho2,
        theta=theta, p=p,
        closed_form_direct_p0=cp / (cp + sp),
        closed_form_ancilla_p0=w * cp / (w * cp + sp),
    )


# ---------------------------------------------------------------------------
# constant gates


def run_constant_signal(variant: str = "qubit") -> SignalReport:
    """Alice applies a constant gate to her half of an entangled pair, or not.

    Qubit variant: shared (|01>+|10>)/sqrt(2); applying the gate leaves Bob
    pure in (|0>+|1>)/sqrt(2) while doing nothing leaves him maximally mixed.
    The ensemble carries about 0.31 bits (binary entropy H(3/4) - 1/2).
    Qutrit variant: shared (|11>+|22>)/sqrt(2) with the 3-level gate.
    """
    if variant == "qubit":
        shared = PureState([0, 1, 1, 0] / np.sqrt(2.0), (2, 2))
        gate = constant_q2(0.0)
    elif variant == "qutrit":
        amps = np.zeros(9)
        amps[1 * 3 + 1] = amps[2 * 3 + 2] = 1 / np.sqrt(2.0)
        shared = PureState(amps, (3, 3))
        gate = constant_q3(0.0, 0.0)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    rho0 = _bob_state_with_renorm(shared)
    mapped = apply_operator(shared, gate, [0])
    rho1 = _bob_state_with_renorm(mapped)
    return _report(f"constant-signal-{variant}", rho0, rho1,
                   variant=variant, mapped_norm_sq=mapped.norm ** 2)


# ---------------------------------------------------------------------------
# the no-signaling theorem, numerically


def bob_shift_under_channel(shared: PureState, ops: OperatorSet) -> float:
    """Trace-distance change of Bob's reduced state when the set acts on Alice."""
    before = _bob_state_with_renorm(shared)
    after, _ = apply_channel(shared.density(), ops, targets=[0])
    return trace_distance(before, partial_trace(after, keep=[1]))


def no_signaling_sweep(n_channels: int, rng_seed: int = 0,
                       kind: str = "dilation") -> float:
    """Max Bob-side disturbance over random complete operations on Alice.

    ``kind='dilation'`` samples Haar-random complete channels (isometric
    dilation, environment twice the system); ``kind='unitary'`` samples Haar
    unitaries.  Both must leave Bob's reduced state fixed up to float noise.
    """
    if n_channels < 1:
        raise ValueError("n_channels must be >= 1")
    if kind not in ("dilation", "unitary"):
        raise ValueError(f"unknown sweep kind {kind!r}")
    worst = 0.0
    for i in range(n_channels):
        rng = np.random.default_rng([rng_seed, i])
        shared = random_pure_state((2, 2), rng)
        if kind == "dilation":
            ops = random_complete_channel(2, rng)
        else:
            ops = OperatorSet([haar_unitary(2, rng)],
                              completeness=Completeness.COMPLETE)
        worst = max(worst, bob_shift_under_channel(shared, ops))
    return worst
