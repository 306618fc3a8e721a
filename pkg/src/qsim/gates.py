"""Non-standard gate primitives and their application semantics.

Each primitive carries its own normalization contract:

* the diagonal amplification gate ``g_gate`` and the constant gates evolve
  states without any renormalization (states may leave the unit sphere);
* ``measure_with_renorm`` is the single place where non-complete evolution is
  renormalized (immediately before reading out probabilities);
* ``post_select`` projects and renormalizes deterministically;
* the nonlinear OR/AND gates act per spectator subspace on a fixed case table
  and are not linear operators at all.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    ANNIHILATION_EPS,
    AnnihilationError,
    Completeness,
    DensityOperator,
    DimensionMismatchError,
    OperatorSet,
    PureState,
    apply_operator,
)

#: Relative tolerance when pattern-matching amplitude pairs in the nonlinear
#: case tables (sign and equal-magnitude checks).
PAIR_MATCH_RTOL = 1e-9

# Standard single- and two-qubit matrices used by the protocols.
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=np.complex128)


def phase_gate(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=np.complex128)


class NonlinearGateDomainError(ValueError):
    """Amplitude pattern in some spectator subspace matches no case-table row."""


class ZeroAmplitudeError(AnnihilationError):
    """Post-selection on an outcome that carries no amplitude."""


# ---------------------------------------------------------------------------
# gate constructors


def g_gate(epsilon: float, m: int = 1) -> np.ndarray:
    """diag(1, (1+epsilon)^m): non-complete diagonal amplification of |1>.

    ``m`` is the number of applications folded into one matrix; ``m=0`` gives
    the identity.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return np.diag([1.0, (1.0 + epsilon) ** m]).astype(np.complex128)


def constant_q2(phi: float = 0.0) -> np.ndarray:
    """Rank-1 constant gate on a qubit: rows [[1, e^{i phi}], [0, 0]]."""
    return np.array([[1.0, np.exp(1j * phi)], [0.0, 0.0]], dtype=np.complex128)


def constant_q3(phi1: float = 0.0, phi2: float = 0.0) -> np.ndarray:
    """Rank-1 constant gate on a qutrit."""
    out = np.zeros((3, 3), dtype=np.complex128)
    out[0] = [1.0, np.exp(1j * phi1), np.exp(1j * phi2)]
    return out


def postselect_matrix(dim: int) -> np.ndarray:
    """Rank-1 projector |0><0| (the renormalization is in post_select)."""
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[0, 0] = 1.0
    return out


def deleter_channel(dim: int) -> OperatorSet:
    """Complete dissipative channel mapping every basis state to |0>.

    The elements are |0><j| for j = 0..dim-1; the set is a partition of unity,
    so it is trace preserving and signals nothing, unlike the constant gates
    it superficially resembles.
    """
    if dim not in (2, 3):
        raise ValueError(f"deleter is defined for dim 2 or 3, got {dim}")
    els = []
    for j in range(dim):
        e = np.zeros((dim, dim), dtype=np.complex128)
        e[0, j] = 1.0
        els.append(e)
    return OperatorSet(els, completeness=Completeness.COMPLETE)


_GATE_KINDS = {
    "GGate": ("epsilon", "m"),
    "NonlinearOR": (),
    "NonlinearAND": (),
    "ConstantQ2": ("phi",),
    "ConstantQ3": ("phi1", "phi2"),
    "PostSelectQ2": (),
    "PostSelectQ3": (),
    "Deleter2": (),
    "Deleter3": (),
    "PNormMeasure": ("p",),
}


@dataclass(frozen=True)
class GateSpec:
    """Declarative description of a non-standard primitive.

    Serializes to the JSON object {"kind": ..., "params": {...}} used by CLI
    config files.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        allowed = set(_GATE_KINDS[self.kind])
        extra = set(self.params) - allowed
        if extra:
            raise ValueError(f"{self.kind} does not take params {sorted(extra)}")
        p = self.params
        if self.kind == "GGate":
            if p.get("epsilon", 1.0) <= 0:
                raise ValueError("GGate epsilon must be > 0")
            if p.get("m", 1) < 0:
                raise ValueError("GGate m must be >= 0")
        if self.kind == "PNormMeasure" and p.get("p", 2.0) < 0:
            raise ValueError("PNormMeasure p must be >= 0")
        for v in p.values():
            if not math.isfinite(v):
                raise ValueError(f"non-finite gate parameter in {p}")

    def matrix(self) -> np.ndarray:
        """Matrix form, for the kinds that have one."""
        p = self.params
        if self.kind == "GGate":
            return g_gate(p.get("epsilon", 1.0), int(p.get("m", 1)))
        if self.kind == "ConstantQ2":
            return constant_q2(p.get("phi", 0.0))
        if self.kind == "ConstantQ3":
            return constant_q3(p.get("phi1", 0.0), p.get("phi2", 0.0))
        if self.kind == "PostSelectQ2":
            return postselect_matrix(2)
        if self.kind == "PostSelectQ3":
            return postselect_matrix(3)
        raise ValueError(f"{self.kind} has no single-matrix form")

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "params": self.params}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str | dict) -> "GateSpec":
        obj = json.loads(text) if isinstance(text, str) else text
        return cls(kind=obj["kind"], params=dict(obj.get("params", {})))


def constant_gate(spec: GateSpec | str, **params) -> np.ndarray:
    """Constant-gate matrix from a GateSpec or a kind name plus params."""
    if isinstance(spec, str):
        spec = GateSpec(spec, params)
    if spec.kind not in ("ConstantQ2", "ConstantQ3"):
        raise ValueError(f"{spec.kind} is not a constant gate")
    return spec.matrix()


@dataclass(frozen=True)
class ConstantGateResult:
    """Output of a constant gate plus its raw detection weight.

    ``detection_weight`` is the squared norm of the mapped state.  It can
    exceed 1 when non-orthogonal branches add constructively; the raw value
    is reported and ``supra_normal`` flags that case rather than capping it.
    """

    state: PureState
    detection_weight: float
    supra_normal: bool


def apply_constant_gate(state: PureState, matrix: np.ndarray,
                        target: int) -> ConstantGateResult:
    out = apply_operator(state, matrix, [target])
    weight = out.norm ** 2
    return ConstantGateResult(out, weight, weight > 1.0 + 1e-12)


# ---------------------------------------------------------------------------
# measurements


@dataclass(frozen=True)
class MeasurementOutcome:
    outcome_index: int
    probability: float
    post_state: PureState | DensityOperator | None


def _target_components(state: PureState, targets: Sequence[int] | None,
                       basis: np.ndarray | None) -> tuple[np.ndarray, tuple[int, ...], int]:
    """Amplitudes reshaped to (outcome, rest) in the measurement basis."""
    if targets is None:
        targets = tuple(range(state.n_subsystems))
    tgt = tuple(int(t) for t in targets)
    d_t = math.prod(state.dims[t] for t in tgt)
    arr = state.amplitudes.reshape(state.dims)
    arr = np.moveaxis(arr, tgt, range(len(tgt))).reshape(d_t, -1)
    if basis is not None:
        basis = np.asarray(basis, dtype=np.complex128)
        if basis.shape != (d_t, d_t):
            raise DimensionMismatchError(
                f"basis shape {basis.shape} does not match target dim {d_t}")
        if np.abs(basis.conj().T @ basis - np.eye(d_t)).max() > 1e-10:
            raise ValueError("measurement basis is not orthonormal")
        arr = basis.conj().T @ arr
    return arr, tgt, d_t


def _collapse(state: PureState, arr: np.ndarray, tgt: tuple[int, ...],
              j: int, basis: np.ndarray | None) -> PureState:
    comp = np.zeros_like(arr)
    comp[j] = arr[j]
    if basis is not None:
        comp = np.asarray(basis, dtype=np.complex128) @ comp
    d_t = arr.shape[0]
    shape = tuple(state.dims[t] for t in tgt) + tuple(
        d for i, d in enumerate(state.dims) if i not in tgt)
    full = np.moveaxis(comp.reshape(shape), range(len(tgt)), tgt)
    return PureState(full.reshape(-1), state.dims, max_dim=state.dim).normalize()


def measure_with_renorm(state: PureState, targets: Sequence[int] | None = None,
                        basis: np.ndarray | None = None) -> list[MeasurementOutcome]:
    """Born-rule readout with explicit renormalization of the input.

    Probabilities are |component|^2 / total, so unnormalized states produced
    by non-complete evolution are renormalized here and only here.  Each
    outcome's post state is the (2-norm renormalized) projected state.
    """
    arr, tgt, d_t = _target_components(state, targets, basis)
    weights = np.abs(arr) ** 2
    totals = weights.sum(axis=1)
    total = totals.sum()
    if total <= ANNIHILATION_EPS:
        raise AnnihilationError("cannot measure a zero-norm state")
    outcomes = []
    for j in range(d_t):
        p = float(totals[j] / total)
        post = _collapse(state, arr, tgt, j, basis) if totals[j] > ANNIHILATION_EPS else None
        outcomes.append(MeasurementOutcome(j, p, post))
    return outcomes


def p_norm_measure(state: PureState, p: float,
                   targets: Sequence[int] | None = None,
                   basis: np.ndarray | None = None) -> list[MeasurementOutcome]:
    """Generalized |amplitude|^p / sum |amplitude|^p readout.

    ``p=2`` reproduces the standard rule exactly.  Convention for ``p=0``:
    0^0 := 0, so only outcomes with support count (amplitudes below a 1e-15
    relative floor are treated as zero).  Post states collapse by ordinary
    2-norm projection; only the probability rule is deformed.
    """
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    if abs(state.norm - 1.0) > 1e-10:
        raise ValueError("p-norm readout expects a 2-norm normalized state")
    arr, tgt, d_t = _target_components(state, targets, basis)
    mags = np.abs(arr)
    floor = 1e-15 * mags.max()
    support = mags > floor
    weights = np.where(support, mags, 1.0) ** p * support
    totals = weights.sum(axis=1)
    total = totals.sum()
    if total <= 0:
        raise AnnihilationError("state has no support in the measurement basis")
    outcomes = []
    for j in range(d_t):
        prob = float(totals[j] / total)
        post = _collapse(state, arr, tgt, j, basis) if support[j].any() else None
        outcomes.append(MeasurementOutcome(j, prob, post))
    return outcomes


def post_select(state: PureState, target: int, outcome: int) -> PureState:
    """Deterministic rank-1 projection of ``target`` onto ``outcome``.

    Unlike a constant gate this renormalizes, and unlike a measurement it
    carries no probability weighting; zero amplitude on the selected outcome
    is an error, not a branch.
    """
    tgt = int(target)
    if not 0 <= tgt < state.n_subsystems:
        raise DimensionMismatchError(f"target {target} out of range")
    d = state.dims[tgt]
    if not 0 <= outcome < d:
        raise DimensionMismatchError(f"outcome {outcome} out of range for dim {d}")
    proj = np.zeros((d, d), dtype=np.complex128)
    proj[outcome, outcome] = 1.0
    projected = apply_operator(state, proj, [tgt])
    if projected.norm ** 2 <= ANNIHILATION_EPS:
        raise ZeroAmplitudeError(
            f"no amplitude on outcome {outcome} of subsystem {tgt}")
    return projected.normalize()


# ---------------------------------------------------------------------------
# nonlinear OR / AND


def _apply_pairing(state: PureState, control: int, flag: int,
                   combine: str) -> PureState:
    """Rewrite the (control, flag) amplitudes per spectator subspace.

    Case table (``combine='or'``; the AND table is its Boolean dual):
    components with exactly one basis term are fixed; components with two
    equal-magnitude terms at distinct control values and relative phase +-1
    have both flags rewritten to OR(flag0, flag1), coefficients following
    their control branch.  Anything else is outside the gate's domain.
    """
    n = state.n_subsystems
    if control == flag:
        raise DimensionMismatchError("control and flag must differ")
    for t in (control, flag):
        if not 0 <= t < n:
            raise DimensionMismatchError(f"qubit index {t} out of range")
        if state.dims[t] != 2:
            raise DimensionMismatchError("nonlinear gates act on qubit subsystems")
    if not state.normalized:
        raise ValueError("nonlinear gates are defined on normalized states")

    arr = state.amplitudes.reshape(state.dims)
    arr = np.moveaxis(arr, (control, flag), (n - 2, n - 1))
    spect_shape = arr.shape[:-2]
    v = arr.reshape(-1, 4).copy()          # columns: (c,f) = 00, 01, 10, 11
    mags = np.abs(v)
    cutoff = 1e-12 * mags.max()
    nz = mags > cutoff
    counts = nz.sum(axis=1)

    if counts.max() > 2:
        bad = int(np.argmax(counts > 2))
        raise NonlinearGateDomainError(
            f"spectator subspace {bad} has {counts[bad]} basis terms; "
            "the case table covers at most two")

    rows = np.where(counts == 2)[0]
    if rows.size:
        order = np.argsort(~nz[rows], axis=1, kind="stable")
        i = order[:, 0]
        j = order[:, 1]
        a = v[rows, i]
        b = v[rows, j]
        scale = np.maximum(np.abs(a), np.abs(b))
        same_control = (i >> 1) == (j >> 1)
        if same_control.any():
            bad = rows[np.argmax(same_control)]
            raise NonlinearGateDomainError(
                f"spectator subspace {bad} superposes the flag at a single "
                "control value; no case-table row applies")
        phase_ok = np.minimum(np.abs(a - b), np.abs(a + b)) <= PAIR_MATCH_RTOL * scale
        if not phase_ok.all():
            bad = rows[np.argmax(~phase_ok)]
            raise NonlinearGateDomainError(
                f"spectator subspace {bad} has unequal magnitudes or a "
                "relative phase other than +-1")
        f_i = i & 1
        f_j = j & 1
        if combine == "or":
            new_f = f_i | f_j
        else:
            new_f = f_i & f_j
        out_rows = np.zeros((rows.size, 4), dtype=np.complex128)
        out_rows[np.arange(rows.size), ((i >> 1) << 1) | new_f] = a
        out_rows[np.arange(rows.size), ((j >> 1) << 1) | new_f] += b
        v[rows] = out_rows

    # single-term and empty subspaces are fixed points (basis-state row)
    out = v.reshape(spect_shape + (2, 2))
    out = np.moveaxis(out, (n - 2, n - 1), (control, flag))
    return PureState(out.reshape(-1), state.dims, max_dim=state.dim)


def apply_nonlinear_or(state: PureState, control: int, flag: int) -> PureState:
    """Nonlinear OR: in each spectator subspace the flag becomes the OR of
    the two paired branches' flags (see the module case table)."""
    return _apply_pairing(state, control, flag, "or")


def apply_nonlinear_and(state: PureState, control: int, flag: int) -> PureState:
    """Boolean dual of the nonlinear OR: the flag becomes the AND of the two
    paired branches' flags.  The dual case table, row for row:

        |11> +- |00>  ->  |10> +- |00>
        |10> +- |01>  ->  |10> +- |00>
        |10> +- |00>  ->  |10> +- |00>   (fixed)
        |11> +- |01>  ->  |11> +- |01>   (fixed)
        |ab>          ->  |ab>
    """
    return _apply_pairing(state, control, flag, "and")
