"""Dense exact linear algebra for pure states, density operators and channels.

States live on an indexed tensor product of finite-dimensional subsystems.
Subsystem 0 is the leftmost tensor factor (big-endian), so for two qubits the
basis index of |ab> is 2*a + b.

Unnormalized states are first class: non-complete operator sets produce them,
and nothing here renormalizes implicitly.  Renormalization happens only where
an operation's contract says so (channels divide by the output trace; the
measurement routines in :mod:`qsim.gates` renormalize by construction).

Everything is a pure function of immutable value objects; arrays are copied on
construction and marked read-only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: Hard cap on the total Hilbert-space dimension (product of subsystem dims).
#: All constructions in this package are tiny; the cap catches runaway tensor
#: products early.  Constructors accept ``max_dim`` to override per object.
DEFAULT_MAX_DIM = 2**14

#: Tolerance hierarchy: state invariants, completeness defect, patterns.
STATE_ATOL = 1e-12
COMPLETENESS_ATOL = 1e-10

#: Below this total weight a mapped state counts as annihilated.
ANNIHILATION_EPS = 1e-15


class DimensionMismatchError(ValueError):
    """Shapes, subsystem dimensions or target indices do not line up."""


class AnnihilationError(ValueError):
    """An operation mapped the state to (numerically) the zero vector."""


class Completeness(enum.Enum):
    COMPLETE = "complete"
    NON_COMPLETE = "non_complete"
    UNCHECKED = "unchecked"


def _as_dims(dims: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out or any(d < 1 for d in out):
        raise DimensionMismatchError(f"invalid subsystem dims {dims!r}")
    return out


def _check_targets(targets: Sequence[int], n_subsystems: int) -> tuple[int, ...]:
    tgt = tuple(int(t) for t in targets)
    if len(set(tgt)) != len(tgt):
        raise DimensionMismatchError(f"duplicate targets {targets!r}")
    for t in tgt:
        if not 0 <= t < n_subsystems:
            raise DimensionMismatchError(
                f"target {t} out of range for {n_subsystems} subsystems")
    return tgt


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over a tensor product of subsystems.

    Parameters
    ----------
    amplitudes : 1-D complex array, length ``prod(dims)``.
    dims : per-subsystem dimensions, subsystem 0 leftmost.
    """

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, amplitudes, dims: Sequence[int], max_dim: int | None = None):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        d = _as_dims(dims)
        total = math.prod(d)
        if total > (max_dim or DEFAULT_MAX_DIM):
            raise DimensionMismatchError(
                f"total dimension {total} exceeds cap {max_dim or DEFAULT_MAX_DIM}")
        if amps.size != total:
            raise DimensionMismatchError(
                f"{amps.size} amplitudes for dims {d} (need {total})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", d)

    @classmethod
    def qubits(cls, amplitudes) -> "PureState":
        """State of k qubits inferred from the amplitude count (2**k)."""
        amps = np.asarray(amplitudes).reshape(-1)
        k = int(amps.size).bit_length() - 1
        if 2**k != amps.size:
            raise DimensionMismatchError(f"{amps.size} amplitudes is not a qubit register")
        return cls(amps, (2,) * k)

    @classmethod
    def basis(cls, dims: Sequence[int], index: int) -> "PureState":
        d = _as_dims(dims)
        amps = np.zeros(math.prod(d), dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, d)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def normalized(self) -> bool:
        return abs(self.norm - 1.0) <= STATE_ATOL

    def normalize(self) -> "PureState":
        n = self.norm
        if n <= ANNIHILATION_EPS:
            raise AnnihilationError("cannot normalize a zero state")
        return PureState(self.amplitudes / n, self.dims, max_dim=self.dim)

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(np.kron(self.amplitudes, other.amplitudes),
                         self.dims + other.dims)

    def density(self, unnormalized: bool | None = None) -> "DensityOperator":
        mat = np.outer(self.amplitudes, self.amplitudes.conj())
        if unnormalized is None:
            unnormalized = not self.normalized
        return DensityOperator(mat, self.dims, unnormalized=unnormalized)

    def overlap(self, other: "PureState") -> complex:
        if self.dims != other.dims:
            raise DimensionMismatchError("overlap of states with different dims")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian positive matrix over an indexed tensor-product space."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    unnormalized: bool = False

    def __init__(self, matrix, dims: Sequence[int], unnormalized: bool = False,
                 max_dim: int | None = None):
        mat = np.array(matrix, dtype=np.complex128)
        d = _as_dims(dims)
        total = math.prod(d)
        if total > (max_dim or DEFAULT_MAX_DIM):
            raise DimensionMismatchError(
                f"total dimension {total} exceeds cap {max_dim or DEFAULT_MAX_DIM}")
        if mat.shape != (total, total):
            raise DimensionMismatchError(f"matrix shape {mat.shape} for dims {d}")
        if np.abs(mat - mat.conj().T).max() > STATE_ATOL:
            raise DimensionMismatchError("matrix is not Hermitian within 1e-12")
        evals = np.linalg.eigvalsh(mat)
        if evals.min() < -STATE_ATOL * max(1.0, float(evals.max())):
            raise DimensionMismatchError(
                f"matrix has negative eigenvalue {evals.min():.3e}")
        if not unnormalized and abs(np.trace(mat).real - 1.0) > STATE_ATOL:
            raise DimensionMismatchError(
                f"trace {np.trace(mat).real!r} != 1 for a normalized operator")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", d)
        object.__setattr__(self, "unnormalized", bool(unnormalized))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityOperator":
        d = math.prod(_as_dims(dims))
        return cls(np.eye(d) / d, dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalize(self) -> "DensityOperator":
        t = self.trace
        if t <= ANNIHILATION_EPS:
            raise AnnihilationError("cannot normalize a zero-trace operator")
        return DensityOperator(self.matrix / t, self.dims)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class OperatorSet:
    """A set of operator (Kraus) elements sharing input/output dimensions."""

    elements: tuple[np.ndarray, ...]
    input_dim: int
    output_dim: int
    completeness: Completeness = Completeness.UNCHECKED

    def __init__(self, elements: Iterable, completeness: Completeness = Completeness.UNCHECKED):
        els = tuple(np.array(e, dtype=np.complex128) for e in elements)
        if not els:
            raise DimensionMismatchError("empty operator set")
        out_d, in_d = els[0].shape
        for e in els:
            if e.ndim != 2 or e.shape != (out_d, in_d):
                raise DimensionMismatchError("operator elements must share one shape")
            e.flags.writeable = False
        if completeness is Completeness.COMPLETE:
            defect = completeness_defect(els)
            if defect >= COMPLETENESS_ATOL:
                raise DimensionMismatchError(
                    f"set tagged complete but defect is {defect:.3e}")
        object.__setattr__(self, "elements", els)
        object.__setattr__(self, "input_dim", int(in_d))
        object.__setattr__(self, "output_dim", int(out_d))
        object.__setattr__(self, "completeness", completeness)


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted mixture of density operators."""

    members: tuple[tuple[float, DensityOperator], ...]

    def __init__(self, members: Iterable[tuple[float, DensityOperator]]):
        mem = tuple((float(p), rho) for p, rho in members)
        if not mem:
            raise ValueError("empty ensemble")
        for p, _ in mem:
            if not -STATE_ATOL <= p <= 1 + STATE_ATOL:
                raise ValueError(f"probability {p} outside [0, 1]")
        total = sum(p for p, _ in mem)
        if abs(total - 1.0) > STATE_ATOL:
            raise ValueError(f"ensemble probabilities sum to {total}, not 1")
        dims = mem[0][1].dims
        for _, rho in mem:
            if rho.dims != dims:
                raise DimensionMismatchError("ensemble members on different spaces")
        object.__setattr__(self, "members", mem)

    def average(self) -> DensityOperator:
        mat = sum(p * rho.matrix for p, rho in self.members)
        return DensityOperator(mat, self.members[0][1].dims)


# ---------------------------------------------------------------------------
# operator application


def apply_operator(state: PureState, op, targets: Sequence[int]) -> PureState:
    """Apply ``op`` on the target subsystems, identity elsewhere.

    No renormalization is performed; the result may be unnormalized (or even
    supra-normalized) when ``op`` is not an isometry.  A rectangular ``op``
    (output dim != input dim) is allowed for a single target and replaces that
    subsystem's dimension.
    """
    op = np.asarray(op, dtype=np.complex128)
    if op.ndim != 2:
        raise DimensionMismatchError("operator must be a matrix")
    tgt = _check_targets(targets, state.n_subsystems)
    in_dims = tuple(state.dims[t] for t in tgt)
    d_in = math.prod(in_dims)
    if op.shape[1] != d_in:
        raise DimensionMismatchError(
            f"operator input dim {op.shape[1]} != product of target dims {d_in}")
    if op.shape[0] == op.shape[1]:
        out_dims = in_dims
    elif len(tgt) == 1:
        out_dims = (op.shape[0],)
    else:
        raise DimensionMismatchError(
            "rectangular operators are supported on a single target only")

    arr = state.amplitudes.reshape(state.dims)
    arr = np.moveaxis(arr, tgt, range(len(tgt)))
    rest_shape = arr.shape[len(tgt):]
    arr = op @ arr.reshape(d_in, -1)
    arr = arr.reshape(out_dims + rest_shape)
    arr = np.moveaxis(arr, range(len(tgt)), tgt)

    new_dims = list(state.dims)
    for t, d in zip(tgt, out_dims):
        new_dims[t] = d
    return PureState(arr.reshape(-1), new_dims, max_dim=math.prod(new_dims))


def embed_operator(op, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Full-space matrix of ``op`` on ``targets`` tensored with identities."""
    op = np.asarray(op, dtype=np.complex128)
    dims = _as_dims(dims)
    tgt = _check_targets(targets, len(dims))
    d_total = math.prod(dims)
    basis = np.eye(d_total, dtype=np.complex128)
    cols = [apply_operator(PureState(basis[:, k], dims, max_dim=d_total), op, tgt).amplitudes
            for k in range(d_total)]
    return np.stack(cols, axis=1)


def partial_trace(rho: DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Trace out every subsystem not in ``keep`` (kept in the given order)."""
    if not len(keep):
        raise DimensionMismatchError("keep must be non-empty")
    kp = _check_targets(keep, len(rho.dims))
    n = len(rho.dims)
    arr = rho.matrix.reshape(rho.dims + rho.dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = [letters[n + i] if i in kp else letters[i] for i in range(n)]
    out = "".join(letters[i] for i in kp) + "".join(letters[n + i] for i in kp)
    mat = np.einsum("".join(row) + "".join(col) + "->" + out, arr)
    d_keep = math.prod(rho.dims[i] for i in kp)
    return DensityOperator(mat.reshape(d_keep, d_keep),
                           tuple(rho.dims[i] for i in kp),
                           unnormalized=rho.unnormalized)


def reduced_density(state: PureState, keep: Sequence[int]) -> DensityOperator:
    """Reduced density operator of a pure state without forming |psi><psi|."""
    kp = _check_targets(keep, state.n_subsystems)
    if not kp:
        raise DimensionMismatchError("keep must be non-empty")
    arr = state.amplitudes.reshape(state.dims)
    arr = np.moveaxis(arr, kp, range(len(kp)))
    d_keep = math.prod(state.dims[i] for i in kp)
    m = arr.reshape(d_keep, -1)
    return DensityOperator(m @ m.conj().T, tuple(state.dims[i] for i in kp),
                           unnormalized=not state.normalized)


def apply_channel(rho: DensityOperator, ops: OperatorSet,
                  targets: Sequence[int]) -> tuple[DensityOperator, float]:
    """Apply the operator-sum map on ``targets``; return (state/norm, norm).

    The returned norm is the trace of the unnormalized map output.  For a
    complete set it equals the input trace; for a non-complete set it carries
    the (nonlinear) renormalization factor.
    """
    tgt = _check_targets(targets, len(rho.dims))
    in_dims = tuple(rho.dims[t] for t in tgt)
    if math.prod(in_dims) != ops.input_dim:
        raise DimensionMismatchError(
            f"operator set input dim {ops.input_dim} != target dims {in_dims}")
    if ops.output_dim != ops.input_dim and len(tgt) != 1:
        raise DimensionMismatchError(
            "rectangular operator sets are supported on a single target only")
    out = None
    new_dims = list(rho.dims)
    if ops.output_dim != ops.input_dim:
        new_dims[tgt[0]] = ops.output_dim
    for e in ops.elements:
        full = embed_operator(e, rho.dims, tgt)
        term = full @ rho.matrix @ full.conj().T
        out = term if out is None else out + term
    norm = float(np.trace(out).real)
    if norm <= ANNIHILATION_EPS:
        raise AnnihilationError(f"channel annihilated the state (trace {norm:.3e})")
    return DensityOperator(out / norm, new_dims), norm


# ---------------------------------------------------------------------------
# metrics


def trace_distance(a: DensityOperator, b: DensityOperator) -> float:
    """Half the trace norm of a - b; in [0, 1] for unit-trace operators."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dims differ: {a.dims} vs {b.dims}")
    evals = np.linalg.eigvalsh(a.matrix - b.matrix)
    return float(0.5 * np.abs(evals).sum())


def von_neumann_entropy(rho: DensityOperator, base: float = 2.0) -> float:
    """Spectral entropy with eigenvalues clipped at 0 (avoids log of -1e-16)."""
    evals = np.clip(rho.eigenvalues(), 0.0, None)
    evals = evals[evals > 0]
    return float(-(evals * np.log(evals)).sum() / np.log(base))


def holevo_chi(ensemble: Ensemble) -> float:
    """Holevo quantity S(avg) - sum_i p_i S(rho_i), in bits."""
    avg = von_neumann_entropy(ensemble.average())
    cond = sum(p * von_neumann_entropy(rho) for p, rho in ensemble.members)
    return float(avg - cond)


def completeness_defect(elements: Iterable[np.ndarray]) -> float:
    """Max-entry deviation of sum_j e_j^dag e_j from the identity."""
    els = list(elements)
    s = sum(e.conj().T @ e for e in els)
    return float(np.abs(s - np.eye(s.shape[0])).max())


def check_completeness(ops: OperatorSet) -> tuple[Completeness, float]:
    """Classify an operator set as a partition of unity or not."""
    defect = completeness_defect(ops.elements)
    status = Completeness.COMPLETE if defect < COMPLETENESS_ATOL else Completeness.NON_COMPLETE
    return status, defect


# ---------------------------------------------------------------------------
# random sampling (structural inputs for sweeps and property tests)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_pure_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    d = math.prod(_as_dims(dims))
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(z / np.linalg.norm(z), dims)


def random_density(dims: Sequence[int], rng: np.random.Generator,
                   rank: int | None = None) -> DensityOperator:
    d = math.prod(_as_dims(dims))
    r = rank or d
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    mat = g @ g.conj().T
    return DensityOperator(mat / np.trace(mat).real, dims)


def random_complete_channel(dim: int, rng: np.random.Generator,
                            env_dim: int = 2) -> OperatorSet:
    """Haar-random complete channel via an isometric dilation.

    The isometry is the first ``dim`` columns of a Haar unitary on a space
    ``env_dim`` times larger; its row blocks are the operator elements, so
    sum_j e_j^dag e_j = V^dag V = I by construction.
    """
    v = haar_unitary(dim * env_dim, rng)[:, :dim]
    els = [v[j * dim:(j + 1) * dim, :] for j in range(env_dim)]
    return OperatorSet(els, completeness=Completeness.COMPLETE)
