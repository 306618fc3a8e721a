"""Six-mode two-photon model of a double-slit experiment with remote analysis.

The source emits one signal/idler pair into six paired directions.  Modes are
numbered 1..6 (0-based internally): parallel pairs (1,4), (2,5), (3,6), the
(2,5) pair horizontal.  Modes 1-3 reach the upper slit, 4-6 the lower slit.

Geometry enters only through a phase map: a mode through the upper slit picks
up exp(+i gamma(z)/2) at screen coordinate z, through the lower slit
exp(-i gamma(z)/2), with gamma(z) = 2 pi * slit_separation * z /
(wavelength * screen_distance) — the standard small-angle double-slit phase
difference.  Source-to-slit path lengths are equal for a parallel pair and
taken equal across pairs (symmetric layout), so they drop out as global
phases.  Detection-point phase offsets on Alice's focal plane are carried by
two configurable constants; the defaults place the three canonical points'
fringe shifts at 0, 2pi/3, 4pi/3 so their uniform mixture is exactly flat,
the discrete stand-in for averaging over the whole illuminated plane.

Two-photon amplitudes are a 6 x d matrix psi[signal_mode, idler_mode] (the
idler side grows sink modes behind the direction filter).  Field operators
are annihilation-coefficient vectors, so a coincidence amplitude is the
bilinear form alice . psi . bob(z) and a singles rate is ||psi . bob(z)||^2.
Reported intensities carry these raw model units; closed forms are stated up
to proportionality, so comparisons normalize by the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Completeness,
    DensityOperator,
    DimensionMismatchError,
    OperatorSet,
    PureState,
    reduced_density,
    trace_distance,
)
from .gates import CNOT

N_MODES = 6
#: 0-based mode index sets: upper-slit modes, lower-slit modes, horizontal pair.
UPPER_SLIT_MODES = (0, 1, 2)
LOWER_SLIT_MODES = (3, 4, 5)
HORIZONTAL_PAIR = (1, 4)          # modes 2 and 5, 1-based
ALICE_POINTS = ("f", "f1", "f2", "l", "m")


@dataclass(frozen=True)
class OpticsConfig:
    """Geometry and strength parameters of the two-photon setup."""

    wavelength: float = 702e-9
    slit_separation: float = 100e-6
    screen_distance: float = 1.0
    filter_aperture: float = 50e-6
    filter_focal_length: float = 1.0
    imaging_focal_length: float = 0.25
    spreading_angle: float = 0.0
    pump_strength: float = 0.01
    omega_14: float = 2.0 * math.pi / 3.0
    omega_36: float = 4.0 * math.pi / 3.0
    z_grid: np.ndarray | None = None
    fringe_periods: int = 20
    points_per_period: int = 64

    def __post_init__(self):
        for name in ("wavelength", "slit_separation", "screen_distance",
                     "filter_aperture", "filter_focal_length",
                     "imaging_focal_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 <= self.pump_strength < 0.1:
            raise ValueError("pump_strength must lie in [0, 0.1)")
        if not 0 <= self.spreading_angle <= math.pi / 2:
            raise ValueError("spreading_angle must lie in [0, pi/2]")
        if self.z_grid is None:
            object.__setattr__(self, "z_grid", self.default_grid())
        else:
            grid = np.array(self.z_grid, dtype=float)
            if grid.ndim != 1 or grid.size < 2 or (np.diff(grid) <= 0).any():
                raise ValueError("z_grid must be a sorted 1-D coordinate array")
            grid.flags.writeable = False
            object.__setattr__(self, "z_grid", grid)

    @property
    def fringe_period(self) -> float:
        """Screen-coordinate period of the double-slit fringe."""
        return self.wavelength * self.screen_distance / self.slit_separation

    def default_grid(self) -> np.ndarray:
        """Symmetric grid covering whole fringe periods, extremes included."""
        half = self.fringe_periods / 2.0
        n_pts = self.fringe_periods * self.points_per_period + 1
        grid = np.linspace(-half * self.fringe_period, half * self.fringe_period, n_pts)
        grid.flags.writeable = False
        return grid

    def gamma(self, z) -> np.ndarray:
        """Double-slit phase difference at screen coordinate(s) z."""
        k = 2.0 * math.pi / self.wavelength
        return k * self.slit_separation * np.asarray(z, dtype=float) / self.screen_distance


@dataclass(frozen=True)
class ModeState:
    """Two-photon amplitude matrix over (signal mode, idler mode) pairs.

    The vacuum term is dropped; rates carry the pump amplitude only as the
    symbolic overall factor recorded in ``pump_strength``.
    """

    amps: np.ndarray
    pump_strength: float
    idler_labels: tuple[str, ...]

    def __init__(self, amps, pump_strength: float, idler_labels=None):
        mat = np.array(amps, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != N_MODES:
            raise DimensionMismatchError(f"amplitude matrix shape {mat.shape}")
        if not np.isfinite(mat).all():
            raise ValueError("non-finite mode amplitudes")
        if idler_labels is None:
            idler_labels = tuple(str(j + 1) for j in range(mat.shape[1]))
        if len(idler_labels) != mat.shape[1]:
            raise DimensionMismatchError("one label per idler mode required")
        mat.flags.writeable = False
        object.__setattr__(self, "amps", mat)
        object.__setattr__(self, "pump_strength", float(pump_strength))
        object.__setattr__(self, "idler_labels", tuple(idler_labels))

    @property
    def idler_dim(self) -> int:
        return self.amps.shape[1]

    def signal_reduced(self) -> DensityOperator:
        rho = self.amps @ self.amps.conj().T
        return DensityOperator(rho / np.trace(rho).real, (N_MODES,))

    def idler_reduced(self) -> DensityOperator:
        rho = self.amps.conj().T @ self.amps
        return DensityOperator(rho / np.trace(rho).real, (self.idler_dim,))

    def project_idler_modes(self, modes) -> "ModeState":
        """Keep only the given idler columns (state left unrenormalized)."""
        keep = np.zeros(self.idler_dim)
        keep[list(modes)] = 1.0
        return ModeState(self.amps * keep, self.pump_strength, self.idler_labels)


@dataclass(frozen=True)
class Pattern:
    """Screen pattern: intensity over z plus the fringe visibility."""

    z: np.ndarray
    intensity: np.ndarray
    label: str
    visibility: float = field(init=False)

    def __init__(self, z, intensity, label: str):
        z = np.asarray(z, dtype=float)
        intensity = np.asarray(intensity, dtype=float)
        if z.shape != intensity.shape or z.ndim != 1:
            raise DimensionMismatchError("z and intensity must be equal-length 1-D")
        if intensity.min() < -1e-12 * max(1.0, intensity.max()):
            raise ValueError("negative intensity")
        z = z.copy()
        intensity = np.clip(intensity, 0.0, None)
        z.flags.writeable = False
        intensity.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "label", str(label))
        hi, lo = float(intensity.max()), float(intensity.min())
        vis = 0.0 if hi + lo == 0 else (hi - lo) / (hi + lo)
        object.__setattr__(self, "visibility", vis)

    def mean_normalized(self) -> np.ndarray:
        m = self.intensity.mean()
        return self.intensity / m if m > 0 else self.intensity.copy()


# ---------------------------------------------------------------------------
# states and fields


def build_spdc_state(pump_strength: float = 0.01) -> ModeState:
    """Six equal-amplitude mode pairs |j, j>, vacuum omitted."""
    if not 0 <= pump_strength < 0.1:
        raise ValueError("pump_strength must lie in [0, 0.1)")
    return ModeState(np.eye(N_MODES) / math.sqrt(N_MODES), pump_strength)


def alice_field(cfg: OpticsConfig, point: str) -> np.ndarray:
    """Annihilation-coefficient vector of Alice's detector at a named point.

    Focal-plane points f, f1, f2 each sum one parallel pair (with the fixed
    per-point phase offset); imaging-plane points m and l sum the three modes
    reaching one slit.
    """
    v = np.zeros(N_MODES, dtype=np.complex128)
    if point == "f":
        v[1] = v[4] = 1.0
    elif point == "f1":
        v[0] = 1.0
        v[3] = np.exp(1j * cfg.omega_14)
    elif point == "f2":
        v[2] = 1.0
        v[5] = np.exp(1j * cfg.omega_36)
    elif point == "m":
        v[list(UPPER_SLIT_MODES)] = 1.0
    elif point == "l":
        v[list(LOWER_SLIT_MODES)] = 1.0
    else:
        raise ValueError(f"unknown detection point {point!r}; use {ALICE_POINTS}")
    return v


def alice_measure(cfg: OpticsConfig, point: str) -> np.ndarray:
    """Alice's detection as a Kraus element |detected><mode sum|.

    Returned as a 1 x 6 matrix.  The f element alone is not a partition of
    unity — its completion would need the orthogonal mode combination, which
    no detector position realizes — whereas the imaging pair {l, m} restricted
    to the horizontal-pair subspace is complete.
    """
    return alice_field(cfg, point).reshape(1, N_MODES)


def bob_field(cfg: OpticsConfig, z, filtered: bool,
              spreading_angle: float | None = None) -> np.ndarray:
    """Bob's screen-field coefficient vectors, one row per z value.

    Unfiltered: all six modes, upper-slit modes at phase +gamma/2, lower-slit
    at -gamma/2.  Filtered: only the horizontal pair survives; a nonzero
    spreading angle mixes the pair at the aperture before the phases apply.
    """
    gam = np.atleast_1d(cfg.gamma(z))
    up = np.exp(+0.5j * gam)
    low = np.exp(-0.5j * gam)
    out = np.zeros((gam.size, N_MODES), dtype=np.complex128)
    if not filtered:
        for j in UPPER_SLIT_MODES:
            out[:, j] = up
        for j in LOWER_SLIT_MODES:
            out[:, j] = low
        return out
    theta = cfg.spreading_angle if spreading_angle is None else spreading_angle
    ct, st = math.cos(theta), math.sin(theta)
    hi, lo = HORIZONTAL_PAIR
    out[:, hi] = ct * up - st * low
    out[:, lo] = st * up + ct * low
    return out


def direction_filter() -> OperatorSet:
    """The mode filter as a complete isometry into modes-plus-sinks.

    Horizontal-pair modes pass untouched; every other mode is routed to its
    own sink level orthogonal to everything else (absorbed at the filter).
    Being an isometry, it is a complete local operation and cannot signal.
    """
    rejected = [j for j in range(N_MODES) if j not in HORIZONTAL_PAIR]
    d_out = N_MODES + len(rejected)
    iso = np.zeros((d_out, N_MODES), dtype=np.complex128)
    for j in HORIZONTAL_PAIR:
        iso[j, j] = 1.0
    for sink, j in enumerate(rejected):
        iso[N_MODES + sink, j] = 1.0
    return OperatorSet([iso], completeness=Completeness.COMPLETE)


def apply_direction_filter(state: ModeState) -> ModeState:
    """Route the idler through the filter isometry (idler space grows sinks)."""
    iso = direction_filter().elements[0]
    labels = tuple(state.idler_labels) + tuple(
        f"sink{j + 1}" for j in range(N_MODES) if j not in HORIZONTAL_PAIR)
    return ModeState(state.amps @ iso.T, state.pump_strength, labels)


# ---------------------------------------------------------------------------
# patterns


def coincidence_pattern(cfg: OpticsConfig, alice_point: str,
                        filtered: bool) -> Pattern:
    """Coincidence rate over the screen for one Alice detection point.

    Computed from the second-order correlation matrix element
    |alice . psi . bob(z)|^2 of the six-pair source state.
    """
    psi = build_spdc_state(cfg.pump_strength)
    a = alice_field(cfg, alice_point)
    b = bob_field(cfg, cfg.z_grid, filtered)
    amp = (a @ psi.amps) @ b.T
    tag = "filtered" if filtered else "unfiltered"
    return Pattern(cfg.z_grid, np.abs(amp) ** 2, f"coincidence-{alice_point}-{tag}")


def singles_pattern(cfg: OpticsConfig, alice_plane: str, filtered: bool) -> Pattern:
    """Bob's unconditioned screen rate for a given Alice strategy.

    Focal: mixture over the canonical focal points (behind the filter only
    the horizontal point contributes, leaving full-visibility fringes).
    Imaging: mixture over the two image points.  None: no measurement at all,
    computed directly from the entangled state.
    """
    psi = build_spdc_state(cfg.pump_strength)
    b = bob_field(cfg, cfg.z_grid, filtered)
    tag = "filtered" if filtered else "unfiltered"
    if alice_plane == "None":
        total = np.abs(psi.amps @ b.T) ** 2
        return Pattern(cfg.z_grid, total.sum(axis=0), f"singles-none-{tag}")
    if alice_plane == "Focal":
        points = ("f", "f1", "f2")
    elif alice_plane == "Imaging":
        points = ("l", "m")
    else:
        raise ValueError(f"unknown plane {alice_plane!r}; use Focal/Imaging/None")
    total = np.zeros(cfg.z_grid.size)
    for pt in points:
        a = alice_field(cfg, pt)
        total += np.abs((a @ psi.amps) @ b.T) ** 2
    return Pattern(cfg.z_grid, total, f"singles-{alice_plane.lower()}-{tag}")


def spreading_pattern(cfg: OpticsConfig) -> tuple[Pattern, Pattern]:
    """(singles, f-coincidence) behind the filter with aperture spreading.

    The two imaging-point patterns pick up opposite-sign fringe terms that
    cancel in the singles sum, which is therefore z-independent for every
    spreading angle; the f-coincidence fringe survives with visibility
    |cos(2 theta)|, crossing zero at theta = pi/4.
    """
    psi = build_spdc_state(cfg.pump_strength)
    b = bob_field(cfg, cfg.z_grid, filtered=True)
    singles = np.zeros(cfg.z_grid.size)
    for pt in ("l", "m"):
        a = alice_field(cfg, pt)
        singles += np.abs((a @ psi.amps) @ b.T) ** 2
    a_f = alice_field(cfg, "f")
    coincident = np.abs((a_f @ psi.amps) @ b.T) ** 2
    theta_tag = f"theta={cfg.spreading_angle:.6g}"
    return (Pattern(cfg.z_grid, singles, f"spread-singles-{theta_tag}"),
            Pattern(cfg.z_grid, coincident, f"spread-coincidence-f-{theta_tag}"))


# ---------------------------------------------------------------------------
# remote ensembles and completeness diagnostics


def _mode_sum_ket(modes) -> np.ndarray:
    v = np.zeros(N_MODES, dtype=np.complex128)
    v[list(modes)] = 1.0
    return v / np.linalg.norm(v)


def remote_ensembles(unfiltered: bool = True) -> tuple[DensityOperator, DensityOperator, float, tuple[float, float]]:
    """Idler ensembles remotely prepared by the two measurement strategies.

    Focal-plane detections leave uniform mixtures of the three pair
    superpositions (rho_P); imaging-plane detections leave the two slit-triple
    superpositions (rho_Q).  Both projector families fail to resolve the
    identity on the six-mode space — the returned defects quantify by how
    much — and the ensembles differ, which is the mode-basis footprint of the
    signaling (``unfiltered`` is annotation only; no filter is involved).
    """
    pair_kets = [_mode_sum_ket(p) for p in ((1, 4), (0, 3), (2, 5))]
    triple_kets = [_mode_sum_ket(t) for t in (UPPER_SLIT_MODES, LOWER_SLIT_MODES)]
    proj_p = [np.outer(k, k.conj()) for k in pair_kets]
    proj_q = [np.outer(k, k.conj()) for k in triple_kets]
    rho_p = DensityOperator(sum(proj_p) / len(proj_p), (N_MODES,))
    rho_q = DensityOperator(sum(proj_q) / len(proj_q), (N_MODES,))
    eye = np.eye(N_MODES)
    defects = (float(np.abs(sum(proj_p) - eye).max()),
               float(np.abs(sum(proj_q) - eye).max()))
    return rho_p, rho_q, trace_distance(rho_p, rho_q), defects


def filter_geometry_check(cfg: OpticsConfig, margin: float = 10.0) -> dict:
    """Both aperture inequalities with their actual ratios.

    Passing requires aperture/wavelength >= margin (no significant
    diffraction) and (focal_length/slit_separation) / (aperture/wavelength)
    >= margin (only near-horizontal modes admitted).
    """
    if margin <= 1:
        raise ValueError("margin must be > 1")
    r1 = cfg.filter_aperture / cfg.wavelength
    r2 = (cfg.filter_focal_length / cfg.slit_separation) / r1
    return {"ok": bool(r1 >= margin and r2 >= margin),
            "aperture_over_wavelength": float(r1),
            "selectivity_headroom": float(r2),
            "margin": float(margin)}


def bob_povm_integral(cfg: OpticsConfig, periods: float | None = None,
                      points_per_period: int | None = None) -> float:
    """Defect of the screen POVM integrated over the fringe span.

    Each screen point is the non-complete element (|2> + e^{-i gamma}|5>)
    (<2| + e^{i gamma}<5|); averaging over whole phase periods cancels the
    cross terms exactly, returning the identity on the pair subspace, while a
    fractional span leaves an O(1) defect — the integration that no single
    converging point can perform.  The span defaults to the config grid's
    (which must cover at least 20 periods); ``periods`` overrides it.  The
    sum is uniform in phase, left-endpoint, equivalent to the trapezoid rule
    by periodicity; the defect is the max-entry distance from the identity.
    """
    span = periods
    if span is None:
        width = cfg.gamma(cfg.z_grid[-1]) - cfg.gamma(cfg.z_grid[0])
        span = width / (2.0 * math.pi)
        if span < 20 * (1.0 - 1e-9):
            raise ValueError(
                f"z_grid spans only {span:.3g} fringe periods; at least 20 required")
    if span <= 0:
        raise ValueError("periods must be > 0")
    pts = points_per_period or cfg.points_per_period
    n_samples = max(2, round(span * pts))
    gam = 2.0 * math.pi * span * np.arange(n_samples) / n_samples
    elements = np.empty((n_samples, 2, 2), dtype=np.complex128)
    elements[:, 0, 0] = elements[:, 1, 1] = 1.0
    elements[:, 0, 1] = np.exp(1j * gam)
    elements[:, 1, 0] = np.exp(-1j * gam)
    mat = elements.mean(axis=0)
    return float(np.abs(mat - np.eye(2)).max())


# ---------------------------------------------------------------------------
# complementarity


def complementarity_curve(theta_grid) -> list[tuple[float, float, float]]:
    """Coherence/entanglement trade-off of a partially entangling monitor.

    The system starts in (|0>+|1>)/sqrt(2); the monitor qubit couples through
    U = cos(t) I + i sin(t) CNOT (system controls the monitor target).  For
    each t: C = 2|rho_01| of the reduced system state and E = 2 sqrt(l- l+)
    from its eigenvalues, satisfying C = cos t, E = sin t, C^2 + E^2 = 1.
    """
    out = []
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    for theta in np.atleast_1d(np.asarray(theta_grid, dtype=float)):
        u = math.cos(theta) * np.eye(4) + 1j * math.sin(theta) * CNOT
        if np.abs(u.conj().T @ u - np.eye(4)).max() > 1e-12:
            raise ValueError(f"monitor coupling not unitary at theta={theta}")
        joint = PureState(np.kron(plus, [1.0, 0.0]), (2, 2))
        evolved = PureState(u @ joint.amplitudes, (2, 2))
        rho = reduced_density(evolved, keep=[0])
        coherence = 2.0 * abs(rho.matrix[0, 1])
        lo, hi = np.clip(rho.eigenvalues(), 0.0, None)
        entanglement = 2.0 * math.sqrt(lo * hi)
        out.append((float(theta), float(coherence), float(entanglement)))
    return out
