"""Named experiments: parameter schemas, runners, and their output tables.

Each experiment is a pure function of (params, seed) that fills a results
dict and, when given an output directory, writes pattern/table CSVs.  The
analytic-overlay metadata written next to each CSV follows a fixed contract
shared with the plotting frontend: the overlay is re-evaluated from the
metadata parameters alone, so the residual recorded here and the residual a
renderer computes from the same file agree bit for bit.

Overlay contract (float64, evaluated exactly as written):
  fringe          mean * (1 + amplitude * cos(phase + 2*pi*z/period_m))
  abs_cos_2theta  abs(cos(2*theta))
  circle          residual against coherence^2 + entanglement^2 == 1
  four_halving    4 * 2**(-n)
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import __version__, complexity, optics, signaling
from .core import AnnihilationError, OperatorSet, PureState, random_pure_state
from .gates import NonlinearGateDomainError, g_gate
from .optics import OpticsConfig, Pattern
from .report import ExperimentReport, pattern_to_csv, table_to_csv, trials_to_csv

#: Failures that reflect a numeric/domain condition, not bad parameters.
_NUMERIC_ERRORS = (AnnihilationError, NonlinearGateDomainError,
                   np.linalg.LinAlgError, FloatingPointError)


class ValidationError(ValueError):
    """Experiment name or parameters rejected before execution."""


@dataclass(frozen=True)
class ExperimentDef:
    name: str
    description: str
    defaults: dict
    runner: Callable[[dict, int, str | None], tuple[dict, list[str]]]


def _merge_params(defn: ExperimentDef, params: dict) -> dict:
    unknown = set(params) - set(defn.defaults)
    if unknown:
        raise ValidationError(
            f"{defn.name}: unknown parameter(s) {sorted(unknown)}; "
            f"accepted: {sorted(defn.defaults)}")
    merged = dict(defn.defaults)
    merged.update(params)
    return merged


def _thread_workers() -> int:
    try:
        return max(1, int(os.environ.get("QSIM_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    workers = _thread_workers()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _signal_results(rep: signaling.SignalReport) -> dict:
    return {
        "label": rep.label,
        "rho_choice0": rep.rho_choice0,
        "rho_choice1": rep.rho_choice1,
        "trace_dist": rep.trace_dist,
        "holevo_bits": rep.holevo_bits,
        **{f"detail_{k}": v for k, v in sorted(rep.details.items())},
    }


def _fringe_overlay(z: np.ndarray, mean: float, amplitude: float,
                    phase: float, period_m: float) -> np.ndarray:
    return mean * (1.0 + amplitude * np.cos(phase + 2.0 * np.pi * z / period_m))


def fringe_metadata(pattern: Pattern, mean: float, amplitude: float,
                    phase: float, period_m: float) -> dict:
    overlay = _fringe_overlay(pattern.z, mean, amplitude, phase, period_m)
    return {
        "analytic": "fringe",
        "analytic_mean": float(mean),
        "analytic_amplitude": float(amplitude),
        "analytic_phase": float(phase),
        "analytic_period_m": float(period_m),
        "analytic_residual": float(np.abs(pattern.intensity - overlay).max()),
    }


def _write_fringe_csv(pattern: Pattern, cfg: OpticsConfig, outdir: str,
                      filename: str, base: float, amplitude: float,
                      phase: float = 0.0) -> str:
    """Write a pattern CSV with its closed form base*(1 + a*cos(...))."""
    meta = fringe_metadata(pattern, base, amplitude, phase, cfg.fringe_period)
    path = os.path.join(outdir, filename)
    pattern_to_csv(pattern, path, meta)
    return filename


# ---------------------------------------------------------------------------
# signaling experiments


def _run_g_signal(params, seed, outdir):
    rep = signaling.run_g_signal(params["epsilon"], int(params["m"]))
    p_before, p_after = signaling.run_single_particle_context(
        params["theta"], params["epsilon"], int(params["m"]))
    sweep = []
    for m in range(0, int(params["m_sweep_max"]) + 1):
        r = signaling.run_g_signal(params["epsilon"], m)
        sweep.append({"m": m, "trace_dist": r.trace_dist})
    results = _signal_results(rep)
    results.update({
        "context_theta": params["theta"],
        "context_p_before": p_before,
        "context_p_after": p_after,
        "m_sweep": sweep,
    })
    return results, []


def _run_r_signal(params, seed, outdir):
    rep = signaling.run_r_signal(int(params["n_trials"]), rng_seed=seed)
    results = _signal_results(rep)
    files = []
    if outdir and params["write_trials"]:
        trials_to_csv(os.path.join(outdir, "r_signal_trials.csv"),
                      rep.per_trial_stats)
        files.append("r_signal_trials.csv")
    results["n_trials"] = int(params["n_trials"])
    return results, files


def _run_pnorm_signal(params, seed, outdir):
    rep = signaling.run_pnorm_signal(params["theta"], params["p"])
    results = _signal_results(rep)
    sweep = []
    for p in params["p_grid"]:
        r = signaling.run_pnorm_signal(params["theta"], float(p))
        sweep.append({"p": float(p), "trace_dist": r.trace_dist})
    results["p_grid_sweep"] = sweep
    return results, []


def _run_constant_signal(params, seed, outdir):
    rep = signaling.run_constant_signal(params["variant"])
    return _signal_results(rep), []


def _run_no_signaling_sweep(params, seed, outdir):
    n = int(params["n_channels"])
    max_complete = signaling.no_signaling_sweep(n, rng_seed=seed, kind="dilation")
    max_unitary = signaling.no_signaling_sweep(n, rng_seed=seed, kind="unitary")
    shared = PureState([0, 1, 1, 0] / np.sqrt(2.0), (2, 2))
    g_ops = OperatorSet([g_gate(0.5, 1)])
    contrast = signaling.bob_shift_under_channel(shared, g_ops)
    return {
        "n_channels": n,
        "max_violation_complete": max_complete,
        "max_violation_unitary": max_unitary,
        "noncomplete_g_violation": contrast,
    }, []


# ---------------------------------------------------------------------------
# search gadget experiments


def _oracle_from_params(params) -> complexity.BooleanOracle:
    return complexity.BooleanOracle.from_solutions(
        int(params["n"]), [int(s) for s in params["solutions"]])


def _algorithm_results(res: complexity.AlgorithmResult) -> dict:
    out = {
        "decision": res.decision,
        "success_probability": res.success_probability,
        "resources": dict(res.resources),
    }
    if res.assignment is not None:
        out["assignment"] = res.assignment
    return out


def _run_sat_g(params, seed, outdir):
    oracle = _oracle_from_params(params)
    res = complexity.sat_via_g(oracle, params["epsilon"],
                               shots=int(params["shots"]), rng_seed=seed)
    out = _algorithm_results(res)
    out["brute_force_decision"] = oracle.has_solution()
    out["m_schedule"] = complexity.amplification_schedule(oracle.n, params["epsilon"])
    return out, []


def _run_nondet_r(params, seed, outdir):
    oracle = _oracle_from_params(params)
    quant = params["quantifiers"] or None
    res = complexity.nondet_via_r(oracle, mode=params["mode"], quantifiers=quant)
    out = _algorithm_results(res)
    if params["mode"] == "count":
        out["brute_force_count"] = oracle.count()
    else:
        out["brute_force_decision"] = oracle.has_solution()
    return out, []


def _run_postselect_sat(params, seed, outdir):
    oracle = _oracle_from_params(params)
    res = complexity.sat_via_postselection(oracle, rng_seed=seed)
    out = _algorithm_results(res)
    out["brute_force_decision"] = oracle.has_solution()
    return out, []


def _run_simulate_q2(params, seed, outdir):
    n = int(params["n"])
    phi = params["phi"]
    trials = int(params["trials"])
    rng = np.random.default_rng([seed, n])
    worst_prob_err = 0.0
    worst_fid_err = 0.0
    for _ in range(trials):
        state = random_pure_state((2,) * (n + 1), rng)
        sim = complexity.simulate_q2(state, phi)
        worst_prob_err = max(worst_prob_err, abs(
            sim.success_prob - complexity.q2_norm_formula(state, phi) / 2.0))
        direct = complexity.apply_q2_directly(state, phi)
        fid = abs(sim.out_state.overlap(direct)) ** 2
        worst_fid_err = max(worst_fid_err, abs(1.0 - fid))
    # orthogonal branches: success probability exactly 1/2
    amps = np.zeros(2 ** (n + 1), dtype=complex)
    amps[0] = amps[3] = 1 / math.sqrt(2.0)     # |0...00> and |0...11>
    orth = complexity.simulate_q2(PureState(amps, (2,) * (n + 1)), phi)
    return {
        "n": n, "phi": phi, "trials": trials,
        "max_success_prob_error": worst_prob_err,
        "max_conditional_infidelity": worst_fid_err,
        "orthogonal_success_prob": orth.success_prob,
    }, []


def _run_interferometric(params, seed, outdir):
    n = int(params["n"])
    res = complexity.interferometric_search(
        n=n, marked=int(params["marked"]),
        theta_points=int(params["theta_points"]),
        kappa_sigma=params["kappa_sigma"])
    decay_n = list(range(int(params["sweep_n_min"]), int(params["sweep_n_max"]) + 1))
    decay_p = [complexity.interferometric_search(n=k, marked=0).detect_prob
               for k in decay_n]
    results = {
        "n": n,
        "detect_prob": res.detect_prob,
        "dark_value": res.dark_value,
        "bright_value": res.bright_value,
        "mean_intensity": res.mean_intensity,
        "decay": [{"n": k, "detect_prob": p} for k, p in zip(decay_n, decay_p)],
    }
    files = []
    if outdir:
        ns = np.array(decay_n, dtype=float)
        ps = np.array(decay_p, dtype=float)
        overlay = 4.0 * 2.0 ** (-ns)
        table_to_csv(os.path.join(outdir, "interferometric_decay.csv"),
                     {"n": ns, "detect_prob": ps},
                     {"analytic": "four_halving",
                      "analytic_residual": float(np.abs(ps - overlay).max())})
        files.append("interferometric_decay.csv")
        table_to_csv(os.path.join(outdir, "interferometric_fringe.csv"),
                     {"theta_rad": res.thetas, "intensity": res.intensities},
                     {"label": f"fringe-n{n}",
                      "mean_intensity": res.mean_intensity})
        files.append("interferometric_fringe.csv")
    return results, files


def _run_grover(params, seed, outdir):
    oracle = _oracle_from_params(params)
    res = complexity.grover_baseline(oracle, shots=int(params["shots"]),
                                     rng_seed=seed)
    out = _algorithm_results(res)
    out["brute_force_decision"] = oracle.has_solution()
    out["iterations"] = complexity.grover_iterations(oracle.n)
    return out, []


# ---------------------------------------------------------------------------
# optics experiments


def _cfg_from_params(params) -> OpticsConfig:
    keys = ("wavelength", "slit_separation", "screen_distance",
            "filter_aperture", "filter_focal_length", "imaging_focal_length",
            "pump_strength", "fringe_periods", "points_per_period")
    kwargs = {k: params[k] for k in keys if k in params}
    if "theta_s" in params:
        kwargs["spreading_angle"] = params["theta_s"]
    return OpticsConfig(**kwargs)


_OPTICS_DEFAULTS = {
    "wavelength": 702e-9,
    "slit_separation": 100e-6,
    "screen_distance": 1.0,
    "filter_aperture": 50e-6,
    "filter_focal_length": 1.0,
    "imaging_focal_length": 0.25,
    "pump_strength": 0.01,
    "fringe_periods": 20,
    "points_per_period": 64,
}


def _run_innsbruck(params, seed, outdir):
    cfg = _cfg_from_params(params)
    results = {"patterns": {}}
    files = []
    jobs = []
    # closed-form base levels (units of the raw mode model): one contributing
    # pair gives (2 + 2cos)/6, an imaging point 9/6, unconditioned singles 1.
    for point in optics.ALICE_POINTS:
        pat = optics.coincidence_pattern(cfg, point, filtered=False)
        fringed = point in ("f", "f1", "f2")
        base, amp = (1.0 / 3.0, 1.0) if fringed else (1.5, 0.0)
        phase = {"f1": -cfg.omega_14, "f2": -cfg.omega_36}.get(point, 0.0)
        jobs.append((f"coincidence_{point}.csv", pat, base, amp, phase))
    plane_base = {"Focal": 1.0, "Imaging": 3.0, "None": 1.0}
    for plane in ("Focal", "Imaging", "None"):
        pat = optics.singles_pattern(cfg, plane, filtered=False)
        jobs.append((f"singles_{plane.lower()}.csv", pat, plane_base[plane], 0.0, 0.0))
    for fname, pat, base, amp, phase in jobs:
        results["patterns"][pat.label] = {"visibility": pat.visibility}
        if outdir:
            files.append(_write_fringe_csv(pat, cfg, outdir, fname, base, amp, phase))
    return results, files


def _run_modified_innsbruck(params, seed, outdir):
    cfg = _cfg_from_params(params)
    r_focal = optics.singles_pattern(cfg, "Focal", filtered=True)
    r_imaging = optics.singles_pattern(cfg, "Imaging", filtered=True)
    coin_f = optics.coincidence_pattern(cfg, "f", filtered=True)
    results = {
        "singles_focal_visibility": r_focal.visibility,
        "singles_imaging_visibility": r_imaging.visibility,
        "coincidence_f_visibility": coin_f.visibility,
        "signal_bit_distinguishable": bool(
            r_focal.visibility - r_imaging.visibility > 0.5),
    }
    files = []
    if outdir:
        base = 1.0 / 3.0
        amp = math.cos(2.0 * cfg.spreading_angle)
        files.append(_write_fringe_csv(r_focal, cfg, outdir,
                                       "singles_focal_filtered.csv", base, amp))
        files.append(_write_fringe_csv(r_imaging, cfg, outdir,
                                       "singles_imaging_filtered.csv", base, 0.0))
        files.append(_write_fringe_csv(coin_f, cfg, outdir,
                                       "coincidence_f_filtered.csv", base, amp))
    return results, files


def _run_spreading_sweep(params, seed, outdir):
    thetas = np.linspace(0.0, math.pi / 2.0, int(params["theta_points"]))
    base = _cfg_from_params(params)

    def one(theta: float):
        cfg = replace(base, spreading_angle=float(theta))
        singles, coincident = optics.spreading_pattern(cfg)
        flatness = float(singles.intensity.max() - singles.intensity.min())
        return coincident.visibility, flatness

    rows = _map_ordered(one, thetas)
    vis = np.array([r[0] for r in rows])
    flat = np.array([r[1] for r in rows])
    overlay = np.abs(np.cos(2.0 * thetas))
    results = {
        "theta_points": int(params["theta_points"]),
        "max_visibility_error": float(np.abs(vis - overlay).max()),
        "max_singles_ripple": float(flat.max()),
        "crossover_theta": math.pi / 4.0,
    }
    files = []
    if outdir:
        table_to_csv(os.path.join(outdir, "spreading_visibility.csv"),
                     {"theta_s_rad": thetas, "visibility": vis,
                      "singles_ripple": flat},
                     {"analytic": "abs_cos_2theta",
                      "analytic_residual": float(np.abs(vis - overlay).max())})
        files.append("spreading_visibility.csv")
    return results, files


def _run_remote_ensembles(params, seed, outdir):
    rho_p, rho_q, dist, defects = optics.remote_ensembles()
    return {
        "rho_p": rho_p,
        "rho_q": rho_q,
        "trace_dist": dist,
        "projector_defect_focal": defects[0],
        "projector_defect_imaging": defects[1],
    }, []


def _run_complementarity(params, seed, outdir):
    grid = np.linspace(0.0, math.pi / 2.0, int(params["points"]))
    triples = optics.complementarity_curve(grid)
    theta = np.array([t for t, _, _ in triples])
    coh = np.array([c for _, c, _ in triples])
    ent = np.array([e for _, _, e in triples])
    residual = float(np.abs(coh**2 + ent**2 - 1.0).max())
    results = {
        "points": int(params["points"]),
        "max_circle_residual": residual,
        "max_coherence_error": float(np.abs(coh - np.cos(theta)).max()),
        "max_entanglement_error": float(np.abs(ent - np.sin(theta)).max()),
    }
    files = []
    if outdir:
        table_to_csv(os.path.join(outdir, "complementarity.csv"),
                     {"theta_rad": theta, "coherence": coh, "entanglement": ent},
                     {"analytic": "circle", "analytic_residual": residual})
        files.append("complementarity.csv")
    return results, files


def _run_filter_check(params, seed, outdir):
    cfg = _cfg_from_params(params)
    return optics.filter_geometry_check(cfg, margin=params["margin"]), []


def _run_povm_integral(params, seed, outdir):
    cfg = _cfg_from_params(params)
    whole = optics.bob_povm_integral(cfg, periods=params["periods"])
    one = optics.bob_povm_integral(cfg, periods=1)
    half = optics.bob_povm_integral(cfg, periods=0.5)
    return {
        "periods": params["periods"],
        "defect_whole_periods": whole,
        "defect_one_period": one,
        "defect_half_period": half,
    }, []


# ---------------------------------------------------------------------------
# registry


REGISTRY: dict[str, ExperimentDef] = {}


def _register(name, description, defaults, runner):
    REGISTRY[name] = ExperimentDef(name, description, defaults, runner)


_register("g-signal",
          "entangled-pair signaling via the diagonal amplification gate",
          {"epsilon": 0.1, "m": 5, "theta": math.pi / 3, "m_sweep_max": 30},
          _run_g_signal)
_register("r-signal",
          "ensemble discrimination through the nonlinear OR gate",
          {"n_trials": 10000, "write_trials": True},
          _run_r_signal)
_register("pnorm-signal",
          "deformed Born rule: two procedures that disagree unless p=2",
          {"theta": math.pi / 4, "p": 4.0, "p_grid": [0.0, 1.0, 2.0, 3.0, 4.0, 6.0]},
          _run_pnorm_signal)
_register("constant-signal",
          "constant gate on half an entangled pair: ~0.31-bit channel",
          {"variant": "qubit"},
          _run_constant_signal)
_register("no-signaling-sweep",
          "random complete channels leave the remote state fixed",
          {"n_channels": 1000},
          _run_no_signaling_sweep)
_register("sat-g",
          "satisfiability via flag amplification and majority readout",
          {"n": 8, "solutions": [3], "epsilon": 1.0, "shots": 128},
          _run_sat_g)
_register("nondet-r",
          "nonlinear OR/AND pairing: decision, counting and quantified modes",
          {"n": 3, "solutions": [5], "mode": "or", "quantifiers": ""},
          _run_nondet_r)
_register("postselect-sat",
          "one-step satisfiability by post-selecting the flag",
          {"n": 4, "solutions": [3, 9]},
          _run_postselect_sat)
_register("simulate-q2",
          "standard-resource simulation of the phased constant gate",
          {"n": 4, "phi": 0.7, "trials": 100},
          _run_simulate_q2)
_register("interferometric",
          "two-subwave oracle convergence: 4*2^-n detection and fringes",
          {"n": 10, "marked": 0, "theta_points": 256,
           "kappa_sigma": math.pi, "sweep_n_min": 2, "sweep_n_max": 12},
          _run_interferometric)
_register("grover",
          "fixed-iteration amplitude amplification baseline",
          {"n": 4, "solutions": [7], "shots": 64},
          _run_grover)
_register("innsbruck",
          "unfiltered two-photon setup: coincidence fringes, flat singles",
          dict(_OPTICS_DEFAULTS),
          _run_innsbruck)
_register("modified-innsbruck",
          "direction-filtered setup: fringed vs flat singles per Alice plane",
          {**_OPTICS_DEFAULTS, "theta_s": 0.0},
          _run_modified_innsbruck)
_register("spreading-sweep",
          "aperture spreading: fringe visibility |cos 2 theta|, flat singles",
          {**_OPTICS_DEFAULTS, "theta_points": 50},
          _run_spreading_sweep)
_register("remote-ensembles",
          "mode-basis ensembles prepared by the two remote strategies",
          {},
          _run_remote_ensembles)
_register("complementarity",
          "coherence/entanglement trade-off on the C^2+E^2=1 circle",
          {"points": 100},
          _run_complementarity)
_register("filter-check",
          "aperture inequalities for clean direction filtering",
          {**_OPTICS_DEFAULTS, "margin": 10.0},
          _run_filter_check)
_register("povm-integral",
          "screen POVM integrated over whole vs partial fringe periods",
          {**_OPTICS_DEFAULTS, "periods": 20.0},
          _run_povm_integral)


def run_experiment(name: str, params: dict | None, seed: int,
                   outdir: str | None) -> ExperimentReport:
    if name not in REGISTRY:
        raise ValidationError(
            f"unknown experiment {name!r}; run `qsim list` for the registry")
    defn = REGISTRY[name]
    merged = _merge_params(defn, params or {})
    try:
        results, files = defn.runner(merged, int(seed), outdir)
    except (ValidationError,):
        raise
    except (TypeError, ValueError) as exc:
        if isinstance(exc, _NUMERIC_ERRORS):
            raise
        raise ValidationError(f"{name}: invalid parameters: {exc}") from exc
    return ExperimentReport(name=name, seed=int(seed), config=merged,
                            results=results, version=__version__,
                            pattern_files=files)
