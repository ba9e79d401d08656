"""Campaign runner behind the command-line interface.

Each scenario reproduces one of the simulation studies at configurable
scale: beampattern maps, beampattern moment verification, KS normality
testing, the three-target indication example, detection-rate sweeps,
CRB-versus-MSE comparisons, and mutual-coherence statistics.  A campaign
is fully determined by (config, seed): re-running emits byte-identical
tables.
"""

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _pkg_version
from . import kernels
from .beampattern import (
    NormalizedOffset,
    asymptotic_moments,
    ks_normality_test,
    lfda_beampattern,
    mean_beampattern,
    rho_trials,
    rho_value,
    variance_beampattern,
)
from .bounds import coherence_prob_bound, crb_uncorrelated, exact_recovery_sparsity, fim, ml_estimate, mutual_coherence, qcbp_error_bound
from .model import (
    ArrayConfig,
    ContinuousUniform,
    DiscreteUniform,
    Gaussian,
    Target,
    TargetScene,
    sample_frequencies,
    synthesize_echoes,
)
from .processing import (
    build_observing_matrix,
    canonical_grid,
    detection_success,
    focuss_recover,
    gsp_recover,
    matched_filter,
    mfocuss_recover,
    noise_tolerance,
    sp_recover,
)
from .rng import substream

__all__ = ["Table", "ExperimentConfig", "CampaignResult", "SCENARIOS", "run", "emit"]

SCENARIOS = ("beampattern", "moments", "ks", "detect_example", "detect_sweep",
             "crb_mse", "coherence")

DEFAULT_TRIALS = {
    "beampattern": 1,
    "moments": 2000,
    "ks": 10000,
    "detect_example": 200,
    "detect_sweep": 500,
    "crb_mse": 1000,
    "coherence": 500,
}

_DIST_KINDS = {
    "gaussian": (Gaussian, ("sigma",)),
    "continuous_uniform": (ContinuousUniform, ("m_span",)),
    "discrete_uniform": (DiscreteUniform, ("m_levels",)),
}


@dataclass
class Table:
    """Column-oriented dataset with a fixed column order."""

    columns: dict

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("all columns must have the same length")

    @property
    def n_rows(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @staticmethod
    def _format(value):
        if isinstance(value, (bool, np.bool_)):
            return "1" if value else "0"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return "%.17g" % float(value)
        return str(value)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(names)
        cols = [self.columns[n] for n in names]
        for row in zip(*cols) if cols else ():
            writer.writerow([self._format(v) for v in row])
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        out = {}
        for name, col in self.columns.items():
            vals = []
            for v in col:
                if isinstance(v, (bool, np.bool_)):
                    vals.append(bool(v))
                elif isinstance(v, (int, np.integer)):
                    vals.append(int(v))
                elif isinstance(v, (float, np.floating)):
                    vals.append(float(v))
                else:
                    vals.append(str(v))
            out[name] = vals
        return out


def _dist_to_dict(dist):
    for kind, (cls, fields) in _DIST_KINDS.items():
        if isinstance(dist, cls):
            return {"kind": kind, **{f: getattr(dist, f) for f in fields}}
    raise TypeError(f"unknown distribution type {type(dist)!r}")


def _dist_from_dict(d):
    kind = d.get("kind")
    if kind not in _DIST_KINDS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    cls, fields = _DIST_KINDS[kind]
    return cls(**{f: d[f] for f in fields})


@dataclass
class ExperimentConfig:
    """Complete, serializable description of one campaign."""

    scenario: str
    array: ArrayConfig = ArrayConfig(64, 0.025, 3.0e9, 1.0e6)
    distribution: object = DiscreteUniform(32)
    trials: int = 0  # 0 selects the scenario default
    seed: int = 12345
    snr_db: tuple = ()
    output_path: str = "out"
    threads: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.trials == 0:
            self.trials = DEFAULT_TRIALS[self.scenario]
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.snr_db = tuple(float(s) for s in self.snr_db)
        if self.scenario in ("detect_sweep", "crb_mse") and not self.snr_db:
            self.snr_db = ((-24.0, -21.0, -18.0, -15.0, -12.0, -9.0, -6.0, -3.0, 0.0, 3.0, 6.0)
                           if self.scenario == "detect_sweep"
                           else (0.0, 5.0, 10.0, 15.0, 20.0))

    def to_dict(self) -> dict:
        a = self.array
        return {
            "scenario": self.scenario,
            "array": {
                "n_elements": a.n_elements,
                "spacing": a.spacing,
                "center_freq": a.center_freq,
                "freq_increment": a.freq_increment,
                "wave_speed": a.wave_speed,
            },
            "distribution": _dist_to_dict(self.distribution),
            "trials": self.trials,
            "seed": self.seed,
            "snr_db": list(self.snr_db),
            "output": self.output_path,
            "threads": self.threads,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "scenario" not in d:
            raise ValueError("config must name a scenario")
        array = ArrayConfig(**d["array"]) if "array" in d else ArrayConfig(64, 0.025, 3.0e9, 1.0e6)
        dist = _dist_from_dict(d["distribution"]) if "distribution" in d else DiscreteUniform(32)
        return cls(
            scenario=d["scenario"],
            array=array,
            distribution=dist,
            trials=int(d.get("trials", 0)),
            seed=int(d.get("seed", 12345)),
            snr_db=tuple(d.get("snr_db", ())),
            output_path=str(d.get("output", "out")),
            threads=int(d.get("threads", 0)),
            params=dict(d.get("params", {})),
        )


@dataclass
class CampaignResult:
    tables: dict
    metadata: dict


def _discrete_levels(cfg: ExperimentConfig) -> int:
    """Range-grid size: the discrete-uniform level count, or a params override."""
    if "m_levels" in cfg.params:
        return int(cfg.params["m_levels"])
    if isinstance(cfg.distribution, DiscreteUniform):
        return cfg.distribution.m_levels
    if isinstance(cfg.distribution, ContinuousUniform):
        return int(round(cfg.distribution.m_span))
    raise ValueError("set params.m_levels to define the range grid for this distribution")


def _offset_axes(cfg: ExperimentConfig, default_points=21):
    p = cfg.params
    qn = int(p.get("q_points", default_points))
    pn = int(p.get("p_points", default_points))
    q_lo, q_hi = p.get("q_span", (-0.5, 0.5))
    p_lo, p_hi = p.get("p_span", (-0.5, 0.5))
    return np.linspace(q_lo, q_hi, qn), np.linspace(p_lo, p_hi, pn)


def _run_beampattern(cfg: ExperimentConfig) -> dict:
    q_ax, p_ax = _offset_axes(cfg, default_points=201)
    kind = cfg.params.get("kind", "rfda")
    arr = cfg.array
    rows_q, rows_p, mag = [], [], []
    if kind == "lfda":
        for pv in p_ax:
            for qv in q_ax:
                off = NormalizedOffset.for_config(arr, qv, pv)
                rows_q.append(float(qv)); rows_p.append(float(pv))
                mag.append(abs(lfda_beampattern(arr, off)))
    elif kind == "rfda":
        draw = sample_frequencies(cfg.distribution, arr.n_elements, cfg.seed)
        for pv in p_ax:
            for qv in q_ax:
                rows_q.append(float(qv)); rows_p.append(float(pv))
                mag.append(abs(rho_value(draw, qv, pv)))
    else:
        raise ValueError("beampattern kind must be 'rfda' or 'lfda'")
    return {"beampattern": Table({"q": rows_q, "p": rows_p, "magnitude": mag})}


def _run_moments(cfg: ExperimentConfig) -> dict:
    arr, dist = cfg.array, cfg.distribution
    q_ax, p_ax = _offset_axes(cfg)
    offsets = [NormalizedOffset.for_config(arr, qv, pv) for pv in p_ax for qv in q_ax]
    q = np.array([o.q for o in offsets])
    p = np.array([o.p for o in offsets])
    rho = rho_trials(dist, arr, q, p, cfg.trials, cfg.seed, n_threads=cfg.threads)
    t = cfg.trials

    mean_rho = rho.sum(axis=0) / t
    centered = rho - mean_rho
    var_mc = (centered.real**2 + centered.imag**2).sum(axis=0) / t
    sq_samples = centered**2
    sq_mc = sq_samples.sum(axis=0) / t
    sq_se_re = sq_samples.real.std(axis=0) / np.sqrt(t)
    sq_se_im = sq_samples.imag.std(axis=0) / np.sqrt(t)

    phase = np.exp(1j * np.array([o.alpha for o in offsets]))
    mean_mc = phase * mean_rho

    cols = {k: [] for k in (
        "q", "p", "mean_re_mc", "mean_im_mc", "mean_re_th", "mean_im_th", "mean_se",
        "var_mc", "var_th", "sq_re_mc", "sq_im_mc", "sq_th", "sq_se_re", "sq_se_im")}
    for g, off in enumerate(offsets):
        th_mean = mean_beampattern(dist, arr, off)
        th_var = variance_beampattern(dist, arr, off.p)
        th_sq = asymptotic_moments(dist, arr, off).square_centered
        cols["q"].append(off.q)
        cols["p"].append(off.p)
        cols["mean_re_mc"].append(mean_mc[g].real)
        cols["mean_im_mc"].append(mean_mc[g].imag)
        cols["mean_re_th"].append(th_mean.real)
        cols["mean_im_th"].append(th_mean.imag)
        cols["mean_se"].append(float(np.sqrt(var_mc[g] / t)))
        cols["var_mc"].append(float(var_mc[g]))
        cols["var_th"].append(th_var)
        cols["sq_re_mc"].append(sq_mc[g].real)
        cols["sq_im_mc"].append(sq_mc[g].imag)
        cols["sq_th"].append(th_sq)
        cols["sq_se_re"].append(float(sq_se_re[g]))
        cols["sq_se_im"].append(float(sq_se_im[g]))
    return {"moments": Table(cols)}


def _run_ks(cfg: ExperimentConfig) -> dict:
    arr, dist = cfg.array, cfg.distribution
    q_vals = cfg.params.get("q_values", (0.05, 0.15, 0.25, 0.35, 0.45))
    p_vals = cfg.params.get("p_values", (0.027, 0.093, 0.181, 0.307, 0.433))
    alpha = float(cfg.params.get("alpha", 0.05))
    pairs = [(float(qv), float(pv)) for qv in q_vals for pv in p_vals]
    q = np.array([c[0] for c in pairs])
    p = np.array([c[1] for c in pairs])
    rho = rho_trials(dist, arr, q, p, cfg.trials, cfg.seed, n_threads=cfg.threads)

    cols = {k: [] for k in ("q", "p", "component", "statistic", "threshold", "passed")}
    for g, (qv, pv) in enumerate(pairs):
        for comp, series in (("re", rho[:, g].real), ("im", rho[:, g].imag)):
            sd = series.std()
            if sd == 0:
                raise ValueError(f"beampattern is deterministic at (q={qv}, p={pv}); "
                                 "KS testing needs p with non-unit MGF")
            res = ks_normality_test((series - series.mean()) / sd, alpha=alpha)
            cols["q"].append(qv)
            cols["p"].append(pv)
            cols["component"].append(comp)
            cols["statistic"].append(res.statistic)
            cols["threshold"].append(res.threshold)
            cols["passed"].append(bool(res.passed))
    return {"ks": Table(cols)}


def _paper_example_targets():
    return ({"direction_deg": -30.0, "range_m": 10.0, "amp_db": 10.0},
            {"direction_deg": 5.0, "range_m": 70.0, "amp_db": 10.0},
            {"direction_deg": 60.0, "range_m": 120.0, "amp_db": 0.0})


def _run_detect_example(cfg: ExperimentConfig) -> dict:
    arr, dist = cfg.array, cfg.distribution
    levels = _discrete_levels(cfg)
    grid = canonical_grid(arr, levels)
    specs = cfg.params.get("targets", _paper_example_targets())
    snr_db = float(cfg.params.get("snr_db", 0.0))
    noise_power = 10.0 ** (-snr_db / 10.0)
    sparsity = int(cfg.params.get("sparsity", len(specs)))

    draw = sample_frequencies(dist, arr.n_elements, cfg.seed)
    obs = build_observing_matrix(arr, draw, grid)

    flat_truth = []
    amps_abs = []
    for spec in specs:
        flat = grid.nearest_index(np.deg2rad(spec["direction_deg"]), spec["range_m"])
        flat_truth.append(flat)
        amps_abs.append(10.0 ** (spec["amp_db"] / 20.0))
    weak_flat = flat_truth[int(np.argmin(amps_abs))]

    # bins excluded from the sidelobe base: a 3x3 neighborhood of each target
    excluded = set()
    for flat in flat_truth:
        i_rng, i_dir = divmod(flat, grid.n_directions)
        for dr in (-1, 0, 1):
            for dd in (-1, 0, 1):
                rr, dd2 = i_rng + dr, i_dir + dd
                if 0 <= rr < grid.n_ranges and 0 <= dd2 < grid.n_directions:
                    excluded.add(rr * grid.n_directions + dd2)
    base_mask = np.ones(grid.n_points, dtype=bool)
    base_mask[sorted(excluded)] = False

    successes = 0
    masked = 0
    weak_peaks = []
    base_levels = []
    first_map = None
    first_support = None
    for t in range(cfg.trials):
        rng = substream(cfg.seed, "example-phase", t)
        targets = []
        for spec, flat, amp in zip(specs, flat_truth, amps_abs):
            theta, r = grid.point(flat)
            phase = np.exp(2j * np.pi * rng.random())
            targets.append(Target(theta, r, np.array([amp * phase])))
        scene = TargetScene(tuple(targets), 1)
        echo = synthesize_echoes(arr, draw, scene, noise_power, cfg.seed, index=t)

        mf_map = matched_filter(echo, obs)
        weak_peaks.append(float(mf_map[weak_flat]))
        base_levels.append(float(mf_map[base_mask].max()))
        masked += weak_peaks[-1] < base_levels[-1]

        result = sp_recover(obs, echo.samples[:, 0], sparsity)
        successes += detection_success(result, flat_truth)
        if t == 0:
            first_map = mf_map
            first_support = result

    n_dirs = grid.n_directions
    dir_deg = np.rad2deg(grid.directions)
    map_cols = {"direction_deg": [], "range_m": [], "value": []}
    for flat in range(grid.n_points):
        i_rng, i_dir = divmod(flat, n_dirs)
        map_cols["direction_deg"].append(float(dir_deg[i_dir]))
        map_cols["range_m"].append(float(grid.ranges[i_rng]))
        map_cols["value"].append(float(first_map[flat]))

    sup_cols = {"grid_index": [], "direction_deg": [], "range_m": [],
                "amp_re": [], "amp_im": [], "is_true": []}
    for j, flat in enumerate(first_support.support):
        theta, r = grid.point(int(flat))
        sup_cols["grid_index"].append(int(flat))
        sup_cols["direction_deg"].append(float(np.rad2deg(theta)))
        sup_cols["range_m"].append(float(r))
        sup_cols["amp_re"].append(float(first_support.amplitudes[j, 0].real))
        sup_cols["amp_im"].append(float(first_support.amplitudes[j, 0].imag))
        sup_cols["is_true"].append(bool(int(flat) in set(flat_truth)))

    summary = Table({
        "trials": [cfg.trials],
        "sp_success_rate": [successes / cfg.trials],
        "masked_fraction": [masked / cfg.trials],
        "masked_first": [bool(weak_peaks[0] < base_levels[0])],
        "weak_peak_mean": [float(np.mean(weak_peaks))],
        "sidelobe_base_mean": [float(np.mean(base_levels))],
        "truth_indices": [" ".join(str(i) for i in flat_truth)],
    })
    return {"map": Table(map_cols), "support": Table(sup_cols), "summary": summary}


def _run_detect_sweep(cfg: ExperimentConfig) -> dict:
    arr, dist = cfg.array, cfg.distribution
    levels = _discrete_levels(cfg)
    grid = canonical_grid(arr, levels)
    n_targets = int(cfg.params.get("n_targets", 2))
    sparsity = int(cfg.params.get("sparsity", n_targets))
    ell = int(cfg.params.get("mmv_snapshots", 8))
    redraw = bool(cfg.params.get("redraw_offsets", False))
    fast = {"support_stall": int(cfg.params.get("support_stall", 10)),
            "screen": int(cfg.params.get("screen", 8 * arr.n_elements))}

    draw = sample_frequencies(dist, arr.n_elements, cfg.seed)
    obs = build_observing_matrix(arr, draw, grid)

    algos = ("sp", "focuss", "gsp", "mfocuss")
    counts = {(s, a): 0 for s in cfg.snr_db for a in algos}
    for t in range(cfg.trials):
        scene_rng = substream(cfg.seed, "sweep-scene", t)
        flats = scene_rng.choice(grid.n_points, size=n_targets, replace=False)
        phases = np.exp(2j * np.pi * scene_rng.random((n_targets, ell)))
        truth = [int(f) for f in flats]
        targets = tuple(Target(*grid.point(f), phases[j]) for j, f in enumerate(truth))
        scene = TargetScene(targets, ell)
        if redraw:
            draw_t = sample_frequencies(dist, arr.n_elements, cfg.seed, index=t + 1)
            obs_t = build_observing_matrix(arr, draw_t, grid)
        else:
            draw_t, obs_t = draw, obs
        for s_idx, snr in enumerate(cfg.snr_db):
            noise_power = 10.0 ** (-snr / 10.0)
            echo = synthesize_echoes(arr, draw_t, scene, noise_power, cfg.seed,
                                     index=s_idx * cfg.trials + t)
            y = echo.samples[:, :1]
            tol_1 = noise_tolerance(arr.n_elements, noise_power)
            tol_l = noise_tolerance(arr.n_elements * ell, noise_power)
            results = {
                "sp": sp_recover(obs_t, y, sparsity),
                "focuss": focuss_recover(obs_t, y, tol_1, sparsity=sparsity, **fast),
                "gsp": gsp_recover(obs_t, echo.samples, sparsity),
                "mfocuss": mfocuss_recover(obs_t, echo.samples, tol_l, sparsity=sparsity, **fast),
            }
            for name, res in results.items():
                counts[(snr, name)] += detection_success(res, truth)

    cols = {k: [] for k in ("snr_db", "algorithm", "trials", "successes", "rate", "se")}
    for snr in cfg.snr_db:
        for name in algos:
            n_ok = counts[(snr, name)]
            rate = n_ok / cfg.trials
            cols["snr_db"].append(float(snr))
            cols["algorithm"].append(name)
            cols["trials"].append(cfg.trials)
            cols["successes"].append(int(n_ok))
            cols["rate"].append(rate)
            cols["se"].append(float(np.sqrt(rate * (1.0 - rate) / cfg.trials)))
    return {"sweep": Table(cols)}


def _run_crb_mse(cfg: ExperimentConfig) -> dict:
    arr, dist = cfg.array, cfg.distribution
    levels = _discrete_levels(cfg)
    grid = canonical_grid(arr, levels)
    theta0 = np.deg2rad(float(cfg.params.get("direction_deg", 10.0)))
    r0 = float(cfg.params.get("range_m", 55.0))
    amp = complex(cfg.params.get("amplitude", 1.0))

    draw = sample_frequencies(dist, arr.n_elements, cfg.seed)
    obs = build_observing_matrix(arr, draw, grid)
    scene = TargetScene.single(theta0, r0, amp, 1)
    s_mat = np.array([[abs(amp) ** 2 + 0j]])

    cols = {k: [] for k in ("snr_db", "trials", "crb_theta", "crb_range",
                            "fim_crb_theta", "fim_crb_range", "mse_theta", "mse_range")}
    for s_idx, snr in enumerate(cfg.snr_db):
        noise_power = abs(amp) ** 2 * 10.0 ** (-snr / 10.0)
        crb_t, crb_r = crb_uncorrelated(arr, draw, scene, 0, noise_power, 1, abs(amp) ** 2)
        report = fim(arr, draw, scene, s_mat, noise_power, 1)
        err_t = np.empty(cfg.trials)
        err_r = np.empty(cfg.trials)
        for t in range(cfg.trials):
            echo = synthesize_echoes(arr, draw, scene, noise_power, cfg.seed,
                                     index=s_idx * cfg.trials + t)
            est = ml_estimate(arr, draw, echo, obs)
            err_t[t] = est.direction - theta0
            err_r[t] = est.range_m - r0
        cols["snr_db"].append(float(snr))
        cols["trials"].append(cfg.trials)
        cols["crb_theta"].append(float(crb_t))
        cols["crb_range"].append(float(crb_r))
        cols["fim_crb_theta"].append(float(report.per_target[0][0]))
        cols["fim_crb_range"].append(float(report.per_target[0][1]))
        cols["mse_theta"].append(float(np.mean(err_t**2)))
        cols["mse_range"].append(float(np.mean(err_r**2)))
    return {"crb_mse": Table(cols)}


def _run_coherence(cfg: ExperimentConfig) -> dict:
    arr, dist = cfg.array, cfg.distribution
    levels = _discrete_levels(cfg)
    grid = canonical_grid(arr, levels)
    thresholds = [float(r) for r in cfg.params.get("thresholds", (0.25, 0.3, 0.35, 0.4))]
    epsilon = float(cfg.params.get("epsilon", 0.01))
    n_targets = int(cfg.params.get("n_targets", 2))

    mu_cols = {"draw": [], "mu": [], "sp_success": []}
    for d in range(cfg.trials):
        draw = sample_frequencies(dist, arr.n_elements, cfg.seed, index=d)
        obs = build_observing_matrix(arr, draw, grid)
        report = mutual_coherence(obs)

        scene_rng = substream(cfg.seed, "coherence-scene", d)
        flats = [int(f) for f in scene_rng.choice(grid.n_points, size=n_targets, replace=False)]
        phases = np.exp(2j * np.pi * scene_rng.random(n_targets))
        targets = tuple(Target(*grid.point(f), np.array([phases[j]]))
                        for j, f in enumerate(flats))
        echo = synthesize_echoes(arr, draw, TargetScene(targets, 1), 0.0, cfg.seed, index=d)
        ok = detection_success(sp_recover(obs, echo.samples[:, 0], n_targets), flats)

        mu_cols["draw"].append(d)
        mu_cols["mu"].append(report.mu)
        mu_cols["sp_success"].append(bool(ok))

    mu = np.array(mu_cols["mu"])
    dom_cols = {"r": [], "empirical": [], "bound": []}
    for r in thresholds:
        dom_cols["r"].append(r)
        dom_cols["empirical"].append(float((mu < r).mean()))
        dom_cols["bound"].append(coherence_prob_bound(levels, arr.n_elements, r))

    k_exact = exact_recovery_sparsity(levels, arr.n_elements, epsilon)
    guarantees = {"epsilon": [epsilon], "k_exact": [k_exact]}
    try:
        guarantees["qcbp_at_k"] = [qcbp_error_bound(k_exact, levels, arr.n_elements,
                                                    epsilon, 1.0, 1.0)]
    except ValueError:
        guarantees["qcbp_at_k"] = [float("nan")]
    return {"mu_samples": Table(mu_cols), "domination": Table(dom_cols),
            "guarantees": Table(guarantees)}


_RUNNERS = {
    "beampattern": _run_beampattern,
    "moments": _run_moments,
    "ks": _run_ks,
    "detect_example": _run_detect_example,
    "detect_sweep": _run_detect_sweep,
    "crb_mse": _run_crb_mse,
    "coherence": _run_coherence,
}


def run(config: ExperimentConfig) -> CampaignResult:
    """Execute a campaign; (config, seed) fully determines every number."""
    t0 = time.time()
    tables = _RUNNERS[config.scenario](config)
    metadata = {
        "config": config.to_dict(),
        "seed": config.seed,
        "version": _pkg_version,
        "kernel_backend": kernels.backend_name(),
        "tables": {name: t.n_rows for name, t in tables.items()},
        "wall_time_s": time.time() - t0,
    }
    return CampaignResult(tables, metadata)


def emit(result: CampaignResult, fmt: str = "csv", out_dir="out"):
    """Write one file per table plus a metadata sidecar; returns the paths.

    Table files are byte-deterministic for a fixed (config, seed); the
    sidecar's wall_time_s field is the only non-reproducible value.
    """
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, table in result.tables.items():
            path = out / f"{name}.{fmt}"
            if fmt == "csv":
                path.write_text(table.to_csv_text(), encoding="utf-8")
            else:
                path.write_text(json.dumps(table.to_json_obj(), indent=1, sort_keys=True) + "\n",
                                encoding="utf-8")
            paths.append(path)
        meta_path = out / "metadata.json"
        meta_path.write_text(json.dumps(result.metadata, indent=1, sort_keys=True) + "\n",
                             encoding="utf-8")
        paths.append(meta_path)
    except OSError as exc:
        raise OSError(f"cannot write campaign output under {out}: {exc}") from exc
    return paths
