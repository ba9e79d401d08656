"""Estimation-performance limits and recovery guarantees.

Fisher information and Cramer-Rao bounds for joint direction/range
estimation (general block form plus the uncorrelated-amplitude closed
forms with their coupling coefficient), observing-matrix mutual
coherence with its probabilistic guarantees, and a maximum-likelihood
estimator for CRB-versus-MSE comparisons.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ArrayConfig, EchoMatrix, FrequencyDraw, TargetScene, steering_vector
from .processing import DirectionRangeGrid, ObservingMatrix, build_observing_matrix

__all__ = [
    "SingularityError",
    "FimReport",
    "CoherenceReport",
    "MlEstimate",
    "steering_jacobian",
    "fim",
    "crb_uncorrelated",
    "mutual_coherence",
    "coherence_prob_bound",
    "exact_recovery_sparsity",
    "qcbp_error_bound",
    "ml_estimate",
]

_CRB_CONDITION_LIMIT = 1e12


class SingularityError(ValueError):
    """Raised when the requested bound does not exist (degenerate geometry)."""


def steering_jacobian(cfg: ArrayConfig, draw: FrequencyDraw, theta: float, r: float):
    """Steering vector and its information-matrix derivative columns.

    The range column is the derivative of the carrier-stripped baseband
    vector; it differs from the full derivative only by a component
    along the steering vector itself, which the orthogonal-complement
    projection inside the Fisher matrix removes, so the information
    matrix is exactly unchanged.
    """
    b = steering_vector(cfg, draw, theta, r)
    idx = cfg.centered_index
    k = 4.0 * np.pi / cfg.wave_speed
    d_theta = -1j * k * cfg.center_freq * cfg.spacing * np.cos(theta) * idx * b
    d_range = -1j * k * cfg.freq_increment * draw.offsets * b
    return b, d_theta, d_range


def _complement_projector(a: np.ndarray):
    """Projector onto the orthogonal complement of a's column space.

    Rank-revealing (SVD with tolerance 1e-10 * largest singular value) so
    near-coincident targets degrade gracefully.  Returns (P, rank).
    """
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int((s > 1e-10 * s[0]).sum()) if s.size else 0
    ur = u[:, :rank]
    return np.eye(a.shape[0]) - ur @ ur.conj().T, rank


@dataclass(frozen=True)
class FimReport:
    """Fisher information for parameters [theta_1, r_1, ..., theta_P, r_P]."""

    fim: np.ndarray
    crb: Optional[np.ndarray]
    per_target: Optional[tuple]
    condition: float


def fim(cfg: ArrayConfig, draw: FrequencyDraw, scene: TargetScene,
        amplitude_corr: np.ndarray, noise_power: float,
        n_snapshots: int) -> FimReport:
    """Fisher information matrix of the joint direction/range parameters.

    amplitude_corr is the P x P Hermitian PSD snapshot-averaged amplitude
    correlation matrix.  The CRB (inverse) and per-target diagonal pairs
    are attached when the FIM condition number stays below 1e12.
    """
    p = scene.n_targets
    if p == 0:
        raise ValueError("scene must contain at least one target")
    s_mat = np.asarray(amplitude_corr, dtype=complex)
    if s_mat.shape != (p, p):
        raise ValueError("amplitude correlation must be P x P")
    if np.linalg.norm(s_mat - s_mat.conj().T) > 1e-9 * max(np.linalg.norm(s_mat), 1e-300):
        raise ValueError("amplitude correlation must be Hermitian")
    eigs = np.linalg.eigvalsh(s_mat)
    if eigs.min() < -1e-9 * max(abs(eigs.max()), 1e-300):
        raise ValueError("amplitude correlation must be positive semi-definite")
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")

    n = cfg.n_elements
    a = np.empty((n, p), dtype=complex)
    d = np.empty((n, 2 * p), dtype=complex)
    for i, t in enumerate(scene.targets):
        b, d_theta, d_range = steering_jacobian(cfg, draw, t.direction, t.range_m)
        a[:, i] = b
        d[:, 2 * i] = d_theta
        d[:, 2 * i + 1] = d_range

    proj, rank = _complement_projector(a)
    if rank < p:
        raise SingularityError("coincident targets: steering matrix is rank-deficient")

    c = d.conj().T @ proj @ d
    expand = np.kron(s_mat.T, np.ones((2, 2)))
    j = (2.0 * n_snapshots / noise_power) * np.real(c * expand)
    j = 0.5 * (j + j.T)

    condition = float(np.linalg.cond(j))
    crb = None
    per_target = None
    if np.isfinite(condition) and condition < _CRB_CONDITION_LIMIT:
        crb = np.linalg.solve(j, np.eye(2 * p))
        crb = 0.5 * (crb + crb.T)
        per_target = tuple((float(crb[2 * i, 2 * i]), float(crb[2 * i + 1, 2 * i + 1]))
                           for i in range(p))
    return FimReport(j, crb, per_target, condition)


def crb_uncorrelated(cfg: ArrayConfig, draw: FrequencyDraw, scene: TargetScene,
                     target_index: int, noise_power: float, n_snapshots: int,
                     s_ii: float):
    """Closed-form CRBs of one target's direction and range estimates.

    Valid when amplitudes across targets are uncorrelated (the Fisher
    matrix is then block diagonal).  s_ii is the target's mean squared
    amplitude.  Raises SingularityError when the coupling coefficient
    vanishes, which happens exactly for the linear frequency ramp
    m = n - (N-1)/2 where direction and range are inseparable.
    """
    if not 0 <= target_index < scene.n_targets:
        raise ValueError("target_index out of range")
    if s_ii <= 0:
        raise ValueError("s_ii must be positive")
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    tgt = scene.targets[target_index]

    n = cfg.n_elements
    a = np.empty((n, scene.n_targets), dtype=complex)
    for i, t in enumerate(scene.targets):
        a[:, i] = steering_vector(cfg, draw, t.direction, t.range_m)
    proj, rank = _complement_projector(a)
    if rank < scene.n_targets:
        raise SingularityError("coincident targets: steering matrix is rank-deficient")

    b = a[:, target_index]
    idx = cfg.centered_index
    pm = proj @ (draw.offsets * b)
    pn = proj @ (idx * b)
    norm_m = float(np.real(np.vdot(pm, pm)))
    norm_n = float(np.real(np.vdot(pn, pn)))
    cross = complex(np.vdot(pm, pn))
    gamma = norm_m * norm_n - 0.5 * abs(cross) ** 2 - 0.5 * (cross**2).real

    scale = max(norm_m * norm_n, 1e-300)
    if gamma < -1e-9 * scale:
        raise AssertionError("coupling coefficient fell below zero")
    if gamma <= 1e-12 * scale:
        raise SingularityError(
            "coupling coefficient is zero: linearly ramped frequencies (m = n) "
            "couple direction and range, so the bounds diverge")

    k_theta = 4.0 * np.pi * cfg.center_freq * cfg.spacing * np.cos(tgt.direction) / cfg.wave_speed
    k_range = 4.0 * np.pi * cfg.freq_increment / cfg.wave_speed
    common = noise_power / (2.0 * n_snapshots * s_ii * gamma)
    crb_theta = common * norm_m / k_theta**2
    crb_range = common * norm_n / k_range**2
    return crb_theta, crb_range


@dataclass(frozen=True)
class CoherenceReport:
    """Mutual coherence of an observing matrix plus the derived guarantees."""

    mu: float
    argmax_pair: tuple
    n_elements: int
    m_levels: int

    def bound_prob(self, r: float) -> float:
        """Lower bound on Pr{mu < r} for discrete-uniform canonical grids."""
        return coherence_prob_bound(self.m_levels, self.n_elements, r)

    def k_exact(self, epsilon: float) -> int:
        return exact_recovery_sparsity(self.m_levels, self.n_elements, epsilon)

    def qcbp_error(self, sparsity: int, epsilon: float, sigma_l: float,
                   sigma_n: float) -> float:
        return qcbp_error_bound(sparsity, self.m_levels, self.n_elements,
                                epsilon, sigma_l, sigma_n)


def mutual_coherence(obs: ObservingMatrix) -> CoherenceReport:
    """Largest normalized inner product between distinct columns.

    Brute force over all column pairs (chunked), reporting the attaining
    pair.  On a canonical grid this equals the beampattern's highest
    random sidelobe.
    """
    a = obs.columns
    n_cols = a.shape[1]
    if n_cols < 2:
        raise ValueError("mutual coherence needs at least two columns")
    norms = np.linalg.norm(a, axis=0)
    best = -1.0
    pair = (0, 1)
    chunk = max(1, int(4e6) // n_cols)
    for lo in range(0, n_cols, chunk):
        hi = min(lo + chunk, n_cols)
        g = np.abs(a[:, lo:hi].conj().T @ a)
        g /= np.outer(norms[lo:hi], norms)
        g[np.arange(lo, hi) - lo, np.arange(lo, hi)] = 0.0
        flat = int(np.argmax(g))
        i, h = divmod(flat, n_cols)
        if g[i, h] > best:
            best = float(g[i, h])
            pair = (lo + i, h)
    return CoherenceReport(best, pair, a.shape[0], obs.grid.n_ranges)


def coherence_prob_bound(m_levels: int, n_elements: int, r: float) -> float:
    """Lower bound on Pr{mu < r}: 1 - (M-1)*N*exp(-N*r^2), clamped to [0, 1]."""
    val = 1.0 - (m_levels - 1) * n_elements * math.exp(-n_elements * r * r)
    return min(max(val, 0.0), 1.0)


def exact_recovery_sparsity(m_levels: int, n_elements: int, epsilon: float) -> int:
    """Largest K recoverable with probability > 1 - epsilon (noiseless).

    K <= (1/2) * (1 + sqrt(N / (ln(M*N - N) - ln(epsilon)))).
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if m_levels < 2:
        raise ValueError("m_levels must be >= 2")
    denom = math.log(m_levels * n_elements - n_elements) - math.log(epsilon)
    bound = 0.5 * (1.0 + math.sqrt(n_elements / denom))
    return int(math.floor(bound))


def qcbp_error_bound(sparsity: int, m_levels: int, n_elements: int,
                     epsilon: float, sigma_l: float, sigma_n: float) -> float:
    """Reconstruction-error bound for quadratically constrained basis pursuit.

    sqrt(3*(1+eta)) / (1 - (2K-1)*eta) * (sigma_l + sigma_n) with
    eta = sqrt((ln N + ln(M-1) - ln eps)/N); requires (2K-1)*eta < 1.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if sparsity < 1:
        raise ValueError("sparsity must be >= 1")
    if m_levels < 2:
        raise ValueError("m_levels must be >= 2")
    eta = math.sqrt((math.log(n_elements) + math.log(m_levels - 1)
                     - math.log(epsilon)) / n_elements)
    if (2 * sparsity - 1) * eta >= 1.0:
        raise ValueError("bound inapplicable: (2K-1)*eta >= 1")
    return math.sqrt(3.0 * (1.0 + eta)) / (1.0 - (2 * sparsity - 1) * eta) * (sigma_l + sigma_n)


@dataclass(frozen=True)
class MlEstimate:
    direction: float
    range_m: float
    objective: float
    coarse_index: int
    guaranteed_global: bool = False


def _golden_minimize(fun, lo, hi, tol):
    """Golden-section minimizer of fun on [lo, hi] to interval width tol."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (a + b) / 2.0


def ml_estimate(cfg: ArrayConfig, draw: FrequencyDraw, echo: EchoMatrix,
                search, theta_tol: float = 1e-6, range_tol: float = 1e-4,
                n_candidates: int = 5) -> MlEstimate:
    """Single-target maximum-likelihood direction/range estimate.

    Maximizes the snapshot-summed matched-filter power on a coarse grid,
    then refines the few strongest coarse cells with two passes of
    coordinate-wise golden-section search (tolerances theta_tol rad and
    range_tol m) and keeps the best refined objective.  Refining several
    candidates removes the coarse scan's scalloping loss for mid-cell
    targets.  `search` is either a DirectionRangeGrid or a prebuilt
    ObservingMatrix for the same draw.  The result is the best point
    found; global optimality is not guaranteed.
    """
    if isinstance(search, DirectionRangeGrid):
        obs = build_observing_matrix(cfg, draw, search)
    elif isinstance(search, ObservingMatrix):
        obs = search
    else:
        raise TypeError("search must be a DirectionRangeGrid or ObservingMatrix")
    grid = obs.grid

    power = (np.abs(obs.columns.conj().T @ echo.samples) ** 2).sum(axis=1)
    order = np.argsort(-power, kind="stable")
    candidates = order[:max(1, min(n_candidates, power.size))]

    def objective(theta, r):
        b = steering_vector(cfg, draw, theta, r)
        return float((np.abs(b.conj() @ echo.samples) ** 2).sum())

    dirs, rngs = grid.directions, grid.ranges
    dir_step = np.diff(dirs).max() if dirs.size > 1 else 0.01
    rng_step = np.diff(rngs).max() if rngs.size > 1 else 1.0
    theta_lim = np.pi / 2 - 1e-9

    best = None
    for coarse in candidates:
        coarse = int(coarse)
        theta0, r0 = grid.point(coarse)
        i_rng, i_dir = divmod(coarse, grid.n_directions)
        t_lo = max(dirs[i_dir - 1] if i_dir > 0 else theta0 - dir_step, -theta_lim)
        t_hi = min(dirs[i_dir + 1] if i_dir < dirs.size - 1 else theta0 + dir_step, theta_lim)
        r_lo = max(rngs[i_rng - 1] if i_rng > 0 else r0 - rng_step, 0.0)
        r_hi = rngs[i_rng + 1] if i_rng < rngs.size - 1 else r0 + rng_step

        theta_hat, r_hat = theta0, r0
        for _ in range(2):
            theta_hat = _golden_minimize(lambda t: -objective(t, r_hat), t_lo, t_hi, theta_tol)
            r_hat = _golden_minimize(lambda r: -objective(theta_hat, r), r_lo, r_hi, range_tol)
        value = objective(theta_hat, r_hat)
        if best is None or value > best[0]:
            best = (value, theta_hat, r_hat, coarse)

    value, theta_hat, r_hat, coarse = best
    return MlEstimate(float(theta_hat), float(r_hat), value, coarse)
