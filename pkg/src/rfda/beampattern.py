"""Beampattern of the random frequency diverse array and its statistics.

The beampattern beta(q, p) is the normalized inner product between
steering vectors at two direction-range points, written in the
normalized offsets q (direction-sine difference scale) and p (range
difference scale).  For a random draw of frequency multipliers it is a
stochastic process in (q, p); this module provides exact evaluation, the
analytic mean/variance/asymptotic-Gaussian moments, the Marcum-Q
sidelobe exceedance law, Monte Carlo estimators, and a KS normality
test.
"""

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy import special as sp_special

from . import kernels
from .model import ArrayConfig, FrequencyDistribution, FrequencyDraw, dirichlet_kernel, sample_frequencies

__all__ = [
    "NormalizedOffset",
    "BeampatternMoments",
    "EmpiricalStats",
    "KsResult",
    "beampattern_value",
    "rho_value",
    "lfda_beampattern",
    "mean_beampattern",
    "variance_beampattern",
    "asymptotic_moments",
    "marcum_q1",
    "sidelobe_ccdf",
    "rho_trials",
    "monte_carlo_stats",
    "ks_normality_test",
]


@dataclass(frozen=True)
class NormalizedOffset:
    """Dimensionless direction/range offsets between two array pointings.

    q = 2*(sin(theta1) - sin(theta2))*f_c*d/c
    p = 2*(r1 - r2)*df/c
    delta = df/f_c
    """

    q: float
    p: float
    delta: float

    @classmethod
    def for_config(cls, cfg: ArrayConfig, q: float, p: float):
        return cls(float(q), float(p), cfg.delta)

    @classmethod
    def from_physical(cls, cfg: ArrayConfig, theta1, r1, theta2, r2):
        q = 2.0 * (np.sin(theta1) - np.sin(theta2)) * cfg.center_freq * cfg.spacing / cfg.wave_speed
        p = 2.0 * (r1 - r2) * cfg.freq_increment / cfg.wave_speed
        return cls(float(q), float(p), cfg.delta)

    @property
    def alpha(self):
        """Carrier phase 2*pi*p/delta."""
        return 2.0 * np.pi * self.p / self.delta


def rho_value(draw: FrequencyDraw, q: float, p: float) -> complex:
    """Carrier-stripped beampattern (1/N) * sum_n exp(j*2*pi*(idx_n*q + m_n*p))."""
    m = draw.offsets
    n = m.size
    idx = np.arange(n) - (n - 1) / 2.0
    return complex(np.exp(2j * np.pi * (idx * q + m * p)).sum() / n)


def beampattern_value(cfg: ArrayConfig, draw: FrequencyDraw, offset: NormalizedOffset) -> complex:
    """Exact beampattern of one draw at the given offset; |beta| <= 1."""
    return complex(np.exp(1j * offset.alpha) * rho_value(draw, offset.q, offset.p))


def lfda_beampattern(cfg: ArrayConfig, offset: NormalizedOffset) -> complex:
    """Beampattern of the linearly shifted array; magnitude depends on p + q only."""
    n = cfg.n_elements
    idx = cfg.centered_index
    s = np.exp(2j * np.pi * (offset.p + offset.q) * idx).sum() / n
    return complex(np.exp(1j * offset.alpha) * s)


def mean_beampattern(dist: FrequencyDistribution, cfg: ArrayConfig,
                     offset: NormalizedOffset) -> complex:
    """Expected beampattern over draws: exp(j*alpha) * Dirichlet(q) * MGF(p)."""
    sa_q = dirichlet_kernel(offset.q, cfg.n_elements)
    return complex(np.exp(1j * offset.alpha) * sa_q * dist.mgf(offset.p))


def variance_beampattern(dist: FrequencyDistribution, cfg: ArrayConfig, p: float) -> float:
    """Variance of the beampattern, (1 - MGF(p)^2)/N; independent of q."""
    phi = dist.mgf(p)
    return (1.0 - phi * phi) / cfg.n_elements


@dataclass(frozen=True)
class BeampatternMoments:
    """Asymptotic joint-Gaussian moments of (Re beta, Im beta).

    sigma_r2/sigma_i2 are the variances of the real/imaginary parts in
    the carrier-stripped frame (where the cross-covariance vanishes);
    covariance is the rotated 2x2 matrix for beta itself.
    square_centered is E{(rho - mean rho)^2}, real in this frame.
    """

    mean: np.ndarray
    covariance: np.ndarray
    sigma_r2: float
    sigma_i2: float
    square_centered: float


def asymptotic_moments(dist: FrequencyDistribution, cfg: ArrayConfig,
                       offset: NormalizedOffset) -> BeampatternMoments:
    n = cfg.n_elements
    phi_p = float(dist.mgf(offset.p))
    phi_2p = float(dist.mgf(2.0 * offset.p))
    sa_q = float(dirichlet_kernel(offset.q, n))
    sa_2q = float(dirichlet_kernel(2.0 * offset.q, n))
    alpha = offset.alpha

    amp = sa_q * phi_p
    mean = amp * np.array([np.cos(alpha), np.sin(alpha)])

    spread = sa_2q * (phi_p**2 - phi_2p)
    sigma_r2 = max((1.0 - phi_p**2 - spread) / (2.0 * n), 0.0)
    sigma_i2 = max((1.0 - phi_p**2 + spread) / (2.0 * n), 0.0)

    c, s = np.cos(alpha), np.sin(alpha)
    rot = np.array([[c, -s], [s, c]])
    cov = rot @ np.diag([sigma_r2, sigma_i2]) @ rot.T

    square_centered = sa_2q * (phi_2p - phi_p**2) / n
    return BeampatternMoments(mean, cov, sigma_r2, sigma_i2, square_centered)


def marcum_q1(a: float, b: float, tol: float = 1e-12) -> float:
    """First-order Marcum Q-function Q1(a, b).

    Canonical series over Poisson weights, expanded outward from the
    weight mode so large arguments do not underflow; terms stop once the
    remaining weight mass is below tol.  Absolute error < 1e-10 over the
    full non-negative quadrant (validated against quadrature in tests).
    """
    if a < 0 or b < 0:
        raise ValueError("Marcum Q arguments must be non-negative")
    la = 0.5 * a * a
    lb = 0.5 * b * b
    if lb == 0.0:
        return 1.0
    if la == 0.0:
        return math.exp(-lb)

    k0 = int(la)
    log_wa = k0 * math.log(la) - la - math.lgamma(k0 + 1)
    wa = math.exp(log_wa)
    # P{Poisson(lb) <= k0} and its pmf at k0, both stable at any scale
    cdfb0 = float(sp_special.gammaincc(k0 + 1, lb))
    log_wb = k0 * math.log(lb) - lb - math.lgamma(k0 + 1)
    wb0 = math.exp(log_wb)

    total = wa * cdfb0
    # upward sweep from the mode
    w, cdfb, pb, k = wa, cdfb0, wb0, k0
    while True:
        k += 1
        w *= la / k
        pb *= lb / k
        cdfb = min(cdfb + pb, 1.0)
        total += w * cdfb
        if k > la and w < tol * max(total, 1e-300):
            break
    # downward sweep
    w, cdfb, pb, k = wa, cdfb0, wb0, k0
    while k > 0:
        cdfb = max(cdfb - pb, 0.0)
        pb *= k / lb
        w *= k / la
        k -= 1
        total += w * cdfb
        if w < tol * max(total, 1e-300):
            break
    return min(max(total, 0.0), 1.0)


def sidelobe_ccdf(dist: FrequencyDistribution, cfg: ArrayConfig,
                  offset: NormalizedOffset, r: float) -> float:
    """Pr{|beta(q, p)| > r} under the asymptotic Gaussian law.

    Rice exceedance Q1(a/tau, r/tau) with a the mean magnitude and
    tau^2 = (1 - MGF(p)^2)/(2N).  When the beampattern is deterministic
    (tau = 0) the exceedance degenerates to an indicator.
    """
    if r < 0:
        raise ValueError("threshold r must be non-negative")
    n = cfg.n_elements
    phi = float(dist.mgf(offset.p))
    a = abs(float(dirichlet_kernel(offset.q, n)) * phi)
    tau2 = (1.0 - phi * phi) / (2.0 * n)
    if tau2 <= 0.0:
        return 1.0 if a > r else 0.0
    tau = math.sqrt(tau2)
    return marcum_q1(a / tau, r / tau)


def rho_trials(dist: FrequencyDistribution, cfg: ArrayConfig, q, p,
               n_trials: int, seed: int, n_threads: int = 0,
               chunk: int = 256) -> np.ndarray:
    """Carrier-stripped beampattern samples over Monte Carlo draws.

    Trial t draws its multipliers from the stream (seed, t), so the
    (n_trials, n_offsets) result is independent of chunking and thread
    count.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if q.shape != p.shape:
        raise ValueError("q and p must have equal length")
    n = cfg.n_elements
    out = np.empty((n_trials, q.size), dtype=complex)

    def run_chunk(lo):
        hi = min(lo + chunk, n_trials)
        m = np.empty((hi - lo, n))
        for t in range(lo, hi):
            m[t - lo] = sample_frequencies(dist, n, seed, index=t).offsets
        kernels.rho_pointwise(m, q, p, out=out[lo:hi])

    starts = list(range(0, n_trials, chunk))
    if n_threads == 1 or len(starts) == 1:
        for lo in starts:
            run_chunk(lo)
    else:
        workers = n_threads if n_threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, starts))
    return out


@dataclass(frozen=True)
class EmpiricalStats:
    """Monte Carlo estimates at one (q, p) offset."""

    n_trials: int
    mean_est: complex
    var_est: float
    square_centered_est: complex
    rho_samples: Optional[np.ndarray] = None


def monte_carlo_stats(dist: FrequencyDistribution, cfg: ArrayConfig, offsets,
                      n_trials: int, seed: int, keep_samples: bool = False,
                      n_threads: int = 0):
    """Empirical beampattern statistics at each offset over i.i.d. draws.

    Returns one EmpiricalStats per offset: mean of beta, variance, the
    centered square E{(rho - mean rho)^2}, and optionally the raw rho
    samples for distribution testing.  Variances use a two-pass formula
    so deterministic offsets (p = 0) come out exactly zero.
    """
    if n_trials < 2:
        raise ValueError("n_trials must be >= 2")
    offsets = list(offsets)
    q = np.array([o.q for o in offsets])
    p = np.array([o.p for o in offsets])
    rho = rho_trials(dist, cfg, q, p, n_trials, seed, n_threads=n_threads)

    mean_rho = rho.sum(axis=0) / n_trials
    centered = rho - mean_rho
    var = (centered.real**2 + centered.imag**2).sum(axis=0) / n_trials
    sq = (centered**2).sum(axis=0) / n_trials
    phase = np.exp(1j * np.array([o.alpha for o in offsets]))
    mean_beta = phase * mean_rho

    stats = []
    for g in range(len(offsets)):
        stats.append(EmpiricalStats(
            n_trials=n_trials,
            mean_est=complex(mean_beta[g]),
            var_est=float(var[g]),
            square_centered_est=complex(sq[g]),
            rho_samples=rho[:, g].copy() if keep_samples else None,
        ))
    return stats


@dataclass(frozen=True)
class KsResult:
    statistic: float
    threshold: float
    passed: bool


def ks_normality_test(samples, alpha: float = 0.05) -> KsResult:
    """One-sample Kolmogorov-Smirnov test against the standard normal.

    The caller standardizes the samples; the asymptotic threshold is
    c(alpha)/sqrt(n) with c(0.05) = 1.3581.  Fewer than 50 samples are
    rejected because the asymptotic threshold is unreliable there.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 50:
        raise ValueError("need at least 50 samples for the asymptotic KS threshold")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    cdf = sp_special.ndtr(x)
    grid = np.arange(1, n + 1) / n
    statistic = float(max((grid - cdf).max(), (cdf - (grid - 1.0 / n)).max()))
    threshold = float(sp_special.kolmogi(alpha)) / math.sqrt(n)
    return KsResult(statistic, threshold, statistic < threshold)
