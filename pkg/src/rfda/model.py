"""Physical and statistical model of the random frequency diverse array.

A linear array of N elements transmits monotone sinusoids whose carrier
frequencies are f_c + m_n * df with i.i.d. random multipliers m_n.  This
module holds the array geometry, the frequency-offset distributions, the
direction-range steering vectors, and noisy echo synthesis.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rng import substream

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayConfig",
    "FrequencyDistribution",
    "Gaussian",
    "ContinuousUniform",
    "DiscreteUniform",
    "FrequencyDraw",
    "Target",
    "TargetScene",
    "EchoMatrix",
    "dirichlet_kernel",
    "element_positions",
    "sample_frequencies",
    "moment_generating",
    "steering_vector",
    "synthesize_echoes",
]

SPEED_OF_LIGHT = 2.99792458e8


def dirichlet_kernel(x, n):
    """Normalized Dirichlet kernel sin(n*pi*x) / (n*sin(pi*x)).

    Equals 1 at x = 0 and, more generally, +/-1 at integer x (the limit
    value (-1)^(x*(n-1))).  This is the classical direction pattern of an
    n-element uniform linear array, normalized to unit peak.
    """
    x = np.asarray(x, dtype=float)
    den = n * np.sin(np.pi * x)
    num = np.sin(n * np.pi * x)
    # at integer x both num and den vanish; substitute the limit
    near = np.isclose(np.sin(np.pi * x), 0.0, atol=1e-12)
    safe_den = np.where(near, 1.0, den)
    out = np.where(near, _integer_limit(x, n), num / safe_den)
    return out if out.ndim else float(out)


def _integer_limit(x, n):
    k = np.rint(x)
    return np.where(np.mod(k * (n - 1), 2) == 0, 1.0, -1.0)


@dataclass(frozen=True)
class ArrayConfig:
    """Array geometry and carrier plan.

    n_elements : element count N (>= 2)
    spacing : inter-element distance d in meters
    center_freq : center carrier frequency f_c in Hz
    freq_increment : frequency increment df in Hz (df << f_c)
    wave_speed : propagation speed in m/s
    """

    n_elements: int
    spacing: float
    center_freq: float
    freq_increment: float
    wave_speed: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.n_elements < 2:
            raise ValueError("n_elements must be >= 2")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.center_freq <= 0:
            raise ValueError("center_freq must be positive")
        if not 0 < self.freq_increment < self.center_freq:
            raise ValueError("freq_increment must satisfy 0 < df < f_c")
        if self.wave_speed <= 0:
            raise ValueError("wave_speed must be positive")

    @property
    def delta(self):
        """Relative increment df / f_c."""
        return self.freq_increment / self.center_freq

    @property
    def centered_index(self):
        """Index vector [-(N-1)/2, ..., (N-1)/2]."""
        n = self.n_elements
        return np.arange(n) - (n - 1) / 2.0


def element_positions(cfg: ArrayConfig) -> np.ndarray:
    """Element x-coordinates (meters), symmetric about the phase center."""
    return cfg.centered_index * cfg.spacing


class FrequencyDistribution:
    """Law of a single frequency multiplier m_n (even PDF, zero mean)."""

    def mgf(self, x):
        """E{exp(j*2*pi*m*x)}; real-valued because the PDF is even."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(FrequencyDistribution):
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def mgf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-2.0 * np.pi**2 * self.sigma**2 * x**2)
        return out if out.ndim else float(out)

    def sample(self, rng, n):
        return rng.normal(0.0, self.sigma, size=n)


@dataclass(frozen=True)
class ContinuousUniform(FrequencyDistribution):
    """Uniform density 1/M on [-M/2, M/2]."""

    m_span: float

    def __post_init__(self):
        if self.m_span <= 0:
            raise ValueError("m_span must be positive")

    def mgf(self, x):
        out = np.sinc(self.m_span * np.asarray(x, dtype=float))
        return out if out.ndim else float(out)

    def sample(self, rng, n):
        half = self.m_span / 2.0
        return rng.uniform(-half, half, size=n)


@dataclass(frozen=True)
class DiscreteUniform(FrequencyDistribution):
    """Probability 1/M on the grid {-(M-1)/2, -(M-1)/2 + 1, ..., (M-1)/2}."""

    m_levels: int

    def __post_init__(self):
        if self.m_levels < 1:
            raise ValueError("m_levels must be a positive integer")

    @property
    def support(self):
        return np.arange(self.m_levels) - (self.m_levels - 1) / 2.0

    def mgf(self, x):
        return dirichlet_kernel(x, self.m_levels)

    def sample(self, rng, n):
        return rng.integers(0, self.m_levels, size=n) - (self.m_levels - 1) / 2.0


def moment_generating(dist: FrequencyDistribution, x):
    """MGF of the frequency multiplier at x (range response of the array)."""
    return dist.mgf(x)


@dataclass(frozen=True)
class FrequencyDraw:
    """One sampled vector of per-element frequency multipliers."""

    offsets: np.ndarray
    seed: Optional[int] = None
    stream_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=float))
        if self.offsets.ndim != 1:
            raise ValueError("offsets must be a 1-D vector")

    def __len__(self):
        return self.offsets.size


def sample_frequencies(dist: FrequencyDistribution, n: int, seed: int,
                       index: int = 0) -> FrequencyDraw:
    """Draw n i.i.d. frequency multipliers from the stream (seed, index)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = substream(seed, "frequency-draw", index)
    return FrequencyDraw(dist.sample(rng, n), seed=seed, stream_index=index)


def linear_draw(cfg: ArrayConfig) -> FrequencyDraw:
    """Linearly shifted multipliers m_n = n - (N-1)/2 (the coupled LFDA case)."""
    return FrequencyDraw(cfg.centered_index.copy())


@dataclass(frozen=True)
class Target:
    direction: float
    range_m: float
    amplitudes: np.ndarray

    def __post_init__(self):
        if not -np.pi / 2 < self.direction < np.pi / 2:
            raise ValueError("direction must lie in (-pi/2, pi/2)")
        if self.range_m < 0:
            raise ValueError("range must be non-negative")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D vector")
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class TargetScene:
    """Point targets with per-snapshot complex amplitudes."""

    targets: tuple
    n_snapshots: int

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be >= 1")
        for t in self.targets:
            if t.amplitudes.size != self.n_snapshots:
                raise ValueError("every target needs one amplitude per snapshot")

    @property
    def n_targets(self):
        return len(self.targets)

    @classmethod
    def single(cls, direction, range_m, amplitude=1.0 + 0.0j, n_snapshots=1):
        amps = np.full(n_snapshots, amplitude, dtype=complex)
        return cls((Target(direction, range_m, amps),), n_snapshots)


@dataclass(frozen=True)
class EchoMatrix:
    """Baseband snapshots, one column per snapshot (N x L)."""

    samples: np.ndarray
    noise_power: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))
        if self.samples.ndim != 2:
            raise ValueError("samples must be an N x L matrix")
        if self.noise_power < 0:
            raise ValueError("noise_power must be non-negative")

    @property
    def n_elements(self):
        return self.samples.shape[0]

    @property
    def n_snapshots(self):
        return self.samples.shape[1]


def steering_vector(cfg: ArrayConfig, draw: FrequencyDraw, theta: float,
                    r: float, model: str = "approximate") -> np.ndarray:
    """Unit-modulus steering vector at direction theta (rad) and range r (m).

    The approximate model drops the m_n * df * x_n * sin(theta) cross
    term, which is negligible for df << f_c; "exact" keeps it.
    """
    if not -np.pi / 2 < theta < np.pi / 2:
        raise ValueError("theta must lie in (-pi/2, pi/2)")
    if r < 0:
        raise ValueError("range must be non-negative")
    if len(draw) != cfg.n_elements:
        raise ValueError("draw length does not match the element count")
    m = draw.offsets
    idx = cfg.centered_index
    k = 4.0 * np.pi / cfg.wave_speed
    phase = -k * (cfg.center_freq * r
                  + idx * cfg.center_freq * cfg.spacing * np.sin(theta)
                  + m * cfg.freq_increment * r)
    if model == "exact":
        phase = phase - k * m * cfg.freq_increment * idx * cfg.spacing * np.sin(theta)
    elif model != "approximate":
        raise ValueError("model must be 'approximate' or 'exact'")
    return np.exp(1j * phase)


def synthesize_echoes(cfg: ArrayConfig, draw: FrequencyDraw, scene: TargetScene,
                      noise_power: float, seed: int, index: int = 0,
                      model: str = "approximate") -> EchoMatrix:
    """Superimpose target echoes and circular complex Gaussian noise.

    noise_power is the total complex variance per element per snapshot
    (real and imaginary parts each carry half).
    """
    if noise_power < 0:
        raise ValueError("noise_power must be non-negative")
    n, ell = cfg.n_elements, scene.n_snapshots
    out = np.zeros((n, ell), dtype=complex)
    for t in scene.targets:
        b = steering_vector(cfg, draw, t.direction, t.range_m, model=model)
        out += np.outer(b, t.amplitudes)
    if noise_power > 0:
        rng = substream(seed, "echo-noise", index)
        scale = np.sqrt(noise_power / 2.0)
        out += scale * (rng.standard_normal((n, ell)) + 1j * rng.standard_normal((n, ell)))
    return EchoMatrix(out, noise_power)
