"""Target indication from echo data.

Builds direction-range dictionaries (observing matrices), runs matched
filtering directly or through the zero-padding 2D-FFT fast path, and
recovers sparse target supports with subspace pursuit and FOCUSS in
both single- and multiple-snapshot settings.
"""

from dataclasses import dataclass

import numpy as np

from .model import ArrayConfig, EchoMatrix, FrequencyDraw

__all__ = [
    "DirectionRangeGrid",
    "ObservingMatrix",
    "RecoveryResult",
    "canonical_sine_grid",
    "canonical_grid",
    "build_observing_matrix",
    "matched_filter",
    "zero_padding_2dfft",
    "noise_tolerance",
    "sp_recover",
    "gsp_recover",
    "focuss_recover",
    "mfocuss_recover",
    "detection_success",
]


@dataclass(frozen=True)
class DirectionRangeGrid:
    """Direction/range search lattice, flattened range-major.

    Flat index of (i_dir, i_rng) is i_rng * n_directions + i_dir.
    """

    directions: np.ndarray
    ranges: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        r = np.asarray(self.ranges, dtype=float)
        if d.ndim != 1 or r.ndim != 1 or d.size == 0 or r.size == 0:
            raise ValueError("directions and ranges must be non-empty vectors")
        if np.any(np.diff(d) <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        if d[0] <= -np.pi / 2 or d[-1] >= np.pi / 2:
            raise ValueError("directions must lie in (-pi/2, pi/2)")
        if r[0] < 0:
            raise ValueError("ranges must be non-negative")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "ranges", r)

    @property
    def n_directions(self):
        return self.directions.size

    @property
    def n_ranges(self):
        return self.ranges.size

    @property
    def n_points(self):
        return self.directions.size * self.ranges.size

    def flat_index(self, i_dir: int, i_rng: int) -> int:
        return int(i_rng) * self.n_directions + int(i_dir)

    def point(self, flat: int):
        """(direction, range) of a flat grid index."""
        i_rng, i_dir = divmod(int(flat), self.n_directions)
        return float(self.directions[i_dir]), float(self.ranges[i_rng])

    def nearest_index(self, direction: float, range_m: float) -> int:
        """Flat index of the grid point closest in (sine, range) space."""
        i_dir = int(np.argmin(np.abs(np.sin(self.directions) - np.sin(direction))))
        i_rng = int(np.argmin(np.abs(self.ranges - range_m)))
        return self.flat_index(i_dir, i_rng)


def canonical_sine_grid(cfg: ArrayConfig) -> np.ndarray:
    """Direction sines c*k/(2*f_c*d*N), k = 0..N-1, folded into one period.

    Folding is modulo the unambiguous sine period s = c/(2*f_c*d), into
    [-s/2, s/2), so mutual direction offsets stay exactly on the 1/N
    lattice where the array direction pattern has its zeros.  Returned in
    bin order (unsorted); these are the direction bins of the
    zero-padding FFT path.
    """
    n = cfg.n_elements
    s = cfg.wave_speed / (2.0 * cfg.center_freq * cfg.spacing)
    u = s * np.arange(n) / n
    u = np.mod(u + s / 2.0, s) - s / 2.0
    return u


def canonical_grid(cfg: ArrayConfig, m_levels: int) -> DirectionRangeGrid:
    """Grid on which steering-vector inner products take closed-form values.

    Direction sines as in canonical_sine_grid (sorted ascending); ranges
    r_i = c*i/(2*M*df), i = 0..M-1, covering one unambiguous period of
    the discrete-uniform range response.
    """
    u = np.sort(canonical_sine_grid(cfg))
    if np.any(np.diff(u) <= 1e-12):
        raise ValueError("direction grid aliases; increase spacing or element count")
    if abs(u[0]) >= 1.0 or abs(u[-1]) >= 1.0:
        raise ValueError("direction grid touches endfire; adjust spacing")
    ranges = cfg.wave_speed * np.arange(m_levels) / (2.0 * m_levels * cfg.freq_increment)
    return DirectionRangeGrid(np.arcsin(u), ranges)


@dataclass(frozen=True)
class ObservingMatrix:
    """Dictionary of steering vectors over a direction-range grid."""

    columns: np.ndarray
    grid: DirectionRangeGrid
    draw: FrequencyDraw

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=complex)
        if cols.ndim != 2 or cols.shape[1] != self.grid.n_points:
            raise ValueError("columns must be N x (n_directions * n_ranges)")
        object.__setattr__(self, "columns", cols)

    @property
    def n_elements(self):
        return self.columns.shape[0]

    @property
    def n_columns(self):
        return self.columns.shape[1]


def build_observing_matrix(cfg: ArrayConfig, draw: FrequencyDraw,
                           grid: DirectionRangeGrid,
                           model: str = "approximate") -> ObservingMatrix:
    """Steering vector at every grid point, one column per point."""
    if len(draw) != cfg.n_elements:
        raise ValueError("draw length does not match the element count")
    if model not in ("approximate", "exact"):
        raise ValueError("model must be 'approximate' or 'exact'")
    m = draw.offsets
    idx = cfg.centered_index
    k = 4.0 * np.pi / cfg.wave_speed
    u = np.sin(grid.directions)
    r = grid.ranges

    dir_part = np.exp(-1j * k * cfg.center_freq * cfg.spacing * np.outer(idx, u))
    rng_part = np.exp(-1j * k * cfg.freq_increment * np.outer(m, r))
    rng_part = rng_part * np.exp(-1j * k * cfg.center_freq * r)[None, :]
    if model == "exact":
        dir_part = dir_part * np.exp(-1j * k * cfg.freq_increment * cfg.spacing
                                     * np.outer(m * idx, u))
    # (N, Q, P) -> range-major flattening
    cols = (rng_part[:, :, None] * dir_part[:, None, :]).reshape(cfg.n_elements, -1)
    return ObservingMatrix(cols, grid, draw)


def matched_filter(echo: EchoMatrix, obs: ObservingMatrix, per_snapshot: bool = False):
    """Normalized matched-filter magnitude at every grid point.

    A unit-amplitude on-grid target in noiseless data yields 1 at its own
    grid index.  With several snapshots the default combines them by
    averaging |.|^2 across snapshots before the square root; with
    per_snapshot=True the (n_points, L) magnitude matrix is returned.
    """
    if echo.n_elements != obs.n_elements:
        raise ValueError("echo and observing matrix element counts differ")
    corr = obs.columns.conj().T @ echo.samples / obs.n_elements
    mag = np.abs(corr)
    if per_snapshot:
        return mag
    return np.sqrt((mag**2).mean(axis=1))


def zero_padding_2dfft(column, draw: FrequencyDraw, m_levels: int,
                       oversampling=(1, 1)) -> np.ndarray:
    """Fast matched filtering for discrete-uniform draws.

    Element n's baseband sample is placed at row m_n + (M-1)/2, column n
    of an M x N matrix; a zero-padded 2-D DFT (positive-exponent kernel)
    then evaluates the matched filter on the canonical lattice.  Output
    bin (i, k) corresponds to range offset p = i/(M*os_r) and direction
    offset q = k/(N*os_d), both modulo 1; magnitudes match direct matched
    filtering up to per-bin unit-modulus phases.
    """
    y = np.asarray(column, dtype=complex)
    if y.ndim != 1:
        raise ValueError("column must be a vector (one snapshot)")
    if len(draw) != y.size:
        raise ValueError("draw length does not match the echo length")
    os_r, os_d = int(oversampling[0]), int(oversampling[1])
    if os_r < 1 or os_d < 1:
        raise ValueError("oversampling factors must be >= 1")
    rows_f = draw.offsets + (m_levels - 1) / 2.0
    rows = np.rint(rows_f).astype(int)
    if np.max(np.abs(rows_f - rows)) > 1e-9:
        raise ValueError("draw is not on the discrete-uniform support grid")
    if rows.min() < 0 or rows.max() >= m_levels:
        raise ValueError("draw exceeds the discrete-uniform support grid")
    z = np.zeros((m_levels, y.size), dtype=complex)
    z[rows, np.arange(y.size)] = y
    shape = (m_levels * os_r, y.size * os_d)
    return np.conj(np.fft.fft2(np.conj(z), s=shape))


@dataclass(frozen=True)
class RecoveryResult:
    """Sparse-recovery output: support indices into the grid plus amplitudes."""

    support: np.ndarray
    amplitudes: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=int)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if sup.ndim != 1 or np.unique(sup).size != sup.size:
            raise ValueError("support must be unique indices")
        if amp.shape[0] != sup.size:
            raise ValueError("one amplitude row per support index required")
        if self.residual_norm < 0:
            raise ValueError("residual_norm must be non-negative")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def support_set(self):
        return frozenset(int(i) for i in self.support)


def _ls_coeffs(cols, rhs):
    """Least squares on selected columns, ridged when ill-conditioned."""
    gram = cols.conj().T @ cols
    proj = cols.conj().T @ rhs
    if np.linalg.cond(gram) > 1e12:
        gram = gram + 1e-10 * cols.shape[0] * np.eye(gram.shape[0])
    try:
        return np.linalg.solve(gram, proj)
    except np.linalg.LinAlgError:
        gram = gram + 1e-10 * cols.shape[0] * np.eye(gram.shape[0])
        return np.linalg.solve(gram, proj)


def _top_k(scores, k):
    order = np.argsort(-scores, kind="stable")
    return order[:k]


def _as_snapshots(echoes):
    r = np.asarray(echoes, dtype=complex)
    if r.ndim == 1:
        r = r[:, None]
    if r.ndim != 2:
        raise ValueError("echo data must be a vector or an N x L matrix")
    return r


def gsp_recover(obs: ObservingMatrix, echoes, sparsity: int,
                max_iter: int = 50) -> RecoveryResult:
    """Subspace pursuit with joint support across snapshots.

    Column scores are l2 norms of per-snapshot correlations; candidate
    supports are refit by joint least squares and pruned back to the
    target sparsity until the residual stops decreasing.
    """
    r = _as_snapshots(echoes)
    n, n_cols = obs.columns.shape
    if r.shape[0] != n:
        raise ValueError("echo and observing matrix element counts differ")
    if not 1 <= sparsity < n:
        raise ValueError("sparsity must satisfy 1 <= K < N")
    a = obs.columns
    norms = np.linalg.norm(a, axis=0)
    an = a / norms

    def residual_for(sup):
        coef = _ls_coeffs(an[:, sup], r)
        res = r - an[:, sup] @ coef
        return res, float(np.linalg.norm(res))

    score = np.linalg.norm(an.conj().T @ r, axis=1)
    support = np.sort(_top_k(score, sparsity))
    resid, res_norm = residual_for(support)

    iters = 0
    converged = False
    for iters in range(1, max_iter + 1):
        score = np.linalg.norm(an.conj().T @ resid, axis=1)
        extended = np.union1d(support, _top_k(score, sparsity))
        coef_ext = _ls_coeffs(an[:, extended], r)
        keep = _top_k(np.linalg.norm(coef_ext, axis=1), sparsity)
        candidate = np.sort(extended[keep])
        cand_resid, cand_norm = residual_for(candidate)
        if cand_norm >= res_norm:
            converged = True
            break
        support, resid, res_norm = candidate, cand_resid, cand_norm

    amplitudes = _ls_coeffs(a[:, support], r)
    return RecoveryResult(support, amplitudes, res_norm, iters, converged)


def sp_recover(obs: ObservingMatrix, echo_column, sparsity: int,
               max_iter: int = 50) -> RecoveryResult:
    """Single-snapshot subspace pursuit (the L = 1 case of gsp_recover)."""
    return gsp_recover(obs, _as_snapshots(echo_column), sparsity, max_iter=max_iter)


def noise_tolerance(n_values: int, noise_power: float) -> float:
    """High-probability bound on the noise l2 norm over n_values samples."""
    return float(np.sqrt((n_values + 2.0 * np.sqrt(2.0 * n_values)) * noise_power))


def mfocuss_recover(obs: ObservingMatrix, echoes, noise_tol: float,
                    p_norm: float = 0.8, max_iter: int = 100, tol: float = 1e-6,
                    support_threshold: float = 0.1, prune_tol: float = 1e-6,
                    sparsity=None, support_stall=None, screen=None) -> RecoveryResult:
    """Row-norm reweighted FOCUSS over joint snapshots.

    Tikhonov weight lambda = noise_tol^2 / (N*L), i.e. the single-snapshot
    rule sigma^2/N applied per snapshot; iterations stop when the relative
    iterate change drops below tol or max_iter is reached (converged=False
    then, best iterate returned).  The support is the rows whose norm
    exceeds support_threshold times the largest, or the `sparsity` largest
    rows when the target count is known.  Columns whose weight collapses
    below prune_tol of the maximum are dropped from later iterations; they
    cannot re-enter.

    Two deterministic shortcuts for Monte Carlo campaigns, both off by
    default: support_stall=k stops once the reported support has been
    unchanged for k consecutive iterations (counts as converged), and
    screen=C restricts the dictionary to the C columns best correlated
    with the data before iterating.
    """
    r = _as_snapshots(echoes)
    n, n_cols = obs.columns.shape
    if r.shape[0] != n:
        raise ValueError("echo and observing matrix element counts differ")
    ell = r.shape[1]
    lam = noise_tol**2 / (n * ell)

    if not np.any(r):
        empty = np.empty((0, ell), dtype=complex)
        return RecoveryResult(np.empty(0, dtype=int), empty, 0.0, 0, True)

    a = obs.columns
    if screen is not None and screen < n_cols:
        corr = np.linalg.norm(a.conj().T @ r, axis=1)
        active = np.sort(_top_k(corr, int(screen)))
    else:
        active = np.arange(n_cols)
    x = np.zeros((n_cols, ell), dtype=complex)
    c = np.ones(n_cols)
    exponent = 1.0 - p_norm / 2.0
    converged = False
    iters = 0
    eye = np.eye(n)

    def current_support(row_norm):
        peak = row_norm.max()
        if sparsity is not None:
            return tuple(np.sort(_top_k(row_norm, int(sparsity))))
        if peak == 0:
            return ()
        return tuple(np.flatnonzero(row_norm > support_threshold * peak))

    stall = 0
    last_support = None
    for iters in range(1, max_iter + 1):
        w = c[active] ** exponent
        aw = a[:, active] * w
        if lam > 0:
            if active.size <= n:
                gram = aw.conj().T @ aw + lam * np.eye(active.size)
                q = np.linalg.solve(gram, aw.conj().T @ r)
            else:
                q = aw.conj().T @ np.linalg.solve(aw @ aw.conj().T + lam * eye, r)
        else:
            q = np.linalg.lstsq(aw, r, rcond=None)[0]
        x_new = np.zeros_like(x)
        x_new[active] = w[:, None] * q
        change = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-300)
        x = x_new
        c = np.linalg.norm(x, axis=1)
        if change < tol:
            converged = True
            break
        if support_stall is not None:
            sup = current_support(c)
            stall = stall + 1 if sup == last_support else 0
            last_support = sup
            if stall >= support_stall:
                converged = True
                break
        peak = c[active].max()
        if peak > 0:
            active = active[c[active] > prune_tol * peak]

    row_norm = np.linalg.norm(x, axis=1)
    peak = row_norm.max()
    if sparsity is not None:
        support = np.sort(_top_k(row_norm, int(sparsity)))
    elif peak == 0:
        support = np.empty(0, dtype=int)
    else:
        support = np.flatnonzero(row_norm > support_threshold * peak)
    residual = float(np.linalg.norm(r - a @ x))
    return RecoveryResult(support, x[support], residual, iters, converged)


def focuss_recover(obs: ObservingMatrix, echo_column, noise_tol: float,
                   **kwargs) -> RecoveryResult:
    """Single-snapshot reweighted minimum-norm recovery (M-FOCUSS with L = 1)."""
    return mfocuss_recover(obs, _as_snapshots(echo_column), noise_tol, **kwargs)


def detection_success(result: RecoveryResult, truth) -> bool:
    """True iff the recovered support set equals the true one."""
    return result.support_set == frozenset(int(i) for i in truth)
