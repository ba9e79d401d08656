import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import rfda
from rfda.beampattern import rho_value
from rfda.model import dirichlet_kernel
from rfda.processing import (
    DirectionRangeGrid,
    RecoveryResult,
    build_observing_matrix,
    canonical_grid,
    canonical_sine_grid,
    detection_success,
    focuss_recover,
    gsp_recover,
    matched_filter,
    mfocuss_recover,
    noise_tolerance,
    sp_recover,
    zero_padding_2dfft,
)
from rfda.rng import substream


class TestGrid:
    def test_axis_validation(self):
        with pytest.raises(ValueError):
            DirectionRangeGrid(np.array([0.2, 0.1]), np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            DirectionRangeGrid(np.array([0.0, np.pi / 2]), np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            DirectionRangeGrid(np.array([0.0, 0.1]), np.array([-1.0, 1.0]))

    def test_flat_index_roundtrip(self, grid):
        for flat in (0, 5, grid.n_points - 1):
            theta, r = grid.point(flat)
            i_rng, i_dir = divmod(flat, grid.n_directions)
            assert grid.flat_index(i_dir, i_rng) == flat
            assert theta == grid.directions[i_dir]
            assert r == grid.ranges[i_rng]

    def test_nearest_index(self, grid):
        flat = grid.flat_index(7, 3)
        theta, r = grid.point(flat)
        assert grid.nearest_index(theta + 1e-4, r + 0.2) == flat

    def test_canonical_satisfies_lattice_conditions(self, cfg, grid):
        # Definition-level property: mutual direction offsets hit the
        # zeros of the array pattern; mutual range offsets hit the
        # discrete-uniform MGF lattice {0, 1}.
        n = cfg.n_elements
        u = np.sin(grid.directions)
        q = 2 * cfg.center_freq * cfg.spacing * (u[:, None] - u[None, :]) / cfg.wave_speed
        vals = np.abs(dirichlet_kernel(q, n))
        offdiag = vals[~np.eye(len(u), dtype=bool)]
        assert offdiag.max() < 1e-10
        p = 2 * cfg.freq_increment * (grid.ranges[:, None] - grid.ranges[None, :]) / cfg.wave_speed
        mgf = dirichlet_kernel(p, 32)
        mask = ~np.eye(len(grid.ranges), dtype=bool)
        assert np.abs(mgf[mask]).max() < 1e-10

    def test_canonical_counts(self, cfg, grid):
        assert grid.n_directions == cfg.n_elements
        assert grid.n_ranges == 32
        assert grid.ranges[0] == 0.0
        # one unambiguous range period: max range below c/(2*df)
        assert grid.ranges[-1] < cfg.wave_speed / (2 * cfg.freq_increment)


class TestObservingMatrix:
    def test_single_point_grid(self, cfg, draw):
        tiny = DirectionRangeGrid(np.array([0.0]), np.array([0.0]))
        obs = build_observing_matrix(cfg, draw, tiny)
        assert obs.columns.shape == (cfg.n_elements, 1)
        assert np.allclose(obs.columns[:, 0], 1.0)

    def test_column_norms(self, obs, cfg):
        norms = np.linalg.norm(obs.columns, axis=0)
        assert np.allclose(norms, np.sqrt(cfg.n_elements), atol=1e-10)

    def test_columns_are_steering_vectors(self, cfg, draw, grid, obs):
        rng = np.random.default_rng(0)
        for flat in rng.choice(grid.n_points, 12, replace=False):
            theta, r = grid.point(int(flat))
            assert np.allclose(obs.columns[:, flat],
                               rfda.steering_vector(cfg, draw, theta, r), atol=1e-12)

    def test_zero_offset_gram_structure(self, cfg, grid):
        # all-zero multipliers: direction blocks orthogonal, range rank-1
        zeros = rfda.FrequencyDraw(np.zeros(cfg.n_elements))
        obs = build_observing_matrix(cfg, zeros, grid)
        n = cfg.n_elements
        sub = obs.columns[:, : 3 * n]  # three range slices
        g = np.abs(sub.conj().T @ sub)
        expect = np.tile(n * np.eye(n), (3, 3))
        assert np.allclose(g, expect, atol=1e-8)

    def test_draw_mismatch(self, cfg, grid):
        with pytest.raises(ValueError):
            build_observing_matrix(cfg, rfda.FrequencyDraw(np.zeros(5)), grid)


class TestMatchedFilter:
    def test_unit_peak(self, cfg, draw, grid, obs):
        flat = grid.flat_index(11, 9)
        theta, r = grid.point(flat)
        echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r), 0.0, 0)
        out = matched_filter(echo, obs)
        assert out[flat] == pytest.approx(1.0, abs=1e-12)
        assert np.argmax(out) == flat

    def test_direction_slice_is_dirichlet(self, cfg, draw, grid, obs):
        # same range, direction offset q: deterministic pattern value
        i_dir, i_rng = 20, 5
        flat = grid.flat_index(i_dir, i_rng)
        theta, r = grid.point(flat)
        echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r), 0.0, 0)
        out = matched_filter(echo, obs)
        u = np.sin(grid.directions)
        for j in (3, 17, 40):
            q = 2 * cfg.center_freq * cfg.spacing * (u[j] - u[i_dir]) / cfg.wave_speed
            expect = abs(dirichlet_kernel(q, cfg.n_elements))
            assert out[grid.flat_index(j, i_rng)] == pytest.approx(expect, abs=1e-10)

    def test_snapshot_modes(self, cfg, draw, grid, obs):
        theta, r = grid.point(40)
        scene = rfda.TargetScene.single(theta, r, 1.0, 4)
        echo = rfda.synthesize_echoes(cfg, draw, scene, 0.1, 1)
        per = matched_filter(echo, obs, per_snapshot=True)
        combined = matched_filter(echo, obs)
        assert per.shape == (grid.n_points, 4)
        assert np.allclose(combined, np.sqrt((per**2).mean(axis=1)))

    def test_dimension_mismatch(self, cfg, obs):
        bad = rfda.EchoMatrix(np.zeros((cfg.n_elements + 1, 1), dtype=complex))
        with pytest.raises(ValueError):
            matched_filter(bad, obs)


class TestZeroPadding2dfft:
    def _fft_direction_perm(self, cfg):
        return np.argsort(canonical_sine_grid(cfg))

    def test_on_grid_peak(self, cfg, draw, grid):
        flat = grid.flat_index(9, 13)
        theta, r = grid.point(flat)
        echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r), 0.0, 0)
        out = zero_padding_2dfft(echo.samples[:, 0], draw, 32)
        assert np.abs(out).max() == pytest.approx(cfg.n_elements, rel=1e-12)
        i_rng, k_bin = np.unravel_index(np.argmax(np.abs(out)), out.shape)
        assert i_rng == 13
        assert self._fft_direction_perm(cfg)[9] == k_bin

    def test_matches_matched_filter(self, cfg, draw, grid, obs):
        theta, r = grid.point(grid.flat_index(30, 21))
        echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r), 0.0, 0)
        direct = matched_filter(echo, obs).reshape(grid.n_ranges, grid.n_directions)
        fast = np.abs(zero_padding_2dfft(echo.samples[:, 0], draw, 32)) / cfg.n_elements
        fast = fast[:, self._fft_direction_perm(cfg)]
        assert np.abs(fast - direct).max() / direct.max() < 1e-10

    def test_single_level_reduces_to_dft(self, cfg):
        zeros = rfda.FrequencyDraw(np.zeros(cfg.n_elements))
        y = substream(3, "fft-test").standard_normal(cfg.n_elements) + 0j
        out = zero_padding_2dfft(y, zeros, 1)
        assert out.shape == (1, cfg.n_elements)
        k = np.arange(cfg.n_elements)
        dft = np.array([np.sum(y * np.exp(2j * np.pi * k * n / cfg.n_elements))
                        for n in range(cfg.n_elements)])
        assert np.allclose(out[0], dft, atol=1e-9)

    def test_oversampling_shape(self, cfg, draw):
        y = np.ones(cfg.n_elements, dtype=complex)
        out = zero_padding_2dfft(y, draw, 32, oversampling=(2, 3))
        assert out.shape == (64, 192)

    def test_off_grid_draw_rejected(self, cfg):
        bad = rfda.FrequencyDraw(np.full(cfg.n_elements, 0.3))
        with pytest.raises(ValueError):
            zero_padding_2dfft(np.ones(cfg.n_elements, dtype=complex), bad, 32)
        outside = rfda.FrequencyDraw(np.full(cfg.n_elements, 99.5))
        with pytest.raises(ValueError):
            zero_padding_2dfft(np.ones(cfg.n_elements, dtype=complex), outside, 32)

    def test_faster_than_direct(self):
        # the fast path should beat explicit correlation at transform size
        cfg = rfda.ArrayConfig(256, 0.025, 3e9, 1e6)
        dist = rfda.DiscreteUniform(128)
        draw = rfda.sample_frequencies(dist, 256, 1)
        grid = canonical_grid(cfg, 128)
        obs = build_observing_matrix(cfg, draw, grid)
        theta, r = grid.point(1000)
        echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r), 0.01, 2)

        def best_of(fn, n=3):
            ts = []
            for _ in range(n):
                t0 = time.perf_counter()
                fn()
                ts.append(time.perf_counter() - t0)
            return min(ts)

        t_direct = best_of(lambda: matched_filter(echo, obs))
        t_fft = best_of(lambda: zero_padding_2dfft(echo.samples[:, 0], draw, 128))
        assert t_fft < t_direct


class TestSubspacePursuit:
    def test_single_target(self, cfg, draw, grid, obs):
        flat = grid.flat_index(25, 3)
        theta, r = grid.point(flat)
        echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r, 0.7 + 0.2j), 0.0, 0)
        res = sp_recover(obs, echo.samples[:, 0], 1)
        assert list(res.support) == [flat]
        assert abs(res.amplitudes[0, 0] - (0.7 + 0.2j)) < 1e-10
        assert res.residual_norm < 1e-10

    def test_two_targets_random_draws(self, cfg, dist, grid):
        for trial in range(5):
            d = rfda.sample_frequencies(dist, cfg.n_elements, 100 + trial)
            o = build_observing_matrix(cfg, d, grid)
            rng = substream(200, "sp2", trial)
            flats = sorted(int(i) for i in rng.choice(grid.n_points, 2, replace=False))
            targets = tuple(rfda.Target(*grid.point(f), np.array([1.0 + 0j])) for f in flats)
            echo = rfda.synthesize_echoes(cfg, d, rfda.TargetScene(targets, 1), 0.0, 0)
            res = sp_recover(o, echo.samples[:, 0], 2)
            assert sorted(res.support) == flats

    def test_exhaustive_two_sparse_oracle(self, cfg, dist):
        # brute-force best 2-column fit on a small dictionary
        small_cfg = rfda.ArrayConfig(16, 0.025, 3e9, 1e6)
        small_dist = rfda.DiscreteUniform(4)
        d = rfda.sample_frequencies(small_dist, 16, 9)
        g = canonical_grid(small_cfg, 4)
        o = build_observing_matrix(small_cfg, d, g)
        rng = substream(300, "oracle")
        flats = sorted(int(i) for i in rng.choice(g.n_points, 2, replace=False))
        targets = tuple(rfda.Target(*g.point(f), np.array([1.2 + 0j])) for f in flats)
        echo = rfda.synthesize_echoes(small_cfg, d, rfda.TargetScene(targets, 1), 0.0, 0)
        y = echo.samples[:, 0]

        best, best_res = None, np.inf
        for i in range(g.n_points):
            for j in range(i + 1, g.n_points):
                cols = o.columns[:, [i, j]]
                coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
                res = np.linalg.norm(y - cols @ coef)
                if res < best_res:
                    best, best_res = (i, j), res
        assert list(best) == flats  # uniqueness of the oracle optimum
        res = sp_recover(o, y, 2)
        assert sorted(res.support) == flats

    def test_residual_decreases_from_init(self, cfg, draw, grid, obs):
        rng = substream(400, "resid")
        y = rng.standard_normal(cfg.n_elements) + 1j * rng.standard_normal(cfg.n_elements)
        res = sp_recover(obs, y, 3)
        an = obs.columns / np.linalg.norm(obs.columns, axis=0)
        init = np.argsort(-np.abs(an.conj().T @ y))[:3]
        coef, *_ = np.linalg.lstsq(an[:, init], y, rcond=None)
        init_res = np.linalg.norm(y - an[:, init] @ coef)
        assert res.residual_norm <= init_res + 1e-12

    def test_sparsity_validation(self, obs, cfg):
        y = np.ones(cfg.n_elements, dtype=complex)
        with pytest.raises(ValueError):
            sp_recover(obs, y, 0)
        with pytest.raises(ValueError):
            sp_recover(obs, y, cfg.n_elements)

    def test_coherence_recovery_condition(self, cfg, dist, grid):
        # mu < 1/3 guarantees exact 2-sparse recovery in the noiseless case
        from rfda.bounds import mutual_coherence
        for trial in range(8):
            d = rfda.sample_frequencies(dist, cfg.n_elements, 500 + trial)
            o = build_observing_matrix(cfg, d, grid)
            if mutual_coherence(o).mu >= 1 / 3:
                continue
            rng = substream(501, "cond", trial)
            flats = sorted(int(i) for i in rng.choice(grid.n_points, 2, replace=False))
            targets = tuple(rfda.Target(*grid.point(f), np.array([1.0 + 0j])) for f in flats)
            echo = rfda.synthesize_echoes(cfg, d, rfda.TargetScene(targets, 1), 0.0, 0)
            assert sorted(sp_recover(o, echo.samples[:, 0], 2).support) == flats


class TestMmvRecovery:
    def _scene(self, cfg, grid, n_targets, ell, seed):
        rng = substream(seed, "mmv-scene")
        flats = sorted(int(i) for i in rng.choice(grid.n_points, n_targets, replace=False))
        amps = np.exp(2j * np.pi * rng.random((n_targets, ell)))
        targets = tuple(rfda.Target(*grid.point(f), amps[j]) for j, f in enumerate(flats))
        return flats, rfda.TargetScene(targets, ell)

    def test_gsp_single_snapshot_equals_sp(self, cfg, draw, grid, obs):
        rng = substream(600, "collapse")
        y = rng.standard_normal(cfg.n_elements) + 1j * rng.standard_normal(cfg.n_elements)
        a = sp_recover(obs, y, 2)
        b = gsp_recover(obs, y[:, None], 2)
        assert np.array_equal(a.support, b.support)
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert a.residual_norm == b.residual_norm

    def test_gsp_fluctuating_targets(self, cfg, draw, grid, obs):
        flats, scene = self._scene(cfg, grid, 2, 16, 601)
        echo = rfda.synthesize_echoes(cfg, draw, scene, 0.0, 0)
        res = gsp_recover(obs, echo.samples, 2)
        assert sorted(res.support) == flats

    def test_snapshot_permutation_invariance(self, cfg, draw, grid, obs):
        flats, scene = self._scene(cfg, grid, 2, 6, 602)
        echo = rfda.synthesize_echoes(cfg, draw, scene, 0.5, 3)
        perm = [4, 0, 5, 2, 1, 3]
        a = gsp_recover(obs, echo.samples, 2)
        b = gsp_recover(obs, echo.samples[:, perm], 2)
        assert np.array_equal(a.support, b.support)
        c = mfocuss_recover(obs, echo.samples, 1.0, sparsity=2)
        d = mfocuss_recover(obs, echo.samples[:, perm], 1.0, sparsity=2)
        assert np.array_equal(c.support, d.support)


class TestFocuss:
    def test_zero_echo(self, cfg, obs):
        res = focuss_recover(obs, np.zeros(cfg.n_elements, dtype=complex), 1.0)
        assert res.support.size == 0
        assert res.converged
        assert res.residual_norm == 0.0

    def test_noiseless_single_target(self, cfg, draw, grid, obs):
        flat = grid.flat_index(14, 27)
        theta, r = grid.point(flat)
        amp = 0.8 - 0.3j
        echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r, amp), 0.0, 0)
        res = focuss_recover(obs, echo.samples[:, 0], 0.0)
        assert list(res.support) == [flat]
        assert abs(res.amplitudes[0, 0] - amp) / abs(amp) < 1e-6

    def test_mfocuss_single_snapshot_equals_focuss(self, cfg, obs):
        rng = substream(700, "focuss-collapse")
        y = rng.standard_normal(cfg.n_elements) + 1j * rng.standard_normal(cfg.n_elements)
        a = focuss_recover(obs, y, 2.0)
        b = mfocuss_recover(obs, y[:, None], 2.0)
        assert np.array_equal(a.support, b.support)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_zero_matrix(self, cfg, obs):
        res = mfocuss_recover(obs, np.zeros((cfg.n_elements, 5), dtype=complex), 1.0)
        assert res.support.size == 0

    def test_nonconvergence_reported(self, cfg, draw, grid, obs):
        rng = substream(701, "noconv")
        y = rng.standard_normal(cfg.n_elements) + 1j * rng.standard_normal(cfg.n_elements)
        res = focuss_recover(obs, y, 1.0, max_iter=2)
        assert not res.converged
        assert res.iterations == 2
        assert res.support.size > 0  # best iterate returned


class TestRecoveryResultAndDetection:
    def test_result_validation(self):
        with pytest.raises(ValueError):
            RecoveryResult(np.array([1, 1]), np.zeros((2, 1), dtype=complex), 0.0, 1, True)
        with pytest.raises(ValueError):
            RecoveryResult(np.array([1, 2]), np.zeros((1, 1), dtype=complex), 0.0, 1, True)
        with pytest.raises(ValueError):
            RecoveryResult(np.array([1]), np.zeros((1, 1), dtype=complex), -1.0, 1, True)

    def test_detection_semantics(self):
        res = RecoveryResult(np.array([3, 7, 1]), np.zeros((3, 1), dtype=complex), 0.1, 2, True)
        assert detection_success(res, {1, 3, 7})
        assert detection_success(res, [7, 1, 3])
        assert not detection_success(res, {1, 3})
        assert not detection_success(res, {1, 3, 7, 9})

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=6, unique=True))
    @settings(max_examples=40, deadline=None)
    def test_detection_order_free(self, indices):
        res = RecoveryResult(np.array(indices), np.zeros((len(indices), 1), dtype=complex), 0.0, 1, True)
        assert detection_success(res, list(reversed(indices)))

    def test_noise_tolerance_scale(self):
        # high-probability bound on the noise norm: above the rms, below 2x
        n, power = 64, 0.5
        tol = noise_tolerance(n, power)
        assert np.sqrt(n * power) < tol < 2 * np.sqrt(n * power)
