import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swiptia import (
    DegenerateScenarioError,
    NetworkConfig,
    OptimizerSettings,
    grid_oracle,
    init_ps_high_snr,
    newton_root,
    optimize_ps,
    sinr_derivative,
    sinr_destination,
)
from swiptia.ps_optimizer import derivative_context, link_problem
from swiptia.swipt_relay import sinr_all

from conftest import aligned_scenario, make_aggregates, random_scenario


def _fd(cfg, agg, rho, i, h=1e-6):
    up, dn = rho.copy(), rho.copy()
    up[i] += h
    dn[i] -= h
    return (sinr_destination(cfg, agg, up, i) - sinr_destination(cfg, agg, dn, i)) / (2 * h)


class TestDerivative:
    def test_matches_finite_difference(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            cfg, agg, rho = random_scenario(rng)
            i = int(rng.integers(cfg.K))
            rho[i] = 0.4
            f = sinr_derivative(cfg, agg, rho, i)
            assert f == pytest.approx(_fd(cfg, agg, rho, i), rel=1e-5)

    def test_endpoint_signs(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            cfg, agg, rho = random_scenario(rng)
            i = int(rng.integers(cfg.K))
            lo, hi = rho.copy(), rho.copy()
            lo[i], hi[i] = 1e-9, 1 - 1e-9
            assert sinr_derivative(cfg, agg, lo, i) > 0
            assert sinr_derivative(cfg, agg, hi, i) < 0

    def test_smallest_at_grid_argmax(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        rho = np.array([0.2, 0.3, 0.4])
        best = grid_oracle(agg, default_cfg, 1, rho, 1e-4)
        vals = {}
        for x in (best - 1e-4, best, best + 1e-4):
            r = rho.copy()
            r[1] = x
            vals[x] = abs(sinr_derivative(default_cfg, agg, r, 1))
        assert vals[best] <= min(vals.values())

    def test_context_consistent_with_sinr(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        rho = np.array([0.2, 0.3, 0.4])
        ctx = derivative_context(default_cfg, agg, rho, 0)
        prob = link_problem(default_cfg, agg, rho, 0)
        s2, eta = default_cfg.sigma2, default_cfg.eta
        assert ctx.z2 == pytest.approx(eta * prob.C, rel=1e-12)
        assert ctx.t == pytest.approx(agg.X[0] * agg.c[0, 0] * s2)
        assert ctx.z3 == pytest.approx(agg.X[0] * default_cfg.p[0] * agg.Y[0, 0])
        assert ctx.z3 > 0 and ctx.t >= 0 and 0 < ctx.s < ctx.z2


class TestNewtonRoot:
    def test_single_link_dense_grid(self):
        cfg = NetworkConfig(K=1, sigma2=0.01, p=1.0)
        agg = make_aggregates(X=2.0, Y=1.5, b=1.0, c=3.0, relay_noise=0.01)
        root = newton_root(cfg, agg, [0.5], 0)
        grid = np.linspace(0, 1, 100001)
        vals = link_problem(cfg, agg, [0.5], 0).gamma(grid)
        assert abs(root - grid[np.argmax(vals)]) <= 2e-5
        assert sinr_destination(cfg, agg, [root], 0) >= vals.max()
        assert abs(sinr_derivative(cfg, agg, [root], 0)) < 1e-10

    def test_idempotent(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        rho = np.array([0.2, 0.3, 0.4])
        rho[2] = newton_root(default_cfg, agg, rho, 2)
        again = newton_root(default_cfg, agg, rho, 2)
        assert again == pytest.approx(rho[2], abs=1e-12)

    @pytest.mark.parametrize("x0", [1e-6, 0.5, 1 - 1e-6, 0.0, 1.0])
    def test_any_start_stays_inside(self, default_cfg, default_scenario, x0):
        _, _, agg = default_scenario
        rho = np.array([0.2, 0.3, 0.4])
        root = newton_root(default_cfg, agg, rho, 0, x0=x0)
        assert 0 < root < 1
        rho[0] = root
        assert abs(sinr_derivative(default_cfg, agg, rho, 0)) < 1e-10

    def test_degenerate_raises(self):
        cfg = NetworkConfig(K=1)
        agg = make_aggregates(X=1.0, Y=0.0, b=1.0, c=1.0, relay_noise=cfg.sigma2)
        with pytest.raises(DegenerateScenarioError):
            newton_root(cfg, agg, [0.5], 0)


class TestInitializer:
    def test_example(self):
        cfg = NetworkConfig(K=1, sigma2=0.01, p=1.0)
        agg = make_aggregates(X=1.0, Y=1.0, b=1.0, c=1.0, relay_noise=0.01)
        rho0 = init_ps_high_snr(agg, cfg, 0)
        assert rho0 == pytest.approx((-0.02 + math.sqrt(0.0404)) / 2, rel=1e-12)
        assert rho0 == pytest.approx(0.0905, abs=5e-5)
        # cross-check: argmax of rho (1 - rho) / (rho p b + sigma2) on a 1e-5 grid
        grid = np.linspace(0, 1, 100001)
        assert abs(grid[np.argmax(grid * (1 - grid) / (grid + 0.01))] - rho0) <= 1e-5

    def test_vanishing_noise_limit(self):
        vals = []
        for s2 in (1e-2, 1e-4, 1e-8, 1e-12):
            cfg = NetworkConfig(K=1, sigma2=s2)
            vals.append(init_ps_high_snr(make_aggregates(1.0, 1.0, 1.0, 1.0, s2), cfg, 0))
        assert all(a > b > 0 for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-5

    @settings(max_examples=300, deadline=None)
    @given(s2=st.floats(1e-12, 1e3), pb=st.floats(1e-9, 1e6))
    def test_bound(self, s2, pb):
        cfg = NetworkConfig(K=1, sigma2=s2, p=1.0)
        rho0 = init_ps_high_snr(make_aggregates(1.0, 1.0, pb, 1.0, s2), cfg, 0)
        assert 0 < rho0 < 0.5

    def test_zero_gain_raises(self):
        cfg = NetworkConfig(K=1)
        with pytest.raises(DegenerateScenarioError):
            init_ps_high_snr(make_aggregates(1.0, 1.0, 0.0, 1.0, 0.01), cfg, 0)


class TestOptimize:
    def test_single_link(self):
        cfg = NetworkConfig(K=1)
        _, _, agg = aligned_scenario(cfg, 2)
        rho, trace = optimize_ps(cfg, agg)
        assert trace.converged and trace.outer_iterations <= 2
        assert rho[0] == pytest.approx(newton_root(cfg, agg, [0.5], 0), abs=1e-9)

    def test_gauss_seidel_order_and_monotone_updates(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        rho, trace = optimize_ps(default_cfg, agg, OptimizerSettings(init_mode="fixed", init_value=0.5))
        assert trace.converged
        assert [u[0] for u in trace.updates] == [0, 1, 2] * trace.outer_iterations
        for _, _, _, g_before, g_after in trace.updates:
            assert g_after >= g_before * (1 - 1e-12)
        steps = trace.step_norms()
        assert steps[-1] < 1e-3
        assert len(trace.rho_history) == trace.outer_iterations + 1
        # each update saw the coordinates already refreshed in its own sweep
        h = trace.rho_history
        r = h[0].copy()
        r[0] = newton_root(default_cfg, agg, r, 0)
        assert r[0] == pytest.approx(h[1][0], abs=1e-12)
        r[1] = newton_root(default_cfg, agg, r, 1)
        assert r[1] == pytest.approx(h[1][1], abs=1e-12)

    def test_initializations_agree(self, default_cfg):
        for seed in range(10):
            _, _, agg = aligned_scenario(default_cfg, 200 + seed)
            results = [
                optimize_ps(default_cfg, agg, s)[0].rho
                for s in (
                    OptimizerSettings(),
                    OptimizerSettings(init_mode="fixed", init_value=0.5),
                    OptimizerSettings(init_mode="random", init_seed=seed),
                )
            ]
            for r in results[1:]:
                np.testing.assert_allclose(r, results[0], atol=1e-3)

    def test_nonconvergence_returns_best(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        rho, trace = optimize_ps(default_cfg, agg, OptimizerSettings(max_outer_iters=1, epsilon=1e-15))
        assert not trace.converged
        from swiptia import sum_rate

        best = max(sum_rate(default_cfg, agg, r) for r in trace.rho_history)
        assert sum_rate(default_cfg, agg, rho) == best

    def test_settings_from_dict(self):
        s = OptimizerSettings.from_dict({"epsilon": 1e-4, "init_mode": "fixed(0.3)"})
        assert s.init_mode == "fixed" and s.init_value == 0.3 and s.epsilon == 1e-4
        with pytest.raises(ValueError):
            OptimizerSettings(init_mode="bogus")
        with pytest.raises(ValueError):
            OptimizerSettings(epsilon=0)

    def test_trace_rows(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        _, trace = optimize_ps(default_cfg, agg)
        rows = trace.to_rows(default_cfg, agg)
        assert [r[0] for r in rows] == list(range(len(trace.rho_history)))
        assert all(len(r) == 2 + default_cfg.K for r in rows)
        assert rows[-1][-1] == pytest.approx(
            sum(0.5 * np.log2(1 + sinr_all(default_cfg, agg, trace.rho_history[-1]))), rel=1e-12
        )


class TestGridOracle:
    def test_agrees_with_newton(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        rho = np.array([0.2, 0.3, 0.4])
        for i in range(3):
            assert abs(grid_oracle(agg, default_cfg, i, rho, 1e-4) - newton_root(default_cfg, agg, rho, i)) <= 2e-4

    def test_interior(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            cfg, agg, rho = random_scenario(rng)
            best = grid_oracle(agg, cfg, 0, rho, 1e-3)
            assert 0 < best < 1

    def test_scan_order_invariant(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        rho = np.array([0.2, 0.3, 0.4])
        grid = np.linspace(0, 1, 1001)
        vals = link_problem(default_cfg, agg, rho, 1).gamma(grid)
        rev = grid[::-1][np.argmax(vals[::-1])]
        assert grid_oracle(agg, default_cfg, 1, rho, 1e-3) == rev

    def test_step_bounds(self, default_cfg, default_scenario):
        _, _, agg = default_scenario
        with pytest.raises(ValueError):
            grid_oracle(agg, default_cfg, 0, [0.5] * 3, 0.2)
