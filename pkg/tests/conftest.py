import numpy as np
import pytest

from swiptia import NetworkConfig, compute_aggregates, run_iterative_ia, sample_channels
from swiptia.swipt_relay import LinkAggregates

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def make_aggregates(X, Y, b, c, relay_noise):
    X = np.atleast_1d(np.asarray(X, dtype=float))
    K = X.size
    return LinkAggregates(
        X=X,
        Y=np.asarray(Y, dtype=float).reshape(K, K),
        b=np.atleast_1d(np.asarray(b, dtype=float)),
        c=np.asarray(c, dtype=float).reshape(K, K),
        Heff=np.zeros((K, 1, 1), dtype=complex),
        relay_noise=np.broadcast_to(np.asarray(relay_noise, dtype=float), (K,)).copy(),
    )


def random_scenario(rng, K=None):
    """Random nondegenerate (cfg, aggregates, rho) built from log-uniform
    positive scalars, independent of any channel draw."""
    if K is None:
        K = int(rng.integers(1, 6))
    logu = lambda lo, hi, size=None: 10.0 ** rng.uniform(lo, hi, size)
    sigma2 = logu(-4, -1)
    cfg = NetworkConfig(K=K, p=logu(-1, 1, K), sigma2=sigma2, eta=rng.uniform(0.1, 1.0))
    agg = make_aggregates(
        X=logu(-1, 2, K),
        Y=logu(-1, 2, (K, K)),
        b=logu(-1, 1.5, K),
        c=logu(-1, 1.5, (K, K)),
        relay_noise=sigma2,
    )
    rho = rng.uniform(0.02, 0.98, K)
    return cfg, agg, rho


def aligned_scenario(cfg, seed, tol=1e-8):
    ch = sample_channels(cfg, seed)
    from swiptia import feasible_streams

    sol = run_iterative_ia(cfg, ch, feasible_streams(cfg.M, cfg.N, cfg.K), tol=tol)
    return ch, sol, compute_aggregates(cfg, ch, sol)


@pytest.fixture(scope="session")
def default_cfg():
    return NetworkConfig()


@pytest.fixture(scope="session")
def default_scenario(default_cfg):
    return aligned_scenario(default_cfg, 11)
