"""
Seeded Monte Carlo trials, benchmark schemes and parameter sweeps.

Every scheme evaluated for a given trial seed sees the same channel
realization (common random numbers), so scheme differences can be compared
pairwise. A sweep is a pure function of its :class:`SweepSpec`.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel_model import ChannelRealization, ConfigError, NetworkConfig, make_rng, sample_channels
from .ia_alignment import AlignmentSolution, feasible_streams, run_iterative_ia, weighted_leakage
from .ps_optimizer import DegenerateScenarioError, OptimizerSettings, optimize_ps
from .swipt_relay import LinkAggregates, PsVector, compute_aggregates, link_rate, sinr_all

__all__ = [
    "SCHEMES",
    "TrialReport",
    "SweepSpec",
    "SweepRow",
    "TrialError",
    "no_ia_baseline",
    "run_trial",
    "run_trials",
    "run_sweep",
    "trial_seed",
    "emit_csv",
    "write_csv",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

SCHEMES = ("proposed", "random_ps", "fixed_ps", "no_ia")
CSV_COLUMNS = ("x", "scheme", "mean_sum_rate", "stderr", "n_trials", "n_failed")
FIXED_RHO = 0.5


class TrialError(RuntimeError):
    """A single trial could not be evaluated (infeasible IA, degenerate
    channel)."""


@dataclass(frozen=True)
class TrialReport:
    seed: int
    scheme: str
    rho: PsVector
    sinr: np.ndarray
    rates: np.ndarray
    sum_rate: float
    ia_leakage: float
    optimizer_iterations: int
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "scheme": self.scheme,
            "rho": self.rho.rho.tolist(),
            "sinr": self.sinr.tolist(),
            "rates": self.rates.tolist(),
            "sum_rate": self.sum_rate,
            "ia_leakage": self.ia_leakage,
            "optimizer_iterations": self.optimizer_iterations,
            "converged": self.converged,
        }


def no_ia_baseline(cfg: NetworkConfig, ch: ChannelRealization, d: int | None = None) -> LinkAggregates:
    """
    Aggregates for transmission without interference alignment.

    Sources send on the first ``d`` antennas; each relay decodes onto the
    ``d`` dominant left singular vectors of its direct channel. The
    interference that survives decoding is lumped into the relay's
    information-path noise.
    """
    K, M = cfg.K, cfg.M
    if d is None:
        d = max(feasible_streams(cfg.M, cfg.N, cfg.K), 1)
    V = np.broadcast_to(np.eye(M, dtype=complex)[:, :d], (K, M, d)).copy()
    direct = ch.H[np.arange(K), np.arange(K)]
    U = np.linalg.svd(direct[:, :, :d])[0][:, :, :d]
    eff = np.einsum("ine,jinm,jmd->jied", U.conj(), ch.H, V)
    power = cfg.p[:, None] * cfg.first_hop_gain * np.sum(np.abs(eff) ** 2, axis=(2, 3))
    np.fill_diagonal(power, 0.0)
    residual = power.sum(axis=0)
    leak, ref = weighted_leakage(cfg, ch, V, U)
    sol = AlignmentSolution(V, U, d, leak / ref if ref > 0 else 0.0, 0)
    return compute_aggregates(cfg, ch, sol, relay_noise=cfg.sigma2 + residual)


def _align(cfg, ch, d, ia_max_iters, ia_tol):
    if d is None:
        d = feasible_streams(cfg.M, cfg.N, cfg.K)
    if d < 1:
        raise TrialError(f"IA infeasible: no stream fits M={cfg.M}, N={cfg.N}, K={cfg.K}")
    try:
        sol = run_iterative_ia(cfg, ch, d, max_iters=ia_max_iters, tol=ia_tol)
    except ConfigError as exc:
        raise TrialError(str(exc)) from exc
    return sol, compute_aggregates(cfg, ch, sol)


def _report(cfg, agg, rho, seed, scheme, leakage, iters, converged):
    sinr = sinr_all(cfg, agg, rho)
    rates = np.asarray(link_rate(sinr, cfg.B), dtype=float).reshape(-1)
    return TrialReport(
        seed=int(seed),
        scheme=scheme,
        rho=PsVector(rho),
        sinr=sinr,
        rates=rates,
        sum_rate=math.fsum(rates),
        ia_leakage=float(leakage),
        optimizer_iterations=int(iters),
        converged=converged,
    )


def run_trials(
    cfg: NetworkConfig,
    seed: int,
    schemes=SCHEMES,
    settings: OptimizerSettings | None = None,
    d: int | None = None,
    ia_max_iters: int = 5000,
    ia_tol: float = 1e-6,
) -> dict:
    """
    Evaluate several schemes on one channel realization.

    Returns a dict mapping scheme name to either a :class:`TrialReport` or
    the :class:`TrialError` that prevented it.
    """
    settings = settings or OptimizerSettings()
    unknown = set(schemes) - set(SCHEMES)
    if unknown:
        raise ConfigError(f"unknown schemes: {sorted(unknown)}")
    ch = sample_channels(cfg, seed)
    out = {}

    aligned = None
    if any(s != "no_ia" for s in schemes):
        try:
            aligned = _align(cfg, ch, d, ia_max_iters, ia_tol)
        except TrialError as exc:
            aligned = exc

    for scheme in schemes:
        try:
            if scheme == "no_ia":
                agg = no_ia_baseline(cfg, ch, d)
                leakage = float("nan")
            else:
                if isinstance(aligned, TrialError):
                    raise aligned
                sol, agg = aligned
                leakage = sol.leakage
            if scheme in ("proposed", "no_ia"):
                rho, trace = optimize_ps(cfg, agg, settings)
                iters, converged = trace.outer_iterations, trace.converged
            elif scheme == "fixed_ps":
                rho, iters, converged = np.full(cfg.K, FIXED_RHO), 0, True
            else:
                rng = make_rng(int(seed), 2)
                rho = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=cfg.K)
                iters, converged = 0, True
            out[scheme] = _report(cfg, agg, np.asarray(rho), seed, scheme, leakage, iters, converged)
        except DegenerateScenarioError as exc:
            out[scheme] = TrialError(str(exc))
        except TrialError as exc:
            out[scheme] = exc
    return out


def run_trial(cfg: NetworkConfig, seed: int, scheme: str, **kwargs) -> TrialReport:
    """One seeded trial of one scheme; raises :class:`TrialError` on
    failure."""
    result = run_trials(cfg, seed, (scheme,), **kwargs)[scheme]
    if isinstance(result, Exception):
        raise result
    return result


def trial_seed(master_seed: int, index: int) -> int:
    """Per-trial seed; shared by every scheme and every sweep point."""
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SweepSpec:
    """
    What to sweep.

    ``variable`` is ``"transmit_power"`` (every source gets power ``x``) or
    ``"link_count"`` (``K = x``).
    """

    variable: str
    values: tuple
    trials: int = 1000
    base: NetworkConfig = field(default_factory=NetworkConfig)
    schemes: tuple = SCHEMES
    master_seed: int = 0
    settings: OptimizerSettings = field(default_factory=OptimizerSettings)
    ia_max_iters: int = 5000
    ia_tol: float = 1e-6

    def __post_init__(self):
        if self.variable not in ("transmit_power", "link_count"):
            raise ConfigError(f"unknown sweep variable {self.variable!r}")
        if len(self.values) == 0:
            raise ConfigError("sweep values must not be empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ConfigError(f"unknown schemes: {sorted(unknown)}")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "schemes", tuple(self.schemes))

    def config_at(self, x) -> NetworkConfig:
        if self.variable == "transmit_power":
            return self.base.replace(p=float(x))
        return self.base.replace(K=int(x))


@dataclass(frozen=True)
class SweepRow:
    x: float
    scheme: str
    mean_sum_rate: float
    stderr: float
    n_trials: int
    n_failed: int
    samples: tuple = field(default=(), repr=False, compare=False)


def _summarize(x, scheme, values, n_failed):
    n = len(values)
    if n == 0:
        return SweepRow(x, scheme, float("nan"), float("nan"), 0, n_failed)
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = float("nan")
    return SweepRow(x, scheme, mean, se, n, n_failed, tuple(values))


def run_sweep(spec: SweepSpec, progress=None) -> list[SweepRow]:
    """
    Mean sum rate per (x, scheme) with standard errors.

    Rows keep the per-trial sum rates in ``samples`` (in trial order, failed
    trials dropped) for paired comparisons.
    """
    rows = []
    for x in spec.values:
        cfg = spec.config_at(x)
        d = feasible_streams(cfg.M, cfg.N, cfg.K)
        if d < 1:
            log.warning("skipping x=%s: no feasible stream count", x)
            rows.extend(_summarize(x, s, [], spec.trials) for s in spec.schemes)
            continue
        values = {s: [] for s in spec.schemes}
        failed = {s: 0 for s in spec.schemes}
        for t in range(spec.trials):
            results = run_trials(
                cfg,
                trial_seed(spec.master_seed, t),
                spec.schemes,
                settings=spec.settings,
                d=d,
                ia_max_iters=spec.ia_max_iters,
                ia_tol=spec.ia_tol,
            )
            for s, res in results.items():
                if isinstance(res, Exception):
                    failed[s] += 1
                else:
                    values[s].append(res.sum_rate)
            if progress is not None:
                progress(x, t)
        rows.extend(_summarize(x, s, values[s], failed[s]) for s in spec.schemes)
    return rows


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_csv(table, path) -> Path:
    """Write sweep rows as UTF-8 CSV with a fixed column order.

    Floats are written with ``repr`` so they parse back exactly.
    """
    table = list(table)
    if not table:
        raise ValueError("refusing to write an empty table")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(table, fh)
    return path


def write_csv(table, fh) -> None:
    """Write header and sweep rows to an open text stream."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in table:
        writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
