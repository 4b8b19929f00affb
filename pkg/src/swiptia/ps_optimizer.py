"""
Distributed power-splitting optimization.

Each relay maximizes its own destination SINR over its split ratio with the
other relays' ratios held fixed. The per-link optimum is the unique interior
zero of the SINR derivative, found by a bracketed (safeguarded) Newton
iteration. Relays update in index order, each using the ratios already
updated in the current sweep (Gauss-Seidel), until the split vector stops
moving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel_model import NetworkConfig, make_rng
from .swipt_relay import LinkAggregates, PsVector, sinr_all, sum_rate

__all__ = [
    "DegenerateScenarioError",
    "OptimizerSettings",
    "OptimizerTrace",
    "DerivativeContext",
    "LinkProblem",
    "link_problem",
    "derivative_context",
    "sinr_derivative",
    "newton_root",
    "init_ps_high_snr",
    "initial_ps",
    "optimize_ps",
    "grid_oracle",
]


class DegenerateScenarioError(ArithmeticError):
    """The per-link SINR has no interior maximum (zero direct gain)."""


@dataclass(frozen=True)
class OptimizerSettings:
    """
    Tuning knobs for :func:`optimize_ps`.

    ``init_mode`` is one of ``"high_snr"``, ``"fixed"`` (every ratio set to
    ``init_value``) or ``"random"`` (uniform draws keyed by ``init_seed``).
    """

    epsilon: float = 1e-3
    newton_tol: float = 1e-10
    max_outer_iters: int = 100
    max_newton_iters: int = 50
    init_mode: str = "high_snr"
    init_value: float = 0.5
    init_seed: int = 0

    def __post_init__(self):
        if not (self.epsilon > 0 and self.newton_tol > 0):
            raise ValueError("epsilon and newton_tol must be positive")
        if self.max_outer_iters < 1 or self.max_newton_iters < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.init_mode not in ("high_snr", "fixed", "random"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.init_mode == "fixed" and not 0 <= self.init_value <= 1:
            raise ValueError("init_value must lie in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerSettings":
        data = dict(data)
        mode = data.get("init_mode")
        # accept "fixed(0.3)" as shorthand
        if isinstance(mode, str) and mode.startswith("fixed(") and mode.endswith(")"):
            data["init_mode"] = "fixed"
            data["init_value"] = float(mode[6:-1])
        return cls(**data)


@dataclass
class OptimizerTrace:
    """Everything recorded during one run of :func:`optimize_ps`.

    ``rho_history[0]`` is the initial point and ``rho_history[n]`` the
    vector after outer iteration ``n``. ``updates`` holds one
    ``(i, rho_before, rho_after, gamma_before, gamma_after)`` tuple per
    coordinate update, with both SINRs evaluated at the other coordinates as
    they stood at update time.
    """

    rho_history: list = field(default_factory=list)
    per_iteration_sinrs: list = field(default_factory=list)
    updates: list = field(default_factory=list)
    converged: bool = False
    outer_iterations: int = 0

    def step_norms(self) -> list[float]:
        h = self.rho_history
        return [float(np.linalg.norm(h[n + 1] - h[n])) for n in range(len(h) - 1)]

    def to_rows(self, cfg: NetworkConfig, agg: LinkAggregates) -> list[list]:
        """Rows ``[iter, rho_1..rho_K, sum_rate]`` for CSV export."""
        return [[n, *map(float, rho), sum_rate(cfg, agg, rho)] for n, rho in enumerate(self.rho_history)]


@dataclass(frozen=True)
class LinkProblem:
    """The SINR of link ``i`` as a function of its own ratio only.

    With ``g(x) = (1 - x) X / (x p b + s)``::

        gamma(x) = g(x) x p Y / (C + g(x) c s + dest)

    where ``C`` is the interference and forwarded noise from the other links
    and ``dest = sigma2 / eta``.
    """

    X: float
    p: float
    b: float
    s: float
    Y: float
    c: float
    C: float
    dest: float

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        g = (1.0 - x) * self.X / (x * self.p * self.b + self.s)
        return (g * x * self.p * self.Y / (self.C + g * self.c * self.s + self.dest))[()]

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        q = x * self.p * self.b + self.s
        g = (1.0 - x) * self.X / q
        dg = -self.X * (self.p * self.b + self.s) / q**2
        num = g * x * self.p * self.Y
        dnum = self.p * self.Y * (g + x * dg)
        den = self.C + g * self.c * self.s + self.dest
        dden = dg * self.c * self.s
        return ((dnum * den - num * dden) / den**2)[()]


def link_problem(cfg: NetworkConfig, agg: LinkAggregates, rho, i: int) -> LinkProblem:
    rho = np.asarray(rho, dtype=float)
    s = agg.relay_noise
    C = 0.0
    for j in range(agg.K):
        if j == i:
            continue
        gj = (1.0 - rho[j]) * agg.X[j] / (rho[j] * cfg.p[j] * agg.b[j] + s[j])
        C += gj * (rho[j] * cfg.p[j] * agg.Y[j, i] + agg.c[j, i] * s[j])
    return LinkProblem(
        X=float(agg.X[i]),
        p=float(cfg.p[i]),
        b=float(agg.b[i]),
        s=float(s[i]),
        Y=float(agg.Y[i, i]),
        c=float(agg.c[i, i]),
        C=float(C),
        dest=cfg.sigma2 / cfg.eta,
    )


def sinr_derivative(cfg: NetworkConfig, agg: LinkAggregates, rho, i: int) -> float:
    """Exact partial derivative of link ``i``'s destination SINR with
    respect to ``rho_i``."""
    rho = np.asarray(rho, dtype=float)
    return float(link_problem(cfg, agg, rho, i).derivative(rho[i]))


@dataclass(frozen=True)
class DerivativeContext:
    """Shorthand coefficients of the printed stationarity condition, kept for
    diagnostics. ``z2`` is ``eta`` times the other links' contribution to the
    SINR denominator and ``s`` the high-SNR interference sum."""

    i: int
    t: float
    z1: float
    z2: float
    z3: float
    s: float


def derivative_context(cfg: NetworkConfig, agg: LinkAggregates, rho, i: int) -> DerivativeContext:
    rho = np.asarray(rho, dtype=float)
    sig2, eta = cfg.sigma2, cfg.eta
    p, X, b, Y, c = cfg.p, agg.X, agg.b, agg.Y, agg.c
    others = [j for j in range(agg.K) if j != i]
    z2 = sum(
        eta * (1 - rho[j]) * X[j] * (rho[j] * p[j] * Y[j, i] + c[j, i] * sig2) / (rho[j] * p[j] * b[j] + sig2)
        for j in others
    )
    z1 = (
        sum(
            eta * (1 - rho[j]) * X[j] * (p[i] * b[i] + sig2)
            * (rho[j] * p[j] * Y[j, i] + c[j, i] * sig2) / (rho[j] * p[j] * b[j] + sig2)
            for j in others
        )
        - X[i] * c[i, i] * sig2
        + p[i] * b[i] * sig2
    )
    s = sum(eta * (1 - rho[j]) * X[j] * rho[j] * p[j] * Y[j, i] / (rho[j] * p[j] * b[j] + sig2) for j in others)
    return DerivativeContext(
        i=i,
        t=float(X[i] * c[i, i] * sig2),
        z1=float(z1),
        z2=float(z2),
        z3=float(X[i] * p[i] * Y[i, i]),
        s=float(s),
    )


def newton_root(
    cfg: NetworkConfig,
    agg: LinkAggregates,
    rho,
    i: int,
    settings: OptimizerSettings | None = None,
    x0: float | None = None,
) -> float:
    """
    Maximize link ``i``'s SINR over ``rho_i`` by finding the zero of its
    derivative.

    Newton steps use a central-difference second derivative. A step that
    leaves the current sign-change bracket, or a non-negative curvature, is
    replaced by bisection of the bracket, so the iterate never leaves
    ``(0, 1)``.

    Parameters
    ----------
    x0 : float, optional
        Starting point; defaults to the current ``rho[i]`` (clipped into the
        open interval).

    Raises
    ------
    DegenerateScenarioError
        If the derivative does not change sign on ``[0, 1]``.
    """
    settings = settings or OptimizerSettings()
    prob = link_problem(cfg, agg, rho, i)
    f = prob.derivative
    lo, hi = 0.0, 1.0
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0 and f_hi < 0):
        raise DegenerateScenarioError(f"link {i}: no interior SINR maximum (f(0)={f_lo:g}, f(1)={f_hi:g})")

    x = float(np.asarray(rho, dtype=float)[i]) if x0 is None else float(x0)
    if not 0 < x < 1:
        x = 0.5
    h = 1e-7
    for _ in range(settings.max_newton_iters):
        fx = f(x)
        if abs(fx) < settings.newton_tol:
            return x
        if fx > 0:
            lo = x
        else:
            hi = x
        a, b = max(x - h, 0.0), min(x + h, 1.0)
        slope = (f(b) - f(a)) / (b - a)
        step_ok = slope < 0
        if step_ok:
            x_new = x - fx / slope
            step_ok = lo < x_new < hi
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        if x_new == x or hi - lo < 1e-15:
            return x_new
        x = x_new
    # Newton budget exhausted: finish by bisection on the bracket
    while hi - lo > 4e-16 and abs(f(x)) >= settings.newton_tol:
        x = 0.5 * (lo + hi)
        if f(x) > 0:
            lo = x
        else:
            hi = x
    return x


def init_ps_high_snr(agg: LinkAggregates, cfg: NetworkConfig, i: int) -> float:
    """
    Closed-form maximizer of the high-SNR SINR approximation,
    ``(-2 s + sqrt(4 s (s + p b))) / (2 p b)`` with ``s`` the relay noise.

    Always lies in ``(0, 1/2)`` and does not depend on the other links.
    """
    pb = float(cfg.p[i] * agg.b[i])
    s = float(agg.relay_noise[i])
    if not pb > 0:
        raise DegenerateScenarioError(f"link {i}: zero effective direct channel gain")
    # rationalized form of the root; avoids cancellation when s << p b
    return 2.0 * s / (2.0 * s + math.sqrt(4.0 * s * (s + pb)))


def initial_ps(cfg: NetworkConfig, agg: LinkAggregates, settings: OptimizerSettings) -> np.ndarray:
    K = agg.K
    if settings.init_mode == "high_snr":
        return np.array([init_ps_high_snr(agg, cfg, i) for i in range(K)])
    if settings.init_mode == "fixed":
        return np.full(K, float(settings.init_value))
    rng = make_rng(settings.init_seed, 7)
    return rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=K)


def optimize_ps(
    cfg: NetworkConfig,
    agg: LinkAggregates,
    settings: OptimizerSettings | None = None,
) -> tuple[PsVector, OptimizerTrace]:
    """
    Gauss-Seidel sweeps of per-link SINR maximization.

    Stops once ``||rho(n+1) - rho(n)||_2 < epsilon``. If that never happens
    within ``max_outer_iters`` sweeps, the iterate with the highest sum rate
    is returned and ``trace.converged`` is False.
    """
    settings = settings or OptimizerSettings()
    rho = initial_ps(cfg, agg, settings)
    trace = OptimizerTrace(rho_history=[rho.copy()], per_iteration_sinrs=[sinr_all(cfg, agg, rho)])

    for n in range(1, settings.max_outer_iters + 1):
        prev = rho.copy()
        for i in range(agg.K):
            prob = link_problem(cfg, agg, rho, i)
            before = rho[i]
            rho[i] = newton_root(cfg, agg, rho, i, settings)
            trace.updates.append((i, before, rho[i], float(prob.gamma(before)), float(prob.gamma(rho[i]))))
        trace.rho_history.append(rho.copy())
        trace.per_iteration_sinrs.append(sinr_all(cfg, agg, rho))
        trace.outer_iterations = n
        if np.linalg.norm(rho - prev) < settings.epsilon:
            trace.converged = True
            return PsVector(rho), trace

    best = max(trace.rho_history, key=lambda r: sum_rate(cfg, agg, r))
    return PsVector(best), trace


def grid_oracle(agg: LinkAggregates, cfg: NetworkConfig, i: int, rho_others, step: float = 1e-4) -> float:
    """
    Brute-force maximizer of link ``i``'s SINR over ``{0, step, ..., 1}``.

    ``rho_others`` is a full length-K vector; its ``i``-th entry is ignored.
    Ties go to the smallest ratio.
    """
    if not 0 < step <= 0.1:
        raise ValueError("step must lie in (0, 0.1]")
    n = int(round(1.0 / step))
    grid = np.linspace(0.0, 1.0, n + 1)
    prob = link_problem(cfg, agg, rho_others, i)
    values = prob.gamma(grid)
    return float(grid[int(np.argmax(values))])
