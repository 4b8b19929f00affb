"""
Interference alignment for the first hop by alternating leakage minimization.

Each relay picks the decoder spanning the least-interfered subspace of its
received interference covariance; then, using channel reciprocity, each
source picks the precoder spanning the least-leaking subspace of the
reversed network. Both steps minimize the same weighted leakage

    sum_i sum_{j != i} (p_j / d) r_ji^-tau ||U_i^H H_ji V_j||_F^2

so the objective is non-increasing from one alternation to the next.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel_model import ChannelRealization, ConfigError, NetworkConfig, make_rng

__all__ = [
    "AlignmentSolution",
    "feasible_streams",
    "run_iterative_ia",
    "verify_alignment",
    "random_orthonormal",
    "weighted_leakage",
]


def feasible_streams(M: int, N: int, K: int) -> int:
    """Largest equal per-link stream count with ``M + N >= (K + 1) d``.

    Returns 0 when not even one stream per link is feasible.
    """
    if min(M, N, K) < 1:
        raise ValueError("M, N and K must all be >= 1")
    return min((M + N) // (K + 1), M, N)


@dataclass(frozen=True)
class AlignmentSolution:
    """
    Precoders and decoders for every link.

    Attributes
    ----------
    V : ndarray, shape (K, M, d)
        Orthonormal-column precoders.
    U : ndarray, shape (K, N, d)
        Orthonormal-column decoders.
    d : int
        Streams per link.
    leakage : float
        Normalized residual interference power of the returned pair.
    iterations_used : int
    history : tuple of float
        Unnormalized weighted leakage after every alternation.
    """

    V: np.ndarray
    U: np.ndarray
    d: int
    leakage: float
    iterations_used: int
    history: tuple = field(default=(), repr=False)

    def to_json(self) -> str:
        def enc(a):
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return json.dumps(
            {
                "d": self.d,
                "leakage": self.leakage,
                "iterations_used": self.iterations_used,
                "V": enc(self.V),
                "U": enc(self.U),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "AlignmentSolution":
        data = json.loads(text)

        def dec(x):
            a = np.asarray(x, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        return cls(dec(data["V"]), dec(data["U"]), data["d"], data["leakage"], data["iterations_used"])


def random_orthonormal(rng: np.random.Generator, count: int, rows: int, cols: int) -> np.ndarray:
    """``count`` random ``rows x cols`` matrices with orthonormal columns."""
    a = rng.standard_normal((count, rows, cols)) + 1j * rng.standard_normal((count, rows, cols))
    q, _ = np.linalg.qr(a)
    return q


def _weights(cfg: NetworkConfig, d: int) -> np.ndarray:
    # w[j, i]: power per stream of S_j times path loss S_j -> R_i; diagonal zeroed
    w = cfg.p[:, None] / d * cfg.first_hop_gain
    w = w.copy()
    np.fill_diagonal(w, 0.0)
    return w


def weighted_leakage(cfg: NetworkConfig, ch: ChannelRealization, V, U) -> tuple[float, float]:
    """Return ``(leakage, reference)``: weighted cross-interference power
    after decoding and the same power before decoding."""
    d = V.shape[-1]
    w = _weights(cfg, d)
    HV = np.einsum("jinm,jmd->jind", ch.H, V)
    UHV = np.einsum("ine,jind->jied", U.conj(), HV)
    leak = float(np.sum(w * np.sum(np.abs(UHV) ** 2, axis=(2, 3))))
    ref = float(np.sum(w * np.sum(np.abs(HV) ** 2, axis=(2, 3))))
    return leak, ref


def _least_eigvecs(Q: np.ndarray, d: int) -> np.ndarray:
    # eigh sorts eigenvalues ascending
    _, vecs = np.linalg.eigh(Q)
    return vecs[..., :d]


def run_iterative_ia(
    cfg: NetworkConfig,
    ch: ChannelRealization,
    d: int,
    max_iters: int = 5000,
    tol: float = 1e-6,
    rng: np.random.Generator | None = None,
) -> AlignmentSolution:
    """
    Alternate decoder and precoder updates until the normalized leakage
    drops below ``tol`` or ``max_iters`` alternations have run.

    Parameters
    ----------
    cfg, ch : NetworkConfig, ChannelRealization
    d : int
        Streams per link; must satisfy ``M + N >= (K + 1) d``.
    max_iters : int
    tol : float
        Threshold on the normalized leakage.
    rng : Generator, optional
        Source of the random initial precoders. Defaults to a generator
        keyed by ``ch.seed``.

    Raises
    ------
    ConfigError
        If ``d`` is not feasible for the antenna configuration.
    """
    K, M, N = cfg.K, cfg.M, cfg.N
    if d < 1 or d > min(M, N) or M + N < (K + 1) * d:
        raise ConfigError(f"d={d} streams infeasible for K={K}, M={M}, N={N}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if rng is None:
        rng = make_rng(ch.seed, 1)

    w = _weights(cfg, d)
    H = ch.H
    HH = H.conj().transpose(0, 1, 3, 2)
    V = random_orthonormal(rng, K, M, d)
    U = np.empty((K, N, d), dtype=complex)

    history = []
    leakage = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        # relays: interference covariance per receiver i
        HV = np.einsum("jinm,jmd->jind", H, V)
        Q_rx = np.einsum("ji,jind,jimd->inm", w, HV, HV.conj())
        U = _least_eigvecs(Q_rx, d)
        # sources, reciprocal network: leakage covariance per transmitter j
        UH = np.einsum("jimn,ine->jime", HH, U)
        Q_tx = np.einsum("ji,jime,jine->jmn", w, UH, UH.conj())
        V = _least_eigvecs(Q_tx, d)

        leak, ref = weighted_leakage(cfg, ch, V, U)
        history.append(leak)
        leakage = leak / ref if ref > 0 else 0.0
        if leakage < tol:
            break

    return AlignmentSolution(V, U, d, float(leakage), it, tuple(history))


def verify_alignment(sol: AlignmentSolution, cfg: NetworkConfig, ch: ChannelRealization) -> tuple[float, float]:
    """
    Check the nulling and rank conditions directly.

    Returns
    -------
    max_cross_leakage : float
        ``max_{i, j != i} ||U_i^H H_ji V_j||_F`` (no power weighting).
    min_direct_singular_value : float
        ``min_i`` of the ``d``-th singular value of ``U_i^H H_ii V_i``.
    """
    K = cfg.K
    eff = np.einsum("ine,jinm,jmd->jied", sol.U.conj(), ch.H, sol.V)
    norms = np.sqrt(np.sum(np.abs(eff) ** 2, axis=(2, 3)))
    off = ~np.eye(K, dtype=bool)
    max_cross = float(norms[off].max()) if K > 1 else 0.0
    direct = eff[np.arange(K), np.arange(K)]
    sv = np.linalg.svd(direct, compute_uv=False)
    return max_cross, float(sv[:, sol.d - 1].min())
