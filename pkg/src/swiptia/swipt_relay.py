"""
Power-splitting AF relay model: harvested energy, relay normalization and
the end-to-end destination SINR.

All SINR expressions work on a :class:`LinkAggregates`, a handful of
scalar channel powers per link, so evaluating a new split vector never
touches the channel matrices again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_model import ChannelRealization, NetworkConfig
from .ia_alignment import AlignmentSolution

__all__ = [
    "PsVector",
    "LinkAggregates",
    "compute_aggregates",
    "harvested_energy",
    "amplification_coeff",
    "sinr_destination",
    "sinr_all",
    "sinr_high_snr",
    "link_rate",
    "sum_rate",
]


@dataclass(frozen=True)
class PsVector:
    """Power-splitting ratios of all K relays, each in ``[0, 1]``."""

    rho: np.ndarray

    def __post_init__(self):
        arr = np.array(self.rho, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError("PS vector must not be empty")
        if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
            raise ValueError(f"PS ratios must lie in [0, 1], got {arr}")
        arr.setflags(write=False)
        object.__setattr__(self, "rho", arr)

    def __array__(self, dtype=None, copy=None):
        return self.rho if dtype is None else self.rho.astype(dtype)

    def __len__(self):
        return self.rho.size

    def __getitem__(self, i):
        return self.rho[i]


@dataclass(frozen=True)
class LinkAggregates:
    """
    Scalar channel powers entering the SINR.

    Attributes
    ----------
    X : (K,) total received signal power at each relay (all sources).
    Y : (K, K) ``Y[j, i]``, second-hop power of link ``j``'s relayed signal
        at destination ``i``; the diagonal is ``Y_ii``.
    b : (K,) ``r_ii^-tau ||Heff_i||_F^2``.
    c : (K, K) ``c[j, i] = m_ji^-tau ||G_ji||_F^2``.
    Heff : (K, d, d) effective direct channels ``U_i^H H_ii V_i``.
    relay_noise : (K,) noise power at each relay's information path. Equals
        ``sigma2`` after perfect alignment; larger when residual interference
        is lumped into it.
    """

    X: np.ndarray
    Y: np.ndarray
    b: np.ndarray
    c: np.ndarray
    Heff: np.ndarray
    relay_noise: np.ndarray

    @property
    def K(self) -> int:
        return self.X.shape[0]

    @property
    def Yii(self) -> np.ndarray:
        return np.diag(self.Y).copy()


def compute_aggregates(
    cfg: NetworkConfig,
    ch: ChannelRealization,
    sol: AlignmentSolution,
    relay_noise=None,
) -> LinkAggregates:
    """Reduce a channel realization plus precoders/decoders to the per-link
    scalars. The relayed-signal power ``Y[j, i]`` uses
    ``||G_ji U_j Heff_j||_F^2``, the forwarded d-dimensional signal mapped
    back onto the relay's N antennas through ``U_j``."""
    K = cfg.K
    H, G, V, U = ch.H, ch.G, sol.V, sol.U
    r_gain = cfg.first_hop_gain
    m_gain = cfg.second_hop_gain
    idx = np.arange(K)

    HV = np.einsum("jinm,jmd->jind", H, V)
    X = np.einsum("j,ji,ji->i", cfg.p, r_gain, np.sum(np.abs(HV) ** 2, axis=(2, 3)))

    Heff = np.einsum("ine,ind->ied", U[idx].conj(), HV[idx, idx])
    b = np.diag(r_gain) * np.sum(np.abs(Heff) ** 2, axis=(1, 2))

    relayed = np.einsum("jne,jed->jnd", U, Heff)  # (K, N, d)
    GR = np.einsum("jiln,jnd->jild", G, relayed)
    Y = m_gain * np.diag(r_gain)[:, None] * np.sum(np.abs(GR) ** 2, axis=(2, 3))
    c = m_gain * np.sum(np.abs(G) ** 2, axis=(2, 3))

    if relay_noise is None:
        relay_noise = np.full(K, cfg.sigma2)
    else:
        relay_noise = np.broadcast_to(np.asarray(relay_noise, dtype=float), (K,)).copy()
    return LinkAggregates(X, Y, b, c, Heff, relay_noise)


def harvested_energy(cfg: NetworkConfig, agg: LinkAggregates, rho_i: float, i: int) -> float:
    """Energy harvested at relay ``i`` over the unit-length first slot."""
    return cfg.eta * (1.0 - rho_i) * agg.X[i]


def amplification_coeff(cfg: NetworkConfig, agg: LinkAggregates, rho_i: float, i: int) -> float:
    """AF power normalization ``1 / sqrt(rho_i p_i b_ii + sigma_R^2)``."""
    return 1.0 / np.sqrt(rho_i * cfg.p[i] * agg.b[i] + agg.relay_noise[i])


def _terms(cfg, agg, rho):
    # per-link factor (1 - rho_j) X_j / (rho_j p_j b_jj + sigma_Rj^2)
    rho = np.asarray(rho, dtype=float)
    s = agg.relay_noise
    g = (1.0 - rho) * agg.X / (rho * cfg.p * agg.b + s)
    # contrib[j, i]: what relay j's forwarded signal plus noise adds at D_i
    contrib = g[:, None] * (rho[:, None] * cfg.p[:, None] * agg.Y + agg.c * s[:, None])
    return rho, g, contrib


def sinr_all(cfg: NetworkConfig, agg: LinkAggregates, rho) -> np.ndarray:
    """Destination SINR of every link at split vector ``rho``."""
    rho, g, contrib = _terms(cfg, agg, rho)
    diag = np.diag(agg.Y)
    num = g * rho * cfg.p * diag
    interference = np.where(np.eye(agg.K, dtype=bool), 0.0, contrib).sum(axis=0)
    own_noise = g * np.diag(agg.c) * agg.relay_noise
    return num / (interference + own_noise + cfg.sigma2 / cfg.eta)


def sinr_destination(cfg: NetworkConfig, agg: LinkAggregates, rho, i: int) -> float:
    """
    End-to-end SINR at destination ``D_i``.

    Zero exactly when ``rho_i`` is 0 or 1. Other links enter only through
    the interference and forwarded-noise terms of the denominator.
    """
    return float(sinr_all(cfg, agg, rho)[i])


def sinr_high_snr(cfg: NetworkConfig, agg: LinkAggregates, rho, i: int) -> float:
    """High relay-SNR approximation of :func:`sinr_destination`.

    Forwarded relay noise is dropped from the denominator; what remains is
    the interference from other links plus the destination noise, with the
    conversion efficiency multiplied through.
    """
    rho, g, _ = _terms(cfg, agg, rho)
    signal = cfg.eta * g * rho * cfg.p * np.diag(agg.Y)
    interf = cfg.eta * g * rho * cfg.p
    s_i = float(np.dot(np.delete(interf, i), np.delete(agg.Y[:, i], i)))
    return float(signal[i] / (s_i + cfg.sigma2))


def link_rate(gamma, B: float = 1.0):
    """Two-slot half-duplex rate ``(B / 2) log2(1 + gamma)``."""
    return 0.5 * B * np.log2(1.0 + np.asarray(gamma, dtype=float))[()]


def sum_rate(cfg: NetworkConfig, agg: LinkAggregates, rho) -> float:
    return float(np.sum(link_rate(sinr_all(cfg, agg, rho), cfg.B)))
