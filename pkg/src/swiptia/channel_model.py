"""
Network description and quasi-static Rayleigh fading channel generation.

Channels are stored as dense complex arrays indexed ``[tx, rx]``:

* ``H[i, j]`` is the ``N x M`` channel from source ``S_i`` to relay ``R_j``.
* ``G[i, j]`` is the ``L x N`` channel from relay ``R_i`` to destination
  ``D_j``.

Entries are i.i.d. CN(0, 1). Path loss is never folded into the matrices;
it is applied as a separate scalar wherever a received power is computed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

__all__ = [
    "ConfigError",
    "NetworkConfig",
    "ChannelRealization",
    "path_loss",
    "sample_channels",
    "make_rng",
]


class ConfigError(ValueError):
    """Raised for an invalid network or experiment configuration."""


def path_loss(d, tau):
    """
    Distance attenuation ``d**(-tau)``.

    Parameters
    ----------
    d : float or array_like
        Link distance(s), strictly positive.
    tau : float
        Path-loss exponent, ``tau >= 2``.

    Returns
    -------
    float or ndarray
        Attenuation factor(s). Scalars in, scalar out.
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0) or not np.all(np.isfinite(d_arr)):
        raise ValueError(f"distance must be positive and finite, got {d!r}")
    if tau < 2:
        raise ValueError(f"path-loss exponent must be >= 2, got {tau!r}")
    out = d_arr ** (-float(tau))
    return float(out) if out.ndim == 0 else out


def _distance_matrix(value, K: int, name: str) -> np.ndarray:
    # scalar -> diagonal entries, cross entries default to 1
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        out = np.ones((K, K))
        np.fill_diagonal(out, float(arr))
    elif arr.shape == (K, K):
        out = arr.copy()
    else:
        raise ConfigError(f"{name} must be a scalar or a {K}x{K} array, got shape {arr.shape}")
    if np.any(out <= 0) or not np.all(np.isfinite(out)):
        raise ConfigError(f"all entries of {name} must be positive and finite")
    return out


@dataclass(frozen=True)
class NetworkConfig:
    """
    Static description of a ``K x K x K`` two-hop network.

    ``p`` may be given as a scalar (same power at every source) and ``r``,
    ``m`` as scalars (the direct-link distance, cross links at distance 1)
    or full ``K x K`` arrays. ``r[i, j]`` is the distance ``S_i -> R_j`` and
    ``m[i, j]`` the distance ``R_i -> D_j``. Everything is normalised to
    read-only float arrays in ``__post_init__``.
    """

    K: int = 3
    M: int = 4
    N: int = 4
    L: int = 4
    p: Any = 1.0
    r: Any = 1.0
    m: Any = 1.0
    tau: float = 3.0
    eta: float = 0.5
    sigma2: float = 0.01
    B: float = 1.0

    def __post_init__(self):
        for name in ("K", "M", "N", "L"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
            object.__setattr__(self, name, int(v))
        K = self.K

        p = np.asarray(self.p, dtype=float)
        if p.ndim == 0:
            p = np.full(K, float(p))
        if p.shape != (K,):
            raise ConfigError(f"p must be a scalar or length-{K} vector, got shape {p.shape}")
        if np.any(p <= 0) or not np.all(np.isfinite(p)):
            raise ConfigError("all transmit powers must be positive and finite")

        r = _distance_matrix(self.r, K, "r")
        m = _distance_matrix(self.m, K, "m")
        for arr in (p, r, m):
            arr.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "m", m)

        if not self.tau >= 2:
            raise ConfigError(f"tau must be >= 2, got {self.tau!r}")
        if not 0 < self.eta <= 1:
            raise ConfigError(f"eta must lie in (0, 1], got {self.eta!r}")
        if not self.sigma2 > 0:
            raise ConfigError(f"sigma2 must be positive, got {self.sigma2!r}")
        if not self.B > 0:
            raise ConfigError(f"B must be positive, got {self.B!r}")
        for name in ("tau", "eta", "sigma2", "B"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def first_hop_gain(self) -> np.ndarray:
        """``r[j, i]**(-tau)``, indexed like ``H``."""
        return path_loss(self.r, self.tau)

    @property
    def second_hop_gain(self) -> np.ndarray:
        """``m[j, i]**(-tau)``, indexed like ``G``."""
        return path_loss(self.m, self.tau)

    def replace(self, **changes) -> "NetworkConfig":
        """Copy with some fields changed.

        Changing ``K`` without also passing ``p``, ``r`` and ``m`` resets
        those to their scalar (diagonal) values, which only works when the
        original arrays were homogeneous.
        """
        base = self.to_dict()
        if "K" in changes and changes["K"] != self.K:
            for name in ("p", "r", "m"):
                if name not in changes:
                    arr = getattr(self, name)
                    diag = arr if arr.ndim == 1 else np.diag(arr)
                    if not np.all(diag == diag[0]):
                        raise ConfigError(f"cannot resize heterogeneous {name}; pass it explicitly")
                    if arr.ndim == 2:
                        off = arr[~np.eye(self.K, dtype=bool)]
                        if off.size and not np.all(off == 1.0):
                            raise ConfigError(f"cannot resize {name} with custom cross distances")
                    base[name] = float(diag[0])
        base.update(changes)
        return NetworkConfig(**base)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "M": self.M,
            "N": self.N,
            "L": self.L,
            "p": self.p.tolist(),
            "r": self.r.tolist(),
            "m": self.m.tolist(),
            "tau": self.tau,
            "eta": self.eta,
            "sigma2": self.sigma2,
            "B": self.B,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        """Build from a mapping; unknown keys other than ``optimizer`` and
        ``sweep`` are rejected."""
        known = {"K", "M", "N", "L", "p", "r", "m", "tau", "eta", "sigma2", "B"}
        extra = set(data) - known - {"optimizer", "sweep"}
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def from_json(cls, path) -> "NetworkConfig":
        return cls.from_dict(load_json(path))


def load_json(path) -> dict:
    try:
        with open(Path(path), encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return data


def make_rng(*key: int) -> np.random.Generator:
    """Philox generator keyed by a tuple of non-negative integers.

    Philox is counter-based and its output stream is fixed by the
    algorithm, so seeds are portable across platforms and numpy versions.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


@dataclass(frozen=True)
class ChannelRealization:
    """One fading draw. ``H`` has shape ``(K, K, N, M)``, ``G`` has shape
    ``(K, K, L, N)``."""

    H: np.ndarray
    G: np.ndarray
    seed: int = field(default=0)

    def scaled(self, factor: float) -> "ChannelRealization":
        return ChannelRealization(self.H * factor, self.G * factor, self.seed)


def sample_channels(cfg: NetworkConfig, seed: int) -> ChannelRealization:
    """Draw all ``2 K**2`` channel matrices with i.i.d. CN(0, 1) entries.

    The same ``(cfg, seed)`` always gives a bit-identical realization.
    """
    rng = make_rng(int(seed), 0)
    K = cfg.K
    H = _cn(rng, (K, K, cfg.N, cfg.M))
    G = _cn(rng, (K, K, cfg.L, cfg.N))
    H.setflags(write=False)
    G.setflags(write=False)
    return ChannelRealization(H, G, int(seed))
