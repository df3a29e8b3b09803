"""Plane-wave Schmidt number per unit volume.

The state is uniform along the relative coordinate, so its reduced density
matrix has a purity that is only defined per unit volume. The user-facing
measure is ``S_V = (2 pi hbar)**d V / Tr(rho_x**2)`` for a reference volume
``V`` (a length when ``dims == 1``). In momentum space the two fragments carry
equal momenta (a ``delta(p - q)`` support that is never represented
numerically); :func:`momentum_profile` is the smooth factor in front of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import _check_dims, alpha, alpha_free
from .errors import PreconditionError, RegimeError
from .model import SystemParams


def momentum_profile_at_alpha(al, q, hbar: float = 1.0, dims: int = 3):
    _check_dims(dims)
    al = np.asarray(al, dtype=float)
    q = np.asarray(q, dtype=float)
    pref = math.sqrt(2.0**dims) * (np.pi / (2.0 * al)) ** (dims / 4.0)
    out = pref * np.exp(-(q**2) / (4.0 * hbar**2 * al))
    return float(out) if out.ndim == 0 else out


def momentum_profile(params: SystemParams, t, q, dims: int = 3):
    """Gaussian factor of the momentum amplitude at momentum magnitude ``|q|``."""
    return momentum_profile_at_alpha(alpha(params, t), q, params.hbar, dims)


def purity_trace_at_alpha(al, hbar: float = 1.0, dims: int = 3):
    _check_dims(dims)
    al = np.asarray(al, dtype=float)
    out = math.sqrt(2.0**dims) * (2.0 * np.pi * hbar) ** dims * (np.pi / (2.0 * al)) ** (dims / 2.0)
    return float(out) if out.ndim == 0 else out


def purity_trace(params: SystemParams, t, dims: int = 3):
    """``Tr_p(rho_x**2)``; carries units of momentum**d * length**(2d)."""
    return purity_trace_at_alpha(alpha(params, t), params.hbar, dims)


def schmidt_per_volume_at_alpha(al, V: float, dims: int = 3):
    _check_dims(dims)
    if not V > 0:
        raise PreconditionError("reference volume must be positive")
    al = np.asarray(al, dtype=float)
    out = V / math.sqrt(2.0**dims) * (2.0 * al / np.pi) ** (dims / 2.0)
    return float(out) if out.ndim == 0 else out


def schmidt_per_volume(params: SystemParams, t, V: float, dims: int = 3):
    """Effective plane-wave mode count inside volume ``V``.

    ``(V / sqrt(2**d)) (2 alpha / pi)**(d/2)``; not clamped below one.
    """
    return schmidt_per_volume_at_alpha(alpha(params, t), V, dims)


def free_decay_timescale(params: SystemParams) -> float:
    """Time ``M a**2 / (2 hbar)`` after which free spreading dominates the width."""
    return params.M * params.a**2 / (2.0 * params.hbar)


def free_decay_exponent(params: SystemParams, t_window, dims: int = 3, samples: int = 201) -> float:
    """Log-log slope of ``S_V(t)`` for free evolution over ``t_window``.

    Samples are log-spaced; the window must start at ten decay timescales or
    later, where the slope approaches ``-dims``.
    """
    _check_dims(dims)
    if not params.is_free:
        raise RegimeError("decay exponent is defined for free evolution only")
    t0, t1 = (float(v) for v in t_window)
    if t0 < 10.0 * free_decay_timescale(params) * (1 - 1e-12) or t1 <= t0:
        raise RegimeError(
            f"window must lie beyond 10 * M a^2 / (2 hbar) = {10 * free_decay_timescale(params):g}"
        )
    t = np.geomspace(t0, t1, samples)
    s = schmidt_per_volume_at_alpha(alpha_free(params, t), 1.0, dims)
    slope, _ = np.polyfit(np.log(t), np.log(s), 1)
    return float(slope)


@dataclass(frozen=True)
class EntanglementReport:
    times: np.ndarray
    schmidt_per_volume: np.ndarray
    volume: float
    purity_density: np.ndarray
    dims: int
    decay_exponent: Optional[float] = None


def entanglement_report(params: SystemParams, times, volume: float = 1.0, dims: int = 3) -> EntanglementReport:
    times = np.asarray(times, dtype=float)
    exponent = None
    if params.is_free:
        tau = free_decay_timescale(params)
        exponent = free_decay_exponent(params, (10.0 * tau, 1000.0 * tau), dims)
    return EntanglementReport(
        times=times,
        schmidt_per_volume=np.atleast_1d(schmidt_per_volume(params, times, volume, dims)),
        volume=volume,
        purity_density=np.atleast_1d(purity_trace(params, times, dims)),
        dims=dims,
        decay_exponent=exponent,
    )
