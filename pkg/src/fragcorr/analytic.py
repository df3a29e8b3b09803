"""Closed-form evolution of the center-of-mass Gaussian.

The initial state ``exp(-X**2 / a**2)`` stays Gaussian under the oscillator
sector, ``psi(X, t) ~ exp((i c_f(t) - alpha(t)) X**2)``. Everything here is a
vectorized function of ``t`` (scalar or array).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .model import SystemParams


def _check_dims(dims: int) -> None:
    if dims not in (1, 3):
        raise PreconditionError(f"dims must be 1 or 3, got {dims!r}")


def _as_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise PreconditionError("times must be non-negative")
    return t


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def alpha(params: SystemParams, t):
    """Gaussian width coefficient of ``|psi|**2 ~ exp(-2 alpha X**2)``.

    Oscillates with period ``pi / omega`` between ``1/a**2`` and
    ``(M omega a / 2 hbar)**2``. The free case is routed to :func:`alpha_free`.
    """
    if params.is_free:
        return alpha_free(params, t)
    t = _as_time(t)
    M, w, a, hbar = params.M, params.omega, params.a, params.hbar
    s, c = np.sin(w * t), np.cos(w * t)
    num = M**2 * w**2 * a**2
    den = 4.0 * hbar**2 * s**2 + M**2 * a**4 * w**2 * c**2
    return _scalar(num / den)


def alpha_free(params: SystemParams, t):
    t = _as_time(t)
    a = params.a
    return _scalar(1.0 / (a**2 + (2.0 * params.hbar * t / (params.M * a)) ** 2))


def alpha_bounds(params: SystemParams) -> tuple[float, float]:
    """``(alpha_minus, alpha_plus)``; ``alpha_plus`` is 0 for free evolution."""
    alpha_minus = 1.0 / params.a**2
    alpha_plus = (params.M * params.omega * params.a / (2.0 * params.hbar)) ** 2
    return alpha_minus, alpha_plus


def phase_coeff(params: SystemParams, t):
    """Coefficient ``c_f`` of the real phase ``f(X, t) = c_f(t) X**2``.

    Evaluated over a common denominator,

        c_f = M omega s c (4 hbar**2 - M**2 omega**2 a**4)
              / (2 hbar (4 hbar**2 s**2 + M**2 omega**2 a**4 c**2)),

    which is finite and vanishes at ``omega t = n pi``; the two-term form
    diverges term by term there.
    """
    t = _as_time(t)
    M, a, hbar = params.M, params.a, params.hbar
    if params.is_free:
        b2 = (2.0 * hbar / (M * a**2)) ** 2
        return _scalar(M / (2.0 * hbar) * b2 * t / (1.0 + b2 * t**2))
    w = params.omega
    s, c = np.sin(w * t), np.cos(w * t)
    num = M * w * s * c * (4.0 * hbar**2 - M**2 * w**2 * a**4)
    den = 2.0 * hbar * (4.0 * hbar**2 * s**2 + M**2 * w**2 * a**4 * c**2)
    return _scalar(num / den)


def wavefunction(params: SystemParams, t: float, X):
    """One Cartesian component of the normalized state, up to a global phase.

    Returns ``(2 alpha / pi)**(1/4) * exp((i c_f - alpha) X**2)``; the 3-D state
    is the product of three such factors.
    """
    al = alpha(params, t)
    cf = phase_coeff(params, t)
    X = np.asarray(X, dtype=float)
    return (2.0 * al / np.pi) ** 0.25 * np.exp((1j * cf - al) * X**2)


def wavefunction_density(params: SystemParams, t, X, dims: int = 3):
    """Relative probability density at center-of-mass distance ``|X|``.

    ``(2 alpha / pi)**(dims/2) * exp(-2 alpha X**2)``, a density per unit volume
    of the relative coordinate.
    """
    _check_dims(dims)
    al = np.asarray(alpha(params, t))
    X = np.asarray(X, dtype=float)
    return _scalar((2.0 * al / np.pi) ** (dims / 2.0) * np.exp(-2.0 * al * X**2))


def perfect_correlation_density(params: SystemParams, t, dims: int = 3):
    """Density of detecting ``x = -y`` exactly, i.e. ``X = 0``."""
    _check_dims(dims)
    al = np.asarray(alpha(params, t))
    return _scalar((2.0 * al / np.pi) ** (dims / 2.0))


@dataclass(frozen=True)
class WidthTrajectory:
    params: SystemParams
    times: np.ndarray
    alpha: np.ndarray
    alpha_minus: float
    alpha_plus: float
    period: float  # math.inf for free evolution

    @property
    def free(self) -> bool:
        return self.params.is_free


def width_trajectory(params: SystemParams, times) -> WidthTrajectory:
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise PreconditionError("times must be ordered")
    lo, hi = alpha_bounds(params)
    period = math.inf if params.is_free else math.pi / params.omega
    return WidthTrajectory(
        params=params,
        times=times,
        alpha=np.atleast_1d(alpha(params, times)),
        alpha_minus=lo,
        alpha_plus=hi,
        period=period,
    )
