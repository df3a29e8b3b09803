"""Heisenberg-picture moments, spreading law and fragment alignment.

The center-of-mass operators rotate in phase space,

    X(t) = X0 cos(wt) + P0 sin(wt) / (M w)
    P(t) = -M w X0 sin(wt) + P0 cos(wt),

(``X(t) = X0 + P0 t / M`` without coupling) while the single-fragment mean
momentum is conserved, so ``<x(t)> = p0 t / m`` in every regime.

Two printed variants of these laws are kept next to the derived ones so that
reports can show the discrepancy: the variance with ``4 M**2`` denominators
and the free alignment constant ``lambda / (16 pi dX)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PreconditionError
from .model import MomentState, SystemParams


def _phase_map(params: SystemParams, t: float) -> tuple[float, float, float, float]:
    """Entries ``(xx, xp, px, pp)`` of the linear map taking ``(X0, P0)`` to time ``t``."""
    M = params.M
    if params.is_free:
        return 1.0, t / M, 0.0, 1.0
    w = params.omega
    s, c = math.sin(w * t), math.cos(w * t)
    return c, s / (M * w), -M * w * s, c


def evolve_moments(state: MomentState, params: SystemParams, t: float) -> MomentState:
    if t < 0:
        raise PreconditionError("t must be non-negative")
    xx, xp, px, pp = _phase_map(params, t)
    vx, vp, cv = state.dX**2, state.dP**2, state.covXP
    var_x = xx**2 * vx + xp**2 * vp + 2.0 * xx * xp * cv
    var_p = px**2 * vx + pp**2 * vp + 2.0 * px * pp * cv
    cov = xx * px * vx + xp * pp * vp + (xx * pp + xp * px) * cv
    return MomentState(
        dX=math.sqrt(var_x),
        dP=math.sqrt(var_p),
        covXP=cov,
        p0=state.p0,
        meanX=xx * state.meanX + xp * state.meanP,
        meanP=px * state.meanX + pp * state.meanP,
        hbar=state.hbar,
    )


def _require_zero_means(state: MomentState) -> None:
    if state.meanX != 0 or state.meanP != 0:
        raise PreconditionError("variance law assumes <X0> = <P0> = 0")


def variance_X(state: MomentState, params: SystemParams, t):
    """Variance of one center-of-mass component at time(s) ``t``."""
    _require_zero_means(state)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise PreconditionError("t must be non-negative")
    M = params.M
    vx, vp, cv = state.dX**2, state.dP**2, state.covXP
    if params.is_free:
        out = vx + vp * t**2 / M**2 + 2.0 * t * cv / M
    else:
        w = params.omega
        s, c = np.sin(w * t), np.cos(w * t)
        out = vx * c**2 + vp * s**2 / (M * w) ** 2 + cv * 2.0 * s * c / (M * w)
    return float(out) if out.ndim == 0 else out


def variance_X_printed(state: MomentState, params: SystemParams, t):
    """Variance law with the printed ``4 M**2`` denominators, for comparison only.

    The covariance enters with coefficient ``sin cos / (M w)`` (``t / M`` free),
    as printed.
    """
    _require_zero_means(state)
    t = np.asarray(t, dtype=float)
    M = params.M
    vx, vp, cv = state.dX**2, state.dP**2, state.covXP
    if params.is_free:
        out = vx + vp * t**2 / (4.0 * M**2) + t * cv / M
    else:
        w = params.omega
        s, c = np.sin(w * t), np.cos(w * t)
        out = vx * c**2 + vp * s**2 / (4.0 * M**2 * w**2) + cv * s * c / (M * w)
    return float(out) if out.ndim == 0 else out


def mean_position(state: MomentState, params: SystemParams, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise PreconditionError("t must be non-negative")
    out = state.p0 * t / params.m
    return float(out) if out.ndim == 0 else out


def tan_theta(state: MomentState, params: SystemParams, t):
    """Angular deviation ``dX(t) / <x(t)>`` of the fragment pair."""
    if state.p0 <= 0:
        raise PreconditionError("alignment needs p0 > 0")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise PreconditionError("alignment needs t > 0")
    out = np.sqrt(variance_X(state, params, t)) / mean_position(state, params, t)
    return float(out) if np.ndim(out) == 0 else out


def tan_theta_asymptote(state: MomentState, params: SystemParams) -> float:
    """Large-time limit of :func:`tan_theta`.

    Zero with coupling, since ``dX`` stays bounded. For free evolution the limit
    is ``m dP / (M p0) = dP / (2 p0)``; for a minimum-uncertainty state this is
    ``lambda / (8 pi dX)``.
    """
    if state.p0 <= 0:
        raise PreconditionError("alignment needs p0 > 0")
    if not params.is_free:
        return 0.0
    return params.m * state.dP / (params.M * state.p0)


def tan_theta_asymptote_printed(state: MomentState, params: SystemParams) -> float:
    """Printed free limit ``m dP / (2 M p0)``, i.e. ``lambda / (16 pi dX)``."""
    if state.p0 <= 0:
        raise PreconditionError("alignment needs p0 > 0")
    if not params.is_free:
        return 0.0
    return params.m * state.dP / (2.0 * params.M * state.p0)


@dataclass(frozen=True)
class AlignmentReport:
    times: np.ndarray
    var_X: np.ndarray
    mean_x: np.ndarray
    tan_theta: np.ndarray
    asymptote: Optional[float]
    asymptote_printed: Optional[float]
    # TD is the transverse spread dX, R the travelled distance <x>.
    metadata: dict = field(default_factory=lambda: {"TD": "sqrt(var_X)", "R": "mean_x"})


def alignment_report(state: MomentState, params: SystemParams, times) -> AlignmentReport:
    """Alignment series; ``tan_theta`` is NaN where ``<x> <= 0``."""
    times = np.asarray(times, dtype=float)
    var = np.atleast_1d(variance_X(state, params, times))
    mx = np.atleast_1d(mean_position(state, params, times))
    with np.errstate(divide="ignore", invalid="ignore"):
        tt = np.where(mx > 0, np.sqrt(var) / np.where(mx > 0, mx, 1.0), np.nan)
    if state.p0 > 0:
        asym = tan_theta_asymptote(state, params)
        asym_printed = tan_theta_asymptote_printed(state, params)
    else:
        asym = asym_printed = None
    return AlignmentReport(times, var, mx, tt, asym, asym_printed)
