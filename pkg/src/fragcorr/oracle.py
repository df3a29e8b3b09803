"""Independent numerical checks of the closed forms.

Nothing in this module evaluates the analytic width, phase or variance laws
while propagating: the center-of-mass sector is integrated with a Strang
split-operator scheme on a periodic grid, the relative sector is a free
spectral propagation, and purities come from dense contraction of a sampled
two-particle wavefunction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DomainTooSmallError,
    NumericalError,
    PreconditionError,
    ResolutionError,
    ShapeError,
)
from .model import MomentState, SystemParams, min_uncertainty_state

NORM_DRIFT_TOL = 1e-10
EDGE_DENSITY_TOL = 1e-12
KURTOSIS_TOL = 1e-3
MAX_OMEGA_DT = 1e-2
DT_FACTOR = 2.5e-4
# Fraction of the grid (each side) inspected for edge leakage, in x and k.
_EDGE_FRACTION = 1 / 64


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-extent, extent)`` with time step ``dt``."""

    n: int
    extent: float
    dt: float

    def __post_init__(self) -> None:
        if self.n < 256 or not _is_pow2(self.n):
            raise ResolutionError(f"grid needs n >= 256 and a power of two, got n={self.n}")
        if not self.extent > 0:
            raise ResolutionError("extent must be positive")
        if not self.dt > 0:
            raise ResolutionError("dt must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.extent + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.dx)


@dataclass
class GridWavefunction:
    amplitudes: np.ndarray
    spec: GridSpec
    t: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.spec.x

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.density) * self.spec.dx)

    def moments(self) -> tuple[float, float, float]:
        """Mean, variance and excess kurtosis of ``|psi|**2``."""
        rho = self.density
        w = rho / rho.sum()
        x = self.x
        mean = float(np.dot(w, x))
        d = x - mean
        var = float(np.dot(w, d**2))
        kurt = float(np.dot(w, d**4)) / var**2 - 3.0
        return mean, var, kurt

    def overlap(self, other) -> complex:
        """``<self|other>``; ``other`` may be an array sampled on the same grid."""
        amp = other.amplitudes if isinstance(other, GridWavefunction) else np.asarray(other)
        return complex(np.vdot(self.amplitudes, amp) * self.spec.dx)


def _variance_bounds(params: SystemParams, state: MomentState, t_final: float) -> tuple[float, float]:
    """Largest position and momentum spreads reached on ``[0, t_final]``."""
    vx, vp, cv = state.dX**2, state.dP**2, state.covXP
    if params.is_free:
        sx = max(state.dX, math.sqrt(max(vx + vp * t_final**2 / params.M**2 + 2 * t_final * cv / params.M, 0.0)))
        return sx, state.dP
    Mw = params.M * params.omega
    # Both spreads trace ellipses in (cos, sin); take the largest eigenvalue.
    sx2 = np.linalg.eigvalsh([[vx, cv / Mw], [cv / Mw, vp / Mw**2]]).max()
    sp2 = np.linalg.eigvalsh([[vp, -cv * Mw], [-cv * Mw, vx * Mw**2]]).max()
    return math.sqrt(sx2), math.sqrt(sp2)


def grid_for_state(
    params: SystemParams,
    state: MomentState,
    t_final: float = 0.0,
    n: Optional[int] = None,
    dt: Optional[float] = None,
) -> GridSpec:
    """Grid covering the widest and the sharpest packet reached by ``t_final``.

    Extent is forty position spreads (twenty Gaussian ``1/sqrt(alpha)`` widths)
    plus any mean excursion; ``n`` is raised from 4096 until the momentum
    content sits well inside the Nyquist band. ``dt`` defaults to
    ``DT_FACTOR * min(pi / omega, M a**2 / hbar)``, which keeps the splitting
    error of the width below ``2e-7`` relative.
    """
    sx, sp = _variance_bounds(params, state, t_final)
    excursion = abs(state.meanX) + abs(state.meanP) * (
        t_final / params.M if params.is_free else 1.0 / (params.M * params.omega)
    )
    extent = 40.0 * sx + excursion
    if n is None:
        kneed = (12.0 * sp + abs(state.meanP) + params.M * params.omega * abs(state.meanX)) / params.hbar
        n = 4096
        while math.pi / (2.0 * extent / n) < kneed:
            n *= 2
    if dt is None:
        scale = params.M * params.a**2 / params.hbar
        if not params.is_free:
            scale = min(scale, math.pi / params.omega)
        dt = DT_FACTOR * scale
    return GridSpec(n=n, extent=extent, dt=dt)


def default_grid(params: SystemParams, t_final: float = 0.0, n: Optional[int] = None,
                 dt: Optional[float] = None) -> GridSpec:
    return grid_for_state(params, min_uncertainty_state(params), t_final, n=n, dt=dt)


def gaussian_state(spec: GridSpec, params: SystemParams, state: Optional[MomentState] = None) -> GridWavefunction:
    """Pure Gaussian on the grid with the moments of ``state``.

    ``exp(-(A - iB)(X - X0)**2 + i P0 X / hbar)`` with ``A = 1/(4 dX**2)`` and
    ``B = covXP / (2 hbar dX**2)``; the default is ``exp(-X**2/a**2)``.
    """
    if state is None:
        state = min_uncertainty_state(params)
    if not state.is_pure_gaussian:
        raise PreconditionError("grid oracle represents pure Gaussian states only "
                                "(dX^2 dP^2 - cov^2 must equal hbar^2/4)")
    x = spec.x
    A = 1.0 / (4.0 * state.dX**2)
    B = state.covXP / (2.0 * params.hbar * state.dX**2)
    d = x - state.meanX
    psi = np.exp(-(A - 1j * B) * d**2 + 1j * state.meanP * x / params.hbar)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * spec.dx)
    return GridWavefunction(psi.astype(complex), spec, 0.0)


class _Stepper:
    """Strang splitting ``e^{-iV dt/2} e^{-iT dt} e^{-iV dt/2}`` for one sector."""

    def __init__(self, spec: GridSpec, mass: float, hbar: float, potential: np.ndarray):
        self.spec = spec
        self.hbar = hbar
        self.potential = potential
        self.kinetic = hbar**2 * spec.k**2 / (2.0 * mass)

    def run(self, psi: np.ndarray, dt: float, nsteps: int, check_every: int = 64) -> np.ndarray:
        half = np.exp(-0.5j * self.potential * dt / self.hbar)
        full = half * half
        kin = np.exp(-1j * self.kinetic * dt / self.hbar)
        fft, ifft = np.fft.fft, np.fft.ifft
        psi = half * psi
        for i in range(nsteps):
            psi = ifft(kin * fft(psi))
            if i + 1 < nsteps:
                psi *= full
            if (i + 1) % check_every == 0:
                # |e^{-iV dt/2}| = 1, so the modulus is meaningful mid-step.
                check_edges(psi, self.spec)
        return half * psi

    def energy(self, psi: np.ndarray) -> float:
        pk = np.abs(np.fft.fft(psi)) ** 2
        rho = np.abs(psi) ** 2
        return float(np.dot(self.kinetic, pk) / pk.sum() + np.dot(self.potential, rho) / rho.sum())


def check_edges(psi: np.ndarray, spec: GridSpec) -> None:
    """Raise if density touches the box edge or the momentum band edge."""
    n = psi.size
    m = max(1, int(n * _EDGE_FRACTION))
    rho = np.abs(psi) ** 2
    edge = max(rho[:m].max(), rho[-m:].max())
    if edge > EDGE_DENSITY_TOL:
        raise DomainTooSmallError(
            f"density {edge:.3e} at grid edge exceeds {EDGE_DENSITY_TOL:g}; increase extent")
    pk = np.abs(np.fft.fftshift(np.fft.fft(psi))) ** 2
    pk /= pk.max()
    if max(pk[:m].max(), pk[-m:].max()) > EDGE_DENSITY_TOL:
        raise ResolutionError("momentum content reaches the Nyquist band; increase n")


def _stepper(spec: GridSpec, params: SystemParams) -> _Stepper:
    V = 0.5 * params.M * params.omega**2 * spec.x**2
    return _Stepper(spec, params.M, params.hbar, V)


def _advance(stepper: _Stepper, wf: GridWavefunction, params: SystemParams, t_final: float,
             norm0: float) -> GridWavefunction:
    span = t_final - wf.t
    if span < 0:
        raise PreconditionError("cannot propagate backwards")
    if span == 0:
        return wf
    spec = wf.spec
    if params.is_free:
        # No potential: one kinetic step is exact.
        nsteps = 1
    else:
        nsteps = max(1, math.ceil(span / spec.dt - 1e-9))
    psi = stepper.run(wf.amplitudes, span / nsteps, nsteps)
    check_edges(psi, spec)
    out = GridWavefunction(psi, spec, t_final)
    drift = abs(out.norm - norm0)
    if drift > NORM_DRIFT_TOL:
        raise NumericalError(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_TOL:g} at t={t_final:g}")
    return out


def _check_step(spec: GridSpec, params: SystemParams) -> None:
    if params.omega * spec.dt > MAX_OMEGA_DT:
        raise ResolutionError(f"omega*dt = {params.omega * spec.dt:.3g} exceeds {MAX_OMEGA_DT:g}")


def split_step_evolve(wf: GridWavefunction, params: SystemParams, t_final: float) -> GridWavefunction:
    """Propagate the center-of-mass sector (mass ``M``, potential ``M w**2 X**2 / 2``)."""
    _check_step(wf.spec, params)
    check_edges(wf.amplitudes, wf.spec)
    return _advance(_stepper(wf.spec, params), wf, params, t_final, wf.norm)


def propagate(wf: GridWavefunction, params: SystemParams, times: Sequence[float]) -> list[GridWavefunction]:
    """Snapshots at increasing ``times`` taken along a single propagation."""
    _check_step(wf.spec, params)
    check_edges(wf.amplitudes, wf.spec)
    stepper = _stepper(wf.spec, params)
    norm0 = wf.norm
    out = []
    for t in times:
        wf = _advance(stepper, wf, params, float(t), norm0)
        out.append(wf)
    return out


def energy(wf: GridWavefunction, params: SystemParams) -> float:
    """Discrete ``<H>`` of the center-of-mass sector (spectral kinetic term)."""
    return _stepper(wf.spec, params).energy(wf.amplitudes)


class PropagationDiagnostics(NamedTuple):
    times: np.ndarray
    norm_drift: float
    energy_drift: float  # relative


def propagation_diagnostics(params: SystemParams, t_final: float, samples: int = 200,
                            spec: Optional[GridSpec] = None) -> PropagationDiagnostics:
    """Largest norm and relative energy deviations over ``samples`` checkpoints."""
    spec = spec or default_grid(params, t_final)
    wf = gaussian_state(spec, params)
    stepper = _stepper(spec, params)
    times = np.linspace(0.0, t_final, samples + 1)[1:]
    snaps = propagate(wf, params, times)
    e0 = stepper.energy(wf.amplitudes)
    n0 = wf.norm
    norm_drift = max(abs(s.norm - n0) for s in snaps)
    e_drift = max(abs(stepper.energy(s.amplitudes) - e0) for s in snaps) / abs(e0)
    return PropagationDiagnostics(times, norm_drift, e_drift)


class AlphaEstimate(NamedTuple):
    alpha: float          # from the discrete second moment
    alpha_fit: float      # from a quadratic fit of log|psi|^2
    excess_kurtosis: float


def extract_alpha(wf: GridWavefunction) -> AlphaEstimate:
    """Width coefficient of ``|psi|**2 ~ exp(-2 alpha X**2)`` measured on the grid."""
    mean, var, kurt = wf.moments()
    if abs(kurt) > KURTOSIS_TOL:
        raise ShapeError(f"excess kurtosis {kurt:.3e} too large for a Gaussian width")
    rho = wf.density
    mask = rho > 1e-6 * rho.max()
    if mask.sum() < 8:
        raise ResolutionError("packet spans fewer than 8 grid points")
    coef = np.polyfit(wf.x[mask] - mean, np.log(rho[mask]), 2)
    return AlphaEstimate(1.0 / (4.0 * var), -coef[0] / 2.0, kurt)


def fidelity(wf: GridWavefunction, reference) -> float:
    """``|<wf|reference>|`` with both states normalized; global phase drops out."""
    ref = np.asarray(reference.amplitudes if isinstance(reference, GridWavefunction) else reference)
    dx = wf.spec.dx
    nref = math.sqrt(np.sum(np.abs(ref) ** 2) * dx)
    return abs(wf.overlap(ref)) / (math.sqrt(wf.norm) * nref)


def moment_oracle(state: MomentState, params: SystemParams, t: float,
                  spec: Optional[GridSpec] = None) -> tuple[float, float]:
    """Grid variance of ``X`` and mean fragment position at time ``t``.

    The center-of-mass variance comes from split-step propagation of a Gaussian
    with the moments of ``state``. The mean position ``<x> = <X> + <Y>/2`` adds
    the drift of a relative-coordinate packet carrying momentum ``p0``
    (``exp(i p0 Y / hbar)`` under a broad envelope), propagated freely with the
    reduced mass.
    """
    if t < 0:
        raise PreconditionError("t must be non-negative")
    spec = spec or grid_for_state(params, state, t)
    xs = propagate(gaussian_state(spec, params, state), params, [t])[0]
    mean_X, var_X, _ = xs.moments()
    return var_X, mean_X + 0.5 * _relative_drift(params, state.p0, t)


def _relative_drift(params: SystemParams, p0: float, t: float) -> float:
    if p0 == 0 or t == 0:
        return 0.0
    mu, hbar = params.mu, params.hbar
    width = 1.0
    travel = abs(p0) * t / mu
    spread = math.hypot(width, hbar * t / (2.0 * mu * width))
    extent = travel + 40.0 * spread
    kneed = abs(p0) / hbar + 12.0 / (2.0 * width)
    n = 4096
    while math.pi / (2.0 * extent / n) < kneed:
        n *= 2
    spec = GridSpec(n=n, extent=extent, dt=t)
    y = spec.x
    psi = np.exp(-(y**2) / (4.0 * width**2) + 1j * p0 * y / hbar).astype(complex)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * spec.dx)
    free = _Stepper(spec, mu, hbar, np.zeros_like(y))
    out = GridWavefunction(free.run(psi, t, 1), spec, t)
    check_edges(out.amplitudes, spec)
    return out.moments()[0]


class PurityResult(NamedTuple):
    purity: float
    schmidt_1d: float


class ReducedTraces(NamedTuple):
    trace_x: float
    purity_x: float
    trace_y: float
    purity_y: float


def reduced_purities(psi: np.ndarray, dx: float) -> ReducedTraces:
    """Trace and purity of both one-particle density matrices of ``psi[x, y]``.

    The state is normalized on the grid first; contraction is dense.
    """
    psi = np.asarray(psi)
    if not np.iscomplexobj(psi):
        psi = psi.astype(float)
    psi = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * dx * dx)
    rho_x = (psi @ psi.conj().T) * dx
    rho_y = (psi.T @ psi.conj()) * dx
    return ReducedTraces(
        trace_x=float(np.trace(rho_x).real * dx),
        purity_x=float(np.sum(np.abs(rho_x) ** 2) * dx * dx),
        trace_y=float(np.trace(rho_y).real * dx),
        purity_y=float(np.sum(np.abs(rho_y) ** 2) * dx * dx),
    )


def ridge_state(al: float, box_L: float, n: int, phase: float = 0.0) -> tuple[np.ndarray, float]:
    """``exp((i phase - al) (x + y)**2 / 4)`` sampled on ``[-box_L, box_L)**2``.

    Cell-centred points, so the ridge ``x = -y`` runs corner to corner. The
    array is real when ``phase`` is zero.
    """
    dx = 2.0 * box_L / n
    x = -box_L + dx * (np.arange(n) + 0.5)
    s2 = (x[:, None] + x[None, :]) ** 2 / 4.0
    if phase == 0.0:
        return np.exp(-al * s2), dx
    return np.exp((1j * phase - al) * s2), dx


def _purity_at(al: float, box_L: float, n: int, phase: float) -> ReducedTraces:
    psi, dx = ridge_state(al, box_L, n, phase)
    return reduced_purities(psi, dx)


def grid_purity(params: SystemParams, t: float, box_L: float = 40.0, n: int = 1024,
                check_convergence: bool = True, include_phase: bool = False) -> PurityResult:
    """Purity of the box-regularized one-fragment density matrix.

    ``box_L`` is the half-width of the square box; the Schmidt number
    ``1 / purity`` grows linearly with it, and ``schmidt_1d / box_L`` tends to
    ``sqrt(alpha / pi)``. With ``include_phase`` the chirp ``c_f`` is kept in
    the sampled state (by default the relative density state is used).
    """
    from .analytic import alpha, phase_coeff

    al = float(alpha(params, t))
    cf = float(phase_coeff(params, t)) if include_phase else 0.0
    if n < 512:
        raise ResolutionError(f"purity grid needs n >= 512, got {n}")
    if box_L * math.sqrt(al) < 20.0:
        raise ResolutionError(f"box_L*sqrt(alpha) = {box_L * math.sqrt(al):.3g} < 20; enlarge the box")
    res = _purity_at(al, box_L, n, cf)
    if check_convergence:
        fine = _purity_at(al, box_L, 2 * n, cf)
        rel = abs(fine.purity_x - res.purity_x) / fine.purity_x
        if rel > 1e-2:
            raise ResolutionError(f"purity changes by {rel:.2%} between n={n} and n={2 * n}")
    return PurityResult(res.purity_x, 1.0 / res.purity_x)
