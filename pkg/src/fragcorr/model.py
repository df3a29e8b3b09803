"""Physical parameters, regime classification and the initial Gaussian state.

Two equal-mass fragments interact through ``V = kappa * (x + y)**2``. In
center-of-mass ``X = (x + y) / 2`` and relative ``Y = x - y`` coordinates the
``X`` sector is a harmonic oscillator of total mass ``M = 2 m`` and angular
frequency ``omega = sqrt(8 kappa / M)``; the ``Y`` sector (reduced mass
``mu = m / 2``) is free. All 3-D quantities are isotropic, so every state is
described by one scalar component.

Units are never fixed; the defaults are natural units ``hbar = m = 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParameterDomainError

# Relative tolerance on omega == critical_omega.
CRITICAL_RTOL = 1e-12


class RegimeTag(str, enum.Enum):
    FREE = "Free"
    SOFT = "Soft"
    CRITICAL = "Critical"
    STIFF = "Stiff"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SystemParams:
    """Primitive inputs plus derived constants of the two-fragment system.

    Parameters
    ----------
    m : float
        Mass of each fragment.
    hbar : float
        Reduced Planck constant.
    kappa : float
        Coupling strength of ``kappa * (x + y)**2``.
    a : float
        Initial center-of-mass width, ``psi_0 ~ exp(-X**2 / a**2)``.

    Notes
    -----
    The classical coupled-oscillator coefficients of this mapping are
    ``C1 = C2 = kappa`` and ``C12 = 2 kappa``; see :attr:`oscillator_coefficients`.
    """

    m: float
    hbar: float
    kappa: float
    a: float
    M: float = field(init=False)
    mu: float = field(init=False)
    omega: float = field(init=False)
    epsilon: float = field(init=False)

    def __post_init__(self) -> None:
        for name in ("m", "hbar", "a"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterDomainError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ParameterDomainError(f"kappa must be non-negative and finite, got {self.kappa!r}")
        M = 2.0 * self.m
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "mu", self.m / 2.0)
        object.__setattr__(self, "omega", math.sqrt(8.0 * self.kappa / M))
        object.__setattr__(self, "epsilon", self.a**2 / self.hbar)

    @property
    def critical_omega(self) -> float:
        """Frequency at which the width stays constant, ``2 hbar / (M a**2)``."""
        return 2.0 * self.hbar / (self.M * self.a**2)

    @property
    def is_free(self) -> bool:
        return self.kappa == 0.0

    @property
    def oscillator_coefficients(self) -> tuple[float, float, float]:
        return (self.kappa, self.kappa, 2.0 * self.kappa)

    @property
    def regime(self) -> "Regime":
        return classify_regime(self)

    @classmethod
    def from_omega(cls, m: float, hbar: float, omega: float, a: float) -> "SystemParams":
        """Build parameters from the oscillation frequency instead of ``kappa``."""
        if not (math.isfinite(omega) and omega >= 0):
            raise ParameterDomainError(f"omega must be non-negative and finite, got {omega!r}")
        return cls(m=m, hbar=hbar, kappa=(2.0 * m) * omega**2 / 8.0, a=a)


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    critical_omega: float


@dataclass(frozen=True)
class MomentState:
    """First and second moments of one center-of-mass component.

    ``dX`` and ``dP`` are standard deviations of ``X`` and of the total momentum
    ``P = p_x + p_y``; ``covXP`` is the symmetrized covariance. ``p0`` is the mean
    momentum of a single fragment, which the coupling never changes.
    """

    dX: float
    dP: float
    covXP: float = 0.0
    p0: float = 0.0
    meanX: float = 0.0
    meanP: float = 0.0
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if not (self.dX > 0 and self.dP > 0):
            raise ParameterDomainError("dX and dP must be positive")
        if not math.isfinite(self.p0):
            raise ParameterDomainError("p0 must be finite")

    @property
    def wavelength(self) -> Optional[float]:
        """Mean de Broglie wavelength ``h / p0``; ``None`` when ``p0 == 0``."""
        if self.p0 == 0:
            return None
        return 2.0 * math.pi * self.hbar / abs(self.p0)

    @property
    def uncertainty_product(self) -> float:
        return self.dX * self.dP

    @property
    def is_pure_gaussian(self) -> bool:
        det = self.dX**2 * self.dP**2 - self.covXP**2
        return math.isclose(det, self.hbar**2 / 4.0, rel_tol=1e-9)


def derive_params(m: float, hbar: float, kappa: float, a: float) -> SystemParams:
    return SystemParams(m=float(m), hbar=float(hbar), kappa=float(kappa), a=float(a))


def classify_regime(params: SystemParams) -> Regime:
    """Compare the oscillation frequency with ``2 hbar / (M a**2)``.

    Stiff coupling narrows the center-of-mass packet during each half period,
    soft coupling lets it breathe wider, and at the critical frequency the
    initial Gaussian is the oscillator ground state.
    """
    crit = params.critical_omega
    if params.is_free:
        tag = RegimeTag.FREE
    elif math.isclose(params.omega, crit, rel_tol=CRITICAL_RTOL, abs_tol=0.0):
        tag = RegimeTag.CRITICAL
    elif params.omega > crit:
        tag = RegimeTag.STIFF
    else:
        tag = RegimeTag.SOFT
    return Regime(tag=tag, critical_omega=crit)


def min_uncertainty_state(params: SystemParams, p0: float = 0.0) -> MomentState:
    """Moments of ``exp(-X**2 / a**2)``: ``dX = a/2``, ``dP = hbar/a``, no covariance."""
    return MomentState(
        dX=params.a / 2.0,
        dP=params.hbar / params.a,
        covXP=0.0,
        p0=float(p0),
        hbar=params.hbar,
    )
