"""Right-hand sides and algebraic outputs of the angle dynamics (all pu)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import NetworkState


@dataclass(frozen=True)
class PscParams:
    """Power synchronization control parameters.

    ``k`` is the effective gain in rad/s per pu power (``K_i * s_base``).
    ``omega0`` only serves to rebuild absolute phase angles for reporting.
    """

    k: float
    p_ref: float
    v_mref: float = 1.0
    v_g: float = 1.0
    i_limit: float = 1.8
    omega0: float = 2.0 * math.pi * 50.0

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k!r}")
        for name in ("v_mref", "v_g", "i_limit"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class SgParams:
    """Swing-equation parameters: ``j_eff * ddelta = p_m - p_e - d * ddelta/dt``."""

    p_m: float
    j_eff: float
    d: float = 0.0
    omega_n: float = 2.0 * math.pi * 50.0

    def __post_init__(self):
        if not self.j_eff > 0:
            raise DomainError(f"j_eff must be positive, got {self.j_eff!r}")
        if self.d < 0:
            raise DomainError(f"d must be non-negative, got {self.d!r}")


@dataclass(frozen=True)
class AngleState:
    delta: float
    delta_dot: float = 0.0


def _check_x(x):
    if np.any(np.asarray(x) <= 0):
        raise DomainError(f"transfer reactance must be positive, got {x!r}")


def electrical_power(delta, v1, v2, x):
    _check_x(x)
    return v1 * v2 * np.sin(delta) / x


def grid_current(delta, v1, v2, x):
    """Magnitude of ``(V1 e^{j delta} - V2) / (j x)``."""
    _check_x(x)
    # half-angle form avoids cancellation near delta = 0
    half = np.sin(np.asarray(delta) / 2.0)
    return np.sqrt((v1 - v2) ** 2 + 4.0 * v1 * v2 * half * half) / x


def psc_rhs(delta, p: PscParams, net: NetworkState):
    # V_PCC tracks V_mref instantaneously (inner voltage loop assumed fast)
    return p.k * (p.p_ref - electrical_power(delta, p.v_mref, p.v_g, net.x_transfer))


def ab_coefficients(p: PscParams, net: NetworkState) -> tuple[float, float]:
    """``(a, b)`` with ``d(delta)/dt = a - b sin(delta)``."""
    _check_x(net.x_transfer)
    return p.k * p.p_ref, p.k * p.v_mref * p.v_g / net.x_transfer


def sg_rhs(s: AngleState, p: SgParams, net: NetworkState, v1: float = 1.0, v2: float = 1.0):
    p_e = electrical_power(s.delta, v1, v2, net.x_transfer)
    return s.delta_dot, (p.p_m - p_e - p.d * s.delta_dot) / p.j_eff


def sg_energy(delta, delta_dot, p: SgParams, net: NetworkState, v1: float = 1.0, v2: float = 1.0):
    """Lossless swing-equation energy; constant along undamped trajectories."""
    return (
        0.5 * p.j_eff * np.square(delta_dot)
        - p.p_m * delta
        - v1 * v2 / net.x_transfer * np.cos(delta)
    )
