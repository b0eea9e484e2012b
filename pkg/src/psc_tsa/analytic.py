"""Closed-form analysis of the first-order power-angle equation.

``d(delta)/dt = a - b sin(delta)`` has equilibria iff ``|a| <= b``. When it
has none, the time to move between two angles is available in closed form,
which gives the critical clearing time once the critical clearing angle
(the post-fault unstable equilibrium) is known.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import PscParams, ab_coefficients, psc_rhs
from .errors import DomainError, NoEquilibriumError, ValidityDomainError
from .model import NetworkState, StateLabel

BISECT_TOL = 1e-12
SLOPE_STEP = 1e-6


class EquilibriumKind(str, enum.Enum):
    SEP = "SEP"
    UEP = "UEP"


@dataclass(frozen=True)
class Equilibria:
    p_max: float
    sep: Optional[float] = None
    uep: Optional[float] = None

    @property
    def exist(self) -> bool:
        return self.sep is not None


@dataclass(frozen=True)
class PhasePortrait:
    net_label: StateLabel
    delta: np.ndarray
    delta_dot: np.ndarray
    equilibria: list = field(default_factory=list)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.delta.tolist(), self.delta_dot.tolist()))


def find_equilibria(p: PscParams, net: NetworkState) -> Equilibria:
    return power_equilibria(p.p_ref, p.v_mref, p.v_g, net)


def power_equilibria(p_set: float, v1: float, v2: float, net: NetworkState) -> Equilibria:
    """Angles where ``v1 v2 sin(delta) / x`` equals ``p_set`` (SEP first)."""
    p_max = v1 * v2 / net.x_transfer
    ratio = p_set / p_max
    if abs(ratio) > 1.0:
        return Equilibria(p_max)
    sep = math.asin(ratio)
    return Equilibria(p_max, sep, math.pi - sep)


def _bisect(f, lo, hi, flo, tol=BISECT_TOL):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sample_portrait(
    p: PscParams, net: NetworkState, delta_min: float, delta_max: float, n: int
) -> PhasePortrait:
    """Sample ``d(delta)/dt`` on a uniform grid and locate its zeros.

    Zeros are bracketed by sign changes between neighbouring samples, then
    refined by bisection. A negative slope marks a sink (SEP).
    """
    if n < 2:
        raise DomainError(f"need at least two samples, got n={n}")
    if not delta_min < delta_max:
        raise DomainError("delta_min must be smaller than delta_max")

    delta = np.linspace(delta_min, delta_max, n)
    rate = psc_rhs(delta, p, net)

    def f(d):
        return float(psc_rhs(d, p, net))

    roots = []
    for i in range(n - 1):
        if rate[i] == 0.0:
            roots.append(float(delta[i]))
        elif rate[i] * rate[i + 1] < 0:
            roots.append(_bisect(f, float(delta[i]), float(delta[i + 1]), float(rate[i])))
    if rate[-1] == 0.0:
        roots.append(float(delta[-1]))

    equilibria = []
    for r in roots:
        slope = (f(r + SLOPE_STEP) - f(r - SLOPE_STEP)) / (2 * SLOPE_STEP)
        kind = EquilibriumKind.SEP if slope < 0 else EquilibriumKind.UEP
        equilibria.append((r, kind))
    return PhasePortrait(net.label, delta, rate, equilibria)


def _check_regime(a: float, b: float):
    if not abs(a) > abs(b):
        raise ValidityDomainError(
            f"closed form needs |a| > |b| (no equilibria), got a={a!r}, b={b!r}; "
            "integrate numerically instead"
        )


def _unwrapped_phase(delta, c, s):
    # Continuous version of arctan((tan(delta/2) - c) / s). The vector
    # (s cos h, sin h - c cos h) is an orientation-preserving linear image of
    # (cos h, sin h) with positive eigenvalues, so its angle stays within pi of h.
    h = np.asarray(delta, dtype=float) / 2.0
    ang = np.arctan2(np.sin(h) - c * np.cos(h), s * np.cos(h))
    return h + np.remainder(ang - h + np.pi, 2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class ClosedFormCoeffs:
    """Closed-form time solution ``t(delta)`` anchored at ``t(delta0) = 0``."""

    a: float
    b: float
    delta0: float

    def __post_init__(self):
        _check_regime(self.a, self.b)

    @property
    def ratio(self) -> float:
        return self.b / self.a

    @property
    def scale(self) -> float:
        # 2 / (a sqrt(1 - (b/a)^2)); sign follows a so time runs forward
        # for decreasing delta when a < 0
        return 2.0 / (self.a * math.sqrt(1.0 - self.ratio**2))

    @property
    def c_const(self) -> float:
        s = math.sqrt(1.0 - self.ratio**2)
        return -self.scale * float(_unwrapped_phase(self.delta0, self.ratio, s))

    def time(self, delta):
        s = math.sqrt(1.0 - self.ratio**2)
        return self.scale * _unwrapped_phase(delta, self.ratio, s) + self.c_const


def closed_form_time(delta, delta0: float, a: float, b: float):
    """Time for the no-equilibrium flow to carry ``delta0`` to ``delta``.

    ``delta`` may lie several turns ahead; the arctan branch is unwrapped so
    the result is continuous and monotone. Angles behind ``delta0`` (in the
    direction of motion) give negative times.
    """
    coeffs = ClosedFormCoeffs(a, b, delta0)
    s = math.sqrt(1.0 - coeffs.ratio**2)
    phase = _unwrapped_phase(delta, coeffs.ratio, s) - _unwrapped_phase(delta0, coeffs.ratio, s)
    out = coeffs.scale * phase
    return float(out) if np.ndim(out) == 0 else out


def slip_period(a: float, b: float) -> float:
    """Time for delta to advance one full turn when no equilibria exist."""
    _check_regime(a, b)
    return 2.0 * math.pi / math.sqrt(a * a - b * b)


def cca(p: PscParams, post_net: NetworkState) -> float:
    """Critical clearing angle: the post-fault unstable equilibrium."""
    eq = find_equilibria(p, post_net)
    if not eq.exist:
        raise NoEquilibriumError(
            f"post-fault network has no equilibrium (p_ref={p.p_ref} > p_max={eq.p_max:.6g}); "
            "the system cannot be restored by clearing"
        )
    return eq.uep


def cct(p: PscParams, during_net: NetworkState, post_net: NetworkState, delta0: float) -> float:
    """Critical clearing time from the analytic during-fault trajectory."""
    angle = cca(p, post_net)
    a, b = ab_coefficients(p, during_net)
    if delta0 == angle:
        return 0.0
    if delta0 > angle:
        raise DomainError(
            f"delta0={math.degrees(delta0):.4f} deg is already beyond the CCA "
            f"{math.degrees(angle):.4f} deg"
        )
    return closed_form_time(angle, delta0, a, b)
