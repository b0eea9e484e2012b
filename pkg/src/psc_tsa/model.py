"""Per-unit system and reduction of the three network configurations.

Topology: the converter's PCC feeds a series reactance ``x_t`` to a star
bus, from which two parallel lines ``x_g1`` and ``x_g2`` reach the infinite
bus. A three-phase-to-ground fault is applied at the star bus through
``x_gnd`` and cleared by opening line 2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, ScenarioError


class StateLabel(str, enum.Enum):
    PRE_FAULT = "PreFault"
    DURING_FAULT = "DuringFault"
    POST_FAULT = "PostFault"


class QuantityKind(str, enum.Enum):
    INDUCTANCE = "inductance"
    REACTANCE = "reactance"
    POWER = "power"
    VOLTAGE = "voltage"
    GAIN = "gain"


@dataclass(frozen=True)
class PerUnitBase:
    """Base quantities. ``v_base`` is the peak phase voltage.

    With ``z_base = 3 v_base**2 / (2 s_base)`` the three-phase power
    ``3/2 V1 V2 sin(delta) / X`` becomes ``v1 v2 sin(delta) / x`` in pu.
    """

    s_base: float
    v_base: float
    f_base: float

    def __post_init__(self):
        for name in ("s_base", "v_base", "f_base"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def from_rms(cls, s_base: float, v_rms_phase: float, f_base: float) -> "PerUnitBase":
        return cls(s_base, v_rms_phase * math.sqrt(2.0), f_base)

    @property
    def omega_base(self) -> float:
        return 2.0 * math.pi * self.f_base

    @property
    def z_base(self) -> float:
        return 3.0 * self.v_base**2 / (2.0 * self.s_base)


def to_per_unit(value: float, kind: QuantityKind | str, base: PerUnitBase) -> float:
    """Convert an SI quantity to per unit.

    Inductance [H] becomes a reactance at base frequency, reactance [ohm]
    is divided by ``z_base``. A PSC integral gain in rad/(W s) becomes the
    effective gain in rad/s per pu power, i.e. ``K_i * s_base``.
    """
    kind = QuantityKind(kind)
    if kind is QuantityKind.INDUCTANCE:
        return base.omega_base * value / base.z_base
    if kind is QuantityKind.REACTANCE:
        return value / base.z_base
    if kind is QuantityKind.POWER:
        return value / base.s_base
    if kind is QuantityKind.VOLTAGE:
        return value / base.v_base
    return value * base.s_base


def from_per_unit(value: float, kind: QuantityKind | str, base: PerUnitBase) -> float:
    """Inverse of :func:`to_per_unit`."""
    kind = QuantityKind(kind)
    if kind is QuantityKind.INDUCTANCE:
        return value * base.z_base / base.omega_base
    if kind is QuantityKind.REACTANCE:
        return value * base.z_base
    if kind is QuantityKind.POWER:
        return value * base.s_base
    if kind is QuantityKind.VOLTAGE:
        return value * base.v_base
    return value / base.s_base


@dataclass(frozen=True)
class NetworkElements:
    """Raw per-unit reactances of the single-converter infinite-bus circuit.

    ``x_f`` (converter filter) is kept for reporting only; the power angle
    is measured at the PCC, behind which the filter sits.
    """

    x_t: float
    x_g1: float
    x_g2: float
    x_gnd: Optional[float] = None
    x_f: Optional[float] = None

    def __post_init__(self):
        for name in ("x_t", "x_g1", "x_g2", "x_gnd", "x_f"):
            value = getattr(self, name)
            if value is None:
                continue
            if not value > 0:
                raise DomainError(f"reactance {name} must be positive, got {value!r}")


@dataclass(frozen=True)
class NetworkState:
    label: StateLabel
    x_transfer: float

    def __post_init__(self):
        if not self.x_transfer > 0:
            raise DomainError(f"x_transfer must be positive, got {self.x_transfer!r}")


def _parallel(x1: float, x2: float) -> float:
    return x1 * x2 / (x1 + x2)


def reduce_pre(e: NetworkElements) -> NetworkState:
    return NetworkState(StateLabel.PRE_FAULT, e.x_t + _parallel(e.x_g1, e.x_g2))


def reduce_during_fault(e: NetworkElements) -> NetworkState:
    """Eliminate the grounded star bus (star-delta), keep the PCC-grid branch."""
    if e.x_gnd is None:
        raise ScenarioError("a ground fault needs the grounding reactance x_gnd")
    x_p = _parallel(e.x_g1, e.x_g2)
    return NetworkState(StateLabel.DURING_FAULT, e.x_t + x_p + e.x_t * x_p / e.x_gnd)


def reduce_post(e: NetworkElements) -> NetworkState:
    return NetworkState(StateLabel.POST_FAULT, e.x_t + e.x_g1)


@dataclass(frozen=True)
class FaultScenario:
    """Timed pre -> (during) -> post sequence.

    ``during`` absent models a pure line loss at ``t_fault``. ``t_clear``
    absent means the fault is never cleared. ``delta0`` defaults to the
    pre-fault stable equilibrium, resolved by the simulator.
    """

    pre: NetworkState
    post: NetworkState
    t_fault: float
    during: Optional[NetworkState] = None
    t_clear: Optional[float] = None
    delta0: Optional[float] = None

    def __post_init__(self):
        if self.t_fault < 0:
            raise ScenarioError(f"t_fault must be >= 0, got {self.t_fault!r}")
        if self.t_clear is not None:
            if self.during is None:
                raise ScenarioError("t_clear given for a scenario without a during-fault state")
            if not self.t_clear > self.t_fault:
                raise ScenarioError(
                    f"t_clear ({self.t_clear!r}) must be later than t_fault ({self.t_fault!r})"
                )

    def segments(self, t_end: float) -> list[tuple[float, float, NetworkState]]:
        """Constant-network intervals ``(t0, t1, state)`` covering ``[0, t_end]``."""
        bounds: list[tuple[float, NetworkState]] = [(0.0, self.pre)]
        if self.during is None:
            bounds.append((self.t_fault, self.post))
        else:
            bounds.append((self.t_fault, self.during))
            if self.t_clear is not None:
                bounds.append((self.t_clear, self.post))
        out = []
        for i, (t0, state) in enumerate(bounds):
            t1 = bounds[i + 1][0] if i + 1 < len(bounds) else t_end
            t1 = min(t1, t_end)
            if t1 > t0:
                out.append((t0, t1, state))
        return out

    def state_at(self, t: float) -> NetworkState:
        """Network in force at ``t``; a switching instant belongs to the new state."""
        if t < self.t_fault:
            return self.pre
        if self.during is None:
            return self.post
        if self.t_clear is None or t < self.t_clear:
            return self.during
        return self.post

    @property
    def final_state(self) -> NetworkState:
        if self.during is not None and self.t_clear is None:
            return self.during
        return self.post
