"""Scenario configuration: JSON files whose quantities carry explicit units.

Every physical value is written as ``{"value": <number>, "unit": <tag>}``;
SI and per-unit tags may be mixed freely and are resolved against the
``base`` block. Voltages are phase quantities, tagged rms or peak.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

from .dynamics import PscParams, SgParams
from .errors import DomainError, ScenarioError
from .model import (
    FaultScenario,
    NetworkElements,
    NetworkState,
    PerUnitBase,
    QuantityKind,
    reduce_during_fault,
    reduce_post,
    reduce_pre,
    to_per_unit,
)
from .simulate import ABS_TOL, REL_TOL, SAMPLE_DT, SETTLE_TOL


class FaultKind(str, enum.Enum):
    LINE_LOSS = "LineLoss"
    GROUND_FAULT = "ThreePhaseGroundFault"


POWER_UNITS = {"W": 1.0, "kW": 1e3, "MW": 1e6, "GW": 1e9}
# phase voltage, converted to peak
VOLTAGE_UNITS = {
    "V_pk": 1.0,
    "kV_pk": 1e3,
    "V_rms": math.sqrt(2.0),
    "kV_rms": 1e3 * math.sqrt(2.0),
}
INDUCTANCE_UNITS = {"H": 1.0, "mH": 1e-3, "uH": 1e-6}
REACTANCE_UNITS = {"ohm": 1.0}
GAIN_SI = "rad/(W*s)"
GAIN_PU = "rad/s/pu"

_QUANTITY = {
    "type": "object",
    "properties": {"value": {"type": "number"}, "unit": {"type": "string"}},
    "required": ["value", "unit"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "base": {
            "type": "object",
            "properties": {"s_base": _QUANTITY, "v_base": _QUANTITY, "f_base": _QUANTITY},
            "required": ["s_base", "v_base", "f_base"],
            "additionalProperties": False,
        },
        "elements": {
            "type": "object",
            "properties": {
                "L_T": _QUANTITY,
                "L_g1": _QUANTITY,
                "L_g2": _QUANTITY,
                "L_gnd": _QUANTITY,
                "L_f": _QUANTITY,
            },
            "required": ["L_T", "L_g1", "L_g2"],
            "additionalProperties": False,
        },
        "psc": {
            "type": "object",
            "properties": {
                "K_i": _QUANTITY,
                "P_ref": _QUANTITY,
                "V_mref": _QUANTITY,
                "V_g": _QUANTITY,
                "i_limit": _QUANTITY,
            },
            "required": ["K_i", "P_ref"],
            "additionalProperties": False,
        },
        "fault": {
            "type": "object",
            "properties": {
                "kind": {"enum": [k.value for k in FaultKind]},
                "t_fault": {"type": "number"},
                "t_clear": {"type": ["number", "null"]},
                "delta0_deg": {"type": ["number", "null"]},
                "delta0_rad": {"type": ["number", "null"]},
            },
            "required": ["kind", "t_fault"],
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "properties": {
                "t_end": {"type": ["number", "null"]},
                "rel_tol": {"type": "number", "exclusiveMinimum": 0},
                "abs_tol": {"type": "number", "exclusiveMinimum": 0},
                "settle_tol": {"type": "number", "exclusiveMinimum": 0},
                "sample_dt": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "sg": {
            "type": "object",
            "properties": {
                "j_eff": {"type": "number"},
                "d": {"type": "number"},
                "p_m": _QUANTITY,
            },
            "required": ["j_eff"],
            "additionalProperties": False,
        },
    },
    "required": ["base", "elements", "psc", "fault"],
    "additionalProperties": False,
}


def _si(q: dict, table: dict, where: str) -> float:
    try:
        return q["value"] * table[q["unit"]]
    except KeyError:
        raise ScenarioError(
            f"{where}: unit {q['unit']!r} not allowed here (expected one of {sorted(table)})"
        ) from None


def _power(q, base, where):
    if q["unit"] == "pu":
        return float(q["value"])
    return to_per_unit(_si(q, POWER_UNITS, where), QuantityKind.POWER, base)


def _voltage(q, base, where):
    if q["unit"] == "pu":
        return float(q["value"])
    return to_per_unit(_si(q, VOLTAGE_UNITS, where), QuantityKind.VOLTAGE, base)


def _reactance(q, base, where):
    unit = q["unit"]
    if unit == "pu":
        return float(q["value"])
    if unit in REACTANCE_UNITS:
        return to_per_unit(_si(q, REACTANCE_UNITS, where), QuantityKind.REACTANCE, base)
    return to_per_unit(_si(q, INDUCTANCE_UNITS, where), QuantityKind.INDUCTANCE, base)


def _gain(q, base, where):
    if q["unit"] == GAIN_PU:
        return float(q["value"])
    if q["unit"] == GAIN_SI:
        return to_per_unit(float(q["value"]), QuantityKind.GAIN, base)
    raise ScenarioError(f"{where}: gain unit must be {GAIN_SI!r} or {GAIN_PU!r}")


def _pu(value: float) -> dict:
    return {"value": value, "unit": "pu"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved per-unit scenario."""

    name: str
    base: PerUnitBase
    elements: NetworkElements
    psc: PscParams
    fault_kind: FaultKind
    t_fault: float
    t_clear: Optional[float] = None
    delta0: Optional[float] = None
    t_end: Optional[float] = None
    rel_tol: float = REL_TOL
    abs_tol: float = ABS_TOL
    settle_tol: float = SETTLE_TOL
    sample_dt: float = SAMPLE_DT
    sg: Optional[SgParams] = None
    description: str = ""

    def networks(self) -> dict[str, NetworkState]:
        out = {"pre": reduce_pre(self.elements)}
        if self.fault_kind is FaultKind.GROUND_FAULT:
            out["during"] = reduce_during_fault(self.elements)
        out["post"] = reduce_post(self.elements)
        return out

    def scenario(
        self,
        clear_after: Optional[float] = None,
        never_clear: bool = False,
        delta0: Optional[float] = None,
    ) -> FaultScenario:
        """Build the timed scenario; ``clear_after`` is the fault duration in s."""
        nets = self.networks()
        t_clear = self.t_clear
        if self.fault_kind is FaultKind.LINE_LOSS:
            if clear_after is not None:
                raise ScenarioError("a line-loss scenario has no fault to clear")
            t_clear = None
        elif never_clear:
            t_clear = None
        elif clear_after is not None:
            t_clear = self.t_fault + clear_after
        return FaultScenario(
            pre=nets["pre"],
            post=nets["post"],
            t_fault=self.t_fault,
            during=nets.get("during"),
            t_clear=t_clear,
            delta0=self.delta0 if delta0 is None else delta0,
        )

    def to_dict(self) -> dict:
        """Tagged representation in resolved units; parses back identically."""
        d = {
            "name": self.name,
            "base": {
                "s_base": {"value": self.base.s_base, "unit": "W"},
                "v_base": {"value": self.base.v_base, "unit": "V_pk"},
                "f_base": {"value": self.base.f_base, "unit": "Hz"},
            },
            "elements": {
                "L_T": _pu(self.elements.x_t),
                "L_g1": _pu(self.elements.x_g1),
                "L_g2": _pu(self.elements.x_g2),
            },
            "psc": {
                "K_i": {"value": self.psc.k, "unit": GAIN_PU},
                "P_ref": _pu(self.psc.p_ref),
                "V_mref": _pu(self.psc.v_mref),
                "V_g": _pu(self.psc.v_g),
                "i_limit": _pu(self.psc.i_limit),
            },
            "fault": {
                "kind": self.fault_kind.value,
                "t_fault": self.t_fault,
                "t_clear": self.t_clear,
                "delta0_rad": self.delta0,
            },
            "sim": {
                "t_end": self.t_end,
                "rel_tol": self.rel_tol,
                "abs_tol": self.abs_tol,
                "settle_tol": self.settle_tol,
                "sample_dt": self.sample_dt,
            },
        }
        if self.description:
            d["description"] = self.description
        if self.elements.x_gnd is not None:
            d["elements"]["L_gnd"] = _pu(self.elements.x_gnd)
        if self.elements.x_f is not None:
            d["elements"]["L_f"] = _pu(self.elements.x_f)
        if self.sg is not None:
            d["sg"] = {"j_eff": self.sg.j_eff, "d": self.sg.d, "p_m": _pu(self.sg.p_m)}
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_config(raw: dict) -> ScenarioConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    problems = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if problems:
        diags = [
            f"{'/'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
            for err in problems
        ]
        raise ScenarioError("configuration does not match the schema", diags)

    try:
        b = raw["base"]
        if b["f_base"]["unit"] != "Hz":
            raise ScenarioError("base/f_base: unit must be 'Hz'")
        base = PerUnitBase(
            _si(b["s_base"], POWER_UNITS, "base/s_base"),
            _si(b["v_base"], VOLTAGE_UNITS, "base/v_base"),
            float(b["f_base"]["value"]),
        )

        el = raw["elements"]
        kind = FaultKind(raw["fault"]["kind"])
        if kind is FaultKind.GROUND_FAULT and "L_gnd" not in el:
            raise ScenarioError("elements/L_gnd is required for a ThreePhaseGroundFault")

        def opt(key):
            return _reactance(el[key], base, f"elements/{key}") if key in el else None

        elements = NetworkElements(
            x_t=_reactance(el["L_T"], base, "elements/L_T"),
            x_g1=_reactance(el["L_g1"], base, "elements/L_g1"),
            x_g2=_reactance(el["L_g2"], base, "elements/L_g2"),
            x_gnd=opt("L_gnd"),
            x_f=opt("L_f"),
        )

        ps = raw["psc"]
        one = {"value": 1.0, "unit": "pu"}
        psc = PscParams(
            k=_gain(ps["K_i"], base, "psc/K_i"),
            p_ref=_power(ps["P_ref"], base, "psc/P_ref"),
            v_mref=_voltage(ps.get("V_mref", one), base, "psc/V_mref"),
            v_g=_voltage(ps.get("V_g", one), base, "psc/V_g"),
            i_limit=_pu_only(ps.get("i_limit", {"value": 1.8, "unit": "pu"})),
            omega0=base.omega_base,
        )

        fault = raw["fault"]
        t_clear = fault.get("t_clear")
        if kind is FaultKind.LINE_LOSS and t_clear is not None:
            raise ScenarioError("fault/t_clear: a line-loss disturbance cannot be cleared")
        delta0 = fault.get("delta0_rad")
        if fault.get("delta0_deg") is not None:
            if delta0 is not None:
                raise ScenarioError("fault: give delta0_deg or delta0_rad, not both")
            delta0 = math.radians(fault["delta0_deg"])

        sim = raw.get("sim", {})
        sg = None
        if "sg" in raw:
            s = raw["sg"]
            sg = SgParams(
                p_m=_power(s["p_m"], base, "sg/p_m") if "p_m" in s else psc.p_ref,
                j_eff=float(s["j_eff"]),
                d=float(s.get("d", 0.0)),
                omega_n=base.omega_base,
            )

        cfg = ScenarioConfig(
            name=raw.get("name", "scenario"),
            description=raw.get("description", ""),
            base=base,
            elements=elements,
            psc=psc,
            fault_kind=kind,
            t_fault=float(fault["t_fault"]),
            t_clear=None if t_clear is None else float(t_clear),
            delta0=None if delta0 is None else float(delta0),
            t_end=sim.get("t_end"),
            rel_tol=float(sim.get("rel_tol", REL_TOL)),
            abs_tol=float(sim.get("abs_tol", ABS_TOL)),
            settle_tol=float(sim.get("settle_tol", SETTLE_TOL)),
            sample_dt=float(sim.get("sample_dt", SAMPLE_DT)),
            sg=sg,
        )
        cfg.scenario()  # timing checks
    except DomainError as exc:
        raise ScenarioError(str(exc)) from exc
    return cfg


def _pu_only(q: dict) -> float:
    if q["unit"] != "pu":
        raise ScenarioError("psc/i_limit: unit must be 'pu'")
    return float(q["value"])


BUNDLED = ("case1", "case2", "lab_case1", "lab_case2", "bolted_fault")


def bundled_path(name: str):
    return resources.files("psc_tsa") / "data" / f"{name}.json"


def load_config(source) -> ScenarioConfig:
    """Load a config from a path, or a bundled one by name (e.g. ``"case2"``)."""
    path = Path(source)
    if not path.exists() and str(source) in BUNDLED:
        text = bundled_path(str(source)).read_text()
    else:
        try:
            text = path.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read config {source}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: invalid JSON ({exc})") from exc
    return parse_config(raw)
