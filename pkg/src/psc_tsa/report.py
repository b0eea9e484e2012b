"""Machine-readable report fragments assembled from a resolved config."""

from __future__ import annotations

import math
from typing import Optional

from . import __version__
from .analytic import cca, cct, find_equilibria
from .config import ScenarioConfig
from .simulate import SimReport, numeric_cct


def _deg(x: Optional[float]) -> Optional[float]:
    return None if x is None else math.degrees(x)


def provenance(cfg: ScenarioConfig) -> dict:
    return {"tool": "psc-tsa", "version": __version__, "config_sha256": cfg.digest()}


def equilibria_fragment(cfg: ScenarioConfig) -> dict:
    out = {}
    for key, net in cfg.networks().items():
        eq = find_equilibria(cfg.psc, net)
        out[net.label.value] = {
            "x_transfer_pu": net.x_transfer,
            "p_max_pu": eq.p_max,
            "sep_rad": eq.sep,
            "sep_deg": _deg(eq.sep),
            "uep_rad": eq.uep,
            "uep_deg": _deg(eq.uep),
        }
    return out


def cca_fragment(cfg: ScenarioConfig) -> dict:
    angle = cca(cfg.psc, cfg.networks()["post"])
    return {"cca_rad": angle, "cca_deg": math.degrees(angle)}


def cct_fragment(cfg: ScenarioConfig, delta0: Optional[float] = None, time_tol: float = 1e-4) -> dict:
    nets = cfg.networks()
    sc = cfg.scenario(delta0=delta0)
    d0 = sc.delta0 if sc.delta0 is not None else find_equilibria(cfg.psc, nets["pre"]).sep
    analytic = cct(cfg.psc, nets["during"], nets["post"], d0)
    numeric = numeric_cct(sc, cfg.psc, time_tol=time_tol, rel_tol=cfg.rel_tol)
    frag = cca_fragment(cfg)
    frag.update(
        {
            "delta0_rad": d0,
            "delta0_deg": math.degrees(d0),
            "cct_analytic_s": analytic,
            "cct_numeric_s": numeric,
            "cct_difference_s": numeric - analytic,
            "time_tol_s": time_tol,
        }
    )
    return frag


def run_fragment(report: SimReport, clear_after: Optional[float], model: str) -> dict:
    d = report.to_dict()
    d["model"] = model
    d["clear_after_s"] = clear_after
    return d


def build_report(cfg: ScenarioConfig, **fragments) -> dict:
    out = {"provenance": provenance(cfg), "parameters": cfg.to_dict()}
    out.update(fragments)
    return out
