"""Command-line entry point: ``psc-tsa <command> --config <path> ...``.

Exit codes: 0 success, 2 usage, 3 configuration, 4 domain (e.g. missing
equilibria), 5 I/O, 6 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .analytic import EquilibriumKind, power_equilibria, sample_portrait
from .config import FaultKind, ScenarioConfig, load_config
from .errors import DomainError, InconclusiveError, IntegrationError, ScenarioError
from .report import (
    build_report,
    cca_fragment,
    cct_fragment,
    equilibria_fragment,
    run_fragment,
)
from .simulate import classify_sg, sg_integrate, simulate, sweep_clearing
from .svgplot import Panel, write_svg

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_DOMAIN = 4
EXIT_IO = 5
EXIT_NUMERIC = 6

SWEEP_HEADER = ("clear_time", "clearing_angle_deg", "classification", "cycle_slips")
PORTRAIT_HEADER = ("delta_rad", "delta_dot_rad_s")

log = logging.getLogger("psc_tsa")


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _fmt_deg(x):
    return "none" if x is None else f"{math.degrees(x):.3f} deg ({x:.6f} rad)"


def _sibling(out: Path | None, default_stem: str, suffix: str) -> Path:
    if out is not None:
        return out.with_suffix(suffix)
    return Path(default_stem + suffix)


def cmd_equilibria(cfg: ScenarioConfig, args) -> int:
    frag = equilibria_fragment(cfg)
    for label, eq in frag.items():
        sep = eq["sep_rad"]
        print(
            f"{label:12s} x={eq['x_transfer_pu']:.6f} pu  p_max={eq['p_max_pu']:.6f} pu  "
            f"SEP={_fmt_deg(sep)}  UEP={_fmt_deg(eq['uep_rad'])}"
        )
    if args.out:
        _write_json(args.out, build_report(cfg, equilibria=frag))
    return EXIT_OK


def cmd_cca(cfg: ScenarioConfig, args) -> int:
    frag = cca_fragment(cfg)
    print(f"CCA = {frag['cca_deg']:.3f} deg ({frag['cca_rad']:.6f} rad)")
    if args.out:
        _write_json(args.out, build_report(cfg, cca=frag))
    return EXIT_OK


def cmd_cct(cfg: ScenarioConfig, args) -> int:
    if cfg.fault_kind is not FaultKind.GROUND_FAULT:
        raise DomainError("CCT needs a ThreePhaseGroundFault scenario")
    delta0 = None if args.delta0_deg is None else math.radians(args.delta0_deg)
    frag = cct_fragment(cfg, delta0=delta0, time_tol=args.time_tol)
    print(f"CCA          = {frag['cca_deg']:.3f} deg")
    print(f"delta0       = {frag['delta0_deg']:.3f} deg")
    print(f"CCT analytic = {frag['cct_analytic_s']:.6f} s")
    print(f"CCT numeric  = {frag['cct_numeric_s']:.6f} s")
    print(f"difference   = {frag['cct_difference_s']:.3e} s")
    if args.out:
        _write_json(args.out, build_report(cfg, equilibria=equilibria_fragment(cfg), cct=frag))
    return EXIT_OK


def _trajectory_panels(tr) -> list[Panel]:
    return [
        Panel("power angle [deg]", tr.t, [("delta", np.degrees(tr.delta))]),
        Panel("active power [pu]", tr.t, [("p_e", tr.p_e)]),
        Panel("grid current [pu]", tr.t, [("i_g", tr.i_g)], xlabel="t [s]"),
    ]


def _emit_run(cfg, args, tr, report, model) -> None:
    clear_after = None
    if tr.scenario.t_clear is not None:
        clear_after = tr.scenario.t_clear - tr.scenario.t_fault
    print(f"model={model} classification={report.label} cycle_slips={report.cycle_slips}")
    if report.clearing_angle is not None:
        print(f"clearing angle = {math.degrees(report.clearing_angle):.3f} deg")
    if report.final_delta is not None:
        print(f"final angle    = {math.degrees(report.final_delta):.3f} deg")
    print(f"peak current   = {report.peak_current:.4f} pu")

    stem = f"{cfg.name}_{model.lower()}"
    if args.out:
        tr.to_csv(args.out)
    report_path = args.report or (_sibling(args.out, stem, ".json") if args.out else None)
    if report_path:
        _write_json(
            report_path,
            build_report(
                cfg,
                equilibria=equilibria_fragment(cfg),
                runs=[run_fragment(report, clear_after, model)],
            ),
        )
    if args.svg:
        write_svg(_sibling(args.out, stem, ".svg"), _trajectory_panels(tr))


def _scenario_from_args(cfg, args):
    return cfg.scenario(
        clear_after=args.clear_at,
        never_clear=args.never_clear,
        delta0=None if args.delta0_deg is None else math.radians(args.delta0_deg),
    )


def cmd_simulate(cfg: ScenarioConfig, args) -> int:
    sc = _scenario_from_args(cfg, args)
    t_end = args.t_end if args.t_end is not None else cfg.t_end
    tr, report = simulate(sc, cfg.psc, t_end, cfg.rel_tol, cfg.settle_tol, cfg.sample_dt)
    _emit_run(cfg, args, tr, report, "PSC")
    return EXIT_OK


def cmd_sg_simulate(cfg: ScenarioConfig, args) -> int:
    if cfg.sg is None:
        raise ScenarioError("sg-simulate needs an 'sg' block in the config")
    sc = _scenario_from_args(cfg, args)
    t_end = args.t_end or cfg.t_end or (sc.t_clear or sc.t_fault) + 10.0
    tr = sg_integrate(sc, cfg.sg, cfg.psc.v_mref, cfg.psc.v_g, t_end, cfg.rel_tol,
                      sample_dt=cfg.sample_dt)
    eq = power_equilibria(cfg.sg.p_m, cfg.psc.v_mref, cfg.psc.v_g, sc.final_state)
    report = classify_sg(tr, eq, cfg.settle_tol)
    _emit_run(cfg, args, tr, report, "SG")
    return EXIT_OK


def cmd_portrait(cfg: ScenarioConfig, args) -> int:
    nets = cfg.networks()
    if args.state not in nets:
        raise ScenarioError(f"state {args.state!r} does not exist for a {cfg.fault_kind.value}")
    net = nets[args.state]
    portrait = sample_portrait(
        cfg.psc, net, math.radians(args.delta_min_deg), math.radians(args.delta_max_deg), args.n
    )
    print(f"{net.label.value}: {len(portrait.equilibria)} equilibria in range")
    for delta, kind in portrait.equilibria:
        print(f"  {kind.value} at {_fmt_deg(delta)}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(PORTRAIT_HEADER)
            for d, r in zip(portrait.delta, portrait.delta_dot):
                writer.writerow([repr(float(d)), repr(float(r))])
    if args.svg:
        markers = [
            (math.degrees(d), 0.0, kind is EquilibriumKind.SEP) for d, kind in portrait.equilibria
        ]
        panel = Panel(
            f"phase portrait, {net.label.value} [rad/s]",
            np.degrees(portrait.delta),
            [("delta_dot", portrait.delta_dot)],
            xlabel="delta [deg]",
            markers=markers,
            zero_line=True,
        )
        write_svg(_sibling(args.out, f"{cfg.name}_portrait_{args.state}", ".svg"), [panel])
    return EXIT_OK


def cmd_sweep(cfg: ScenarioConfig, args) -> int:
    if cfg.fault_kind is not FaultKind.GROUND_FAULT:
        raise DomainError("a clearing sweep needs a ThreePhaseGroundFault scenario")
    if args.steps < 1:
        raise ScenarioError("--steps must be at least 1")
    durations = np.linspace(args.clear_from, args.clear_to, args.steps + 1)
    if durations[0] <= 0:
        raise ScenarioError("clearing durations must be positive")
    sc = cfg.scenario(never_clear=True)
    reports = sweep_clearing(
        sc, cfg.psc, sc.t_fault + durations, cfg.t_end, cfg.rel_tol, cfg.settle_tol,
        cfg.sample_dt, n_jobs=args.jobs,
    )
    rows = []
    for dur, rep in zip(durations, reports):
        angle = None if rep.clearing_angle is None else math.degrees(rep.clearing_angle)
        rows.append((float(dur), angle, rep.classification.value, rep.cycle_slips))
        shown = "      n/a" if angle is None else f"{angle:9.3f}"
        print(f"{dur:8.4f} s  {shown} deg  {rep.label}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SWEEP_HEADER)
            for dur, angle, cls, slips in rows:
                writer.writerow([repr(dur), repr(angle), cls, slips])
    if args.svg:
        panel = Panel(
            "clearing angle [deg] and cycle slips",
            durations,
            [
                ("clearing_angle_deg", np.array([r[1] for r in rows])),
                ("cycle_slips_x100", 100.0 * np.array([r[3] for r in rows])),
            ],
            xlabel="fault duration [s]",
        )
        write_svg(_sibling(args.out, f"{cfg.name}_sweep", ".svg"), [panel])
    return EXIT_OK


COMMANDS = {
    "equilibria": cmd_equilibria,
    "cca": cmd_cca,
    "cct": cmd_cct,
    "simulate": cmd_simulate,
    "sg-simulate": cmd_sg_simulate,
    "portrait": cmd_portrait,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psc-tsa",
        description="Transient stability of a power-synchronization-controlled converter.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True,
                       help="config path, or a bundled name: case1, case2, lab_case1, ...")
        p.add_argument("--out", type=Path, help="output path (JSON or CSV, per command)")
        p.add_argument("--svg", action="store_true", help="also write an SVG next to --out")
        return p

    common(sub.add_parser("equilibria", help="SEP/UEP and p_max of each network state"))
    common(sub.add_parser("cca", help="critical clearing angle"))
    p = common(sub.add_parser("cct", help="critical clearing time, analytic and numeric"))
    p.add_argument("--delta0-deg", type=float, help="initial angle (default: pre-fault SEP)")
    p.add_argument("--time-tol", type=float, default=1e-4)

    for name in ("simulate", "sg-simulate"):
        p = common(sub.add_parser(name, help=f"time-domain run ({name})"))
        g = p.add_mutually_exclusive_group()
        g.add_argument("--clear-at", type=float,
                       help="fault duration in s (clearing instant = t_fault + value)")
        g.add_argument("--never-clear", action="store_true")
        p.add_argument("--t-end", type=float)
        p.add_argument("--delta0-deg", type=float)
        p.add_argument("--report", type=Path, help="JSON report path (default: --out with .json)")

    p = common(sub.add_parser("portrait", help="phase portrait of one network state"))
    p.add_argument("--state", choices=("pre", "during", "post"), default="post")
    p.add_argument("--delta-min-deg", type=float, default=0.0)
    p.add_argument("--delta-max-deg", type=float, default=360.0)
    p.add_argument("--n", type=int, default=1001)

    p = common(sub.add_parser("sweep", help="classification over a grid of fault durations"))
    p.add_argument("--clear-from", type=float, required=True, help="first fault duration [s]")
    p.add_argument("--clear-to", type=float, required=True, help="last fault duration [s]")
    p.add_argument("--steps", type=int, required=True, help="number of grid intervals")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in exc.diagnostics:
            if line != str(exc):
                print(f"  {line}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (IntegrationError, InconclusiveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
