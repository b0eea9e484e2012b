"""Event-driven time-domain simulation and stability classification.

Each constant-network interval is integrated separately with an embedded
Runge-Kutta pair (scipy's DOP853). The integrator is stopped exactly at the
fault and clearing instants and restarted with continuous state, since the
power angle is an integrator state and cannot jump.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .analytic import Equilibria, ab_coefficients, cca, find_equilibria, slip_period
from .dynamics import (
    PscParams,
    SgParams,
    electrical_power,
    grid_current,
    psc_rhs,
)
from .errors import (
    BracketError,
    DomainError,
    InconclusiveError,
    IntegrationError,
    NoEquilibriumError,
)
from .model import FaultScenario, NetworkState, StateLabel

logger = logging.getLogger(__name__)

REL_TOL = 1e-10
ABS_TOL = 1e-12
SAMPLE_DT = 1e-3
SETTLE_TOL = 1e-4
RATE_TOL = 1e-4
SETTLE_WINDOW = 0.2
MAX_HORIZON_GROWTH = 64
# cap on the step, in sample intervals; near equilibria DOP853 otherwise takes
# steps so long that its dense output drifts well above the step tolerance
MAX_STEP_SAMPLES = 100

CSV_HEADER = ("t", "delta_rad", "delta_dot_rad_s", "p_e_pu", "i_g_pu")


class EventKind(str, enum.Enum):
    FAULT_ON = "FaultOn"
    FAULT_CLEARED = "FaultCleared"
    CURRENT_LIMIT_HIT = "CurrentLimitHit"


class Classification(str, enum.Enum):
    CONVERGED_DIRECT = "ConvergedDirect"
    CONVERGED_AFTER_SLIP = "ConvergedAfterSlip"
    UNBOUNDED = "Unbounded"
    CURRENT_LIMITED = "CurrentLimited"
    # undamped swing-equation runs that stay inside the stable region
    OSCILLATING = "Oscillating"


@dataclass(frozen=True)
class Event:
    t: float
    kind: EventKind


@dataclass
class Trajectory:
    t: np.ndarray
    delta: np.ndarray
    delta_dot: np.ndarray
    p_e: np.ndarray
    i_g: np.ndarray
    events: list[Event]
    model: str
    scenario: FaultScenario

    def __len__(self):
        return len(self.t)

    def event_time(self, kind: EventKind) -> Optional[float]:
        for ev in self.events:
            if ev.kind is kind:
                return ev.t
        return None

    def value_at(self, t: float) -> float:
        """Power angle at ``t`` by cubic Hermite interpolation of the samples."""
        return float(self._spline()(t))

    def _spline(self) -> CubicHermiteSpline:
        # switching instants carry one sample each, delta is C0 there, and
        # the rate jump only costs accuracy inside a single sample interval
        return CubicHermiteSpline(self.t, self.delta, self.delta_dot)

    def rows(self):
        return zip(self.t, self.delta, self.delta_dot, self.p_e, self.i_g)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in self.rows():
                writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class SimReport:
    classification: Classification
    cycle_slips: int = 0
    final_delta: Optional[float] = None
    clearing_angle: Optional[float] = None
    peak_current: float = 0.0
    t_end: float = 0.0

    @property
    def label(self) -> str:
        if self.classification is Classification.CONVERGED_AFTER_SLIP:
            return f"ConvergedAfterSlip({self.cycle_slips})"
        return self.classification.value

    @property
    def converged(self) -> bool:
        return self.classification in (
            Classification.CONVERGED_DIRECT,
            Classification.CONVERGED_AFTER_SLIP,
        )

    def to_dict(self) -> dict:
        return {
            "classification": self.label,
            "cycle_slips": self.cycle_slips,
            "final_delta_rad": self.final_delta,
            "final_delta_deg": None if self.final_delta is None else math.degrees(self.final_delta),
            "clearing_angle_rad": self.clearing_angle,
            "clearing_angle_deg": (
                None if self.clearing_angle is None else math.degrees(self.clearing_angle)
            ),
            "peak_current_pu": self.peak_current,
            "t_end": self.t_end,
        }


def _guarded(scenario: FaultScenario, state: NetworkState) -> bool:
    # The current limit is armed while the disturbance network is in force.
    if scenario.during is None:
        return state.label is StateLabel.POST_FAULT
    return state.label is StateLabel.DURING_FAULT


def _sample_times(t0: float, t1: float, dt: float, last: bool) -> np.ndarray:
    k0 = math.floor(t0 / dt) + 1
    k1 = math.ceil(t1 / dt)
    grid = np.arange(k0, k1, dtype=float) * dt
    eps = 1e-9 * dt
    grid = grid[(grid > t0 + eps) & (grid < t1 - eps)]
    parts = [np.array([t0]), grid]
    if last:
        parts.append(np.array([t1]))
    return np.concatenate(parts)


@dataclass
class _Piece:
    t: np.ndarray
    y: np.ndarray
    state: NetworkState


def _integrate_pieces(
    scenario: FaultScenario,
    rhs_for: Callable[[NetworkState], Callable],
    y0: np.ndarray,
    t_end: float,
    rel_tol: float,
    abs_tol: float,
    sample_dt: float,
    guard_for: Optional[Callable[[NetworkState], Callable]] = None,
):
    segments = scenario.segments(t_end)
    pieces: list[_Piece] = []
    events: list[Event] = []
    y = np.asarray(y0, dtype=float)
    for i, (t0, t1, state) in enumerate(segments):
        if state.label is StateLabel.POST_FAULT and scenario.during is not None:
            events.append(Event(t0, EventKind.FAULT_CLEARED))
        elif state.label is not StateLabel.PRE_FAULT:
            events.append(Event(t0, EventKind.FAULT_ON))

        guard = guard_for(state) if (guard_for and _guarded(scenario, state)) else None
        if guard is not None and guard(t0, y) > 0:
            events.append(Event(t0, EventKind.CURRENT_LIMIT_HIT))
            pieces.append(_Piece(np.array([t0]), y[:, None], state))
            return pieces, events, True

        sol = solve_ivp(
            rhs_for(state),
            (t0, t1),
            y,
            method="DOP853",
            rtol=rel_tol,
            atol=abs_tol,
            dense_output=True,
            events=guard,
            max_step=MAX_STEP_SAMPLES * sample_dt,
        )
        if sol.status == -1:
            raise IntegrationError(
                f"integration failed in {state.label.value} interval: {sol.message}",
                t=float(sol.t[-1]),
                state=sol.y[:, -1].copy(),
            )
        last = i == len(segments) - 1
        if sol.status == 1:
            t_hit = float(sol.t_events[0][0])
            ts = _sample_times(t0, t_hit, sample_dt, last=True)
            pieces.append(_Piece(ts, sol.sol(ts), state))
            events.append(Event(t_hit, EventKind.CURRENT_LIMIT_HIT))
            return pieces, events, True
        ts = _sample_times(t0, t1, sample_dt, last=last)
        ys = sol.sol(ts)
        if not last:
            y = sol.y[:, -1].copy()
        else:
            ys[:, -1] = sol.y[:, -1]
        ys[:, 0] = sol.y[:, 0]
        pieces.append(_Piece(ts, ys, state))
    return pieces, events, False


def _resolve_delta0_psc(scenario: FaultScenario, p: PscParams) -> float:
    if scenario.delta0 is not None:
        return scenario.delta0
    eq = find_equilibria(p, scenario.pre)
    if not eq.exist:
        raise NoEquilibriumError("pre-fault network has no equilibrium; give delta0 explicitly")
    return eq.sep


def default_horizon(scenario: FaultScenario, p: PscParams) -> float:
    """Last switching instant plus ten ``x / k`` time constants."""
    t_last = scenario.t_clear if scenario.t_clear is not None else scenario.t_fault
    return t_last + 10.0 * scenario.final_state.x_transfer / p.k


def integrate(
    sc: FaultScenario,
    p: PscParams,
    t_end: Optional[float] = None,
    rel_tol: float = REL_TOL,
    abs_tol: float = ABS_TOL,
    sample_dt: float = SAMPLE_DT,
) -> Trajectory:
    """Integrate the power-synchronization loop across the fault sequence.

    The trajectory is truncated at the first crossing of ``p.i_limit`` by
    the grid current while the disturbance network is in force; beyond that
    point the converter would hand over to vector current control, which is
    not modelled.
    """
    if t_end is None:
        t_end = default_horizon(sc, p)
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end!r}")
    delta0 = _resolve_delta0_psc(sc, p)

    def rhs_for(state):
        return lambda t, y: psc_rhs(y, p, state)

    def guard_for(state):
        def g(t, y):
            return grid_current(y[0], p.v_mref, p.v_g, state.x_transfer) - p.i_limit

        g.terminal = True
        g.direction = 1.0
        return g

    pieces, events, _ = _integrate_pieces(
        sc, rhs_for, np.array([delta0]), t_end, rel_tol, abs_tol, sample_dt, guard_for
    )
    t = np.concatenate([pc.t for pc in pieces])
    delta = np.concatenate([pc.y[0] for pc in pieces])
    rate = np.concatenate([psc_rhs(pc.y[0], p, pc.state) for pc in pieces])
    p_e = np.concatenate(
        [electrical_power(pc.y[0], p.v_mref, p.v_g, pc.state.x_transfer) for pc in pieces]
    )
    i_g = np.concatenate(
        [grid_current(pc.y[0], p.v_mref, p.v_g, pc.state.x_transfer) for pc in pieces]
    )
    return Trajectory(t, delta, rate, p_e, i_g, events, "PSC", sc)


def sg_integrate(
    sc: FaultScenario,
    p: SgParams,
    v1: float = 1.0,
    v2: float = 1.0,
    t_end: float = 10.0,
    rel_tol: float = REL_TOL,
    abs_tol: float = ABS_TOL,
    sample_dt: float = SAMPLE_DT,
) -> Trajectory:
    """Swing-equation baseline with the same switching discipline.

    Starts from rest at the pre-fault equilibrium unless ``sc.delta0`` is
    given. No current limit applies to the machine.
    """
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end!r}")
    if sc.delta0 is not None:
        delta0 = sc.delta0
    else:
        ratio = p.p_m * sc.pre.x_transfer / (v1 * v2)
        if abs(ratio) > 1:
            raise NoEquilibriumError("pre-fault network has no equilibrium for this p_m")
        delta0 = math.asin(ratio)

    def rhs_for(state):
        coupling = v1 * v2 / state.x_transfer

        def f(t, y):
            return [y[1], (p.p_m - coupling * math.sin(y[0]) - p.d * y[1]) / p.j_eff]

        return f

    pieces, events, _ = _integrate_pieces(
        sc, rhs_for, np.array([delta0, 0.0]), t_end, rel_tol, abs_tol, sample_dt
    )
    t = np.concatenate([pc.t for pc in pieces])
    delta = np.concatenate([pc.y[0] for pc in pieces])
    rate = np.concatenate([pc.y[1] for pc in pieces])
    p_e = np.concatenate(
        [electrical_power(pc.y[0], v1, v2, pc.state.x_transfer) for pc in pieces]
    )
    i_g = np.concatenate([grid_current(pc.y[0], v1, v2, pc.state.x_transfer) for pc in pieces])
    return Trajectory(t, delta, rate, p_e, i_g, events, "SG", sc)


def check_current_limit(tr: Trajectory, i_limit: float, window=None) -> Optional[float]:
    """First sample time at which the grid current exceeds ``i_limit``.

    ``window`` restricts the search to ``[lo, hi)``, matching the convention
    that a switching instant belongs to the new network.
    """
    mask = tr.i_g > i_limit
    if window is not None:
        lo, hi = window
        mask &= (tr.t >= lo) & (tr.t < hi)
    idx = np.flatnonzero(mask)
    return float(tr.t[idx[0]]) if idx.size else None


def _last_switch(tr: Trajectory) -> float:
    times = [ev.t for ev in tr.events if ev.kind is not EventKind.CURRENT_LIMIT_HIT]
    return max(times) if times else float(tr.t[0])


def _clearing_angle(tr: Trajectory) -> Optional[float]:
    t_clear = tr.event_time(EventKind.FAULT_CLEARED)
    if t_clear is None:
        return None
    idx = int(np.searchsorted(tr.t, t_clear))
    return float(tr.delta[idx])


def classify(
    tr: Trajectory,
    post_eq: Equilibria,
    settle_tol: float = SETTLE_TOL,
    horizon: Optional[float] = None,
    rate_tol: float = RATE_TOL,
    settle_window: float = SETTLE_WINDOW,
) -> SimReport:
    """Classify a trajectory against the equilibria of its final network.

    Convergence requires angle and rate within tolerance of ``sep + 2 pi n``
    over the last ``settle_window`` seconds; ``n`` counts cycle slips from
    the initial branch. Without equilibria, an excursion beyond two full
    turns since the fault marks the run unbounded.
    """
    if horizon is not None and tr.t[-1] < horizon - 1e-12 and not tr.event_time(
        EventKind.CURRENT_LIMIT_HIT
    ):
        raise InconclusiveError("trajectory stops before the requested horizon",
                                {"t_last": float(tr.t[-1]), "horizon": horizon})
    peak = float(np.max(tr.i_g))
    common = dict(clearing_angle=_clearing_angle(tr), peak_current=peak, t_end=float(tr.t[-1]))
    if tr.event_time(EventKind.CURRENT_LIMIT_HIT) is not None:
        return SimReport(Classification.CURRENT_LIMITED, **common)

    t_switch = _last_switch(tr)
    delta_end = float(tr.delta[-1])
    if post_eq.exist:
        sep = post_eq.sep
        two_pi = 2.0 * math.pi
        n_end = round((delta_end - sep) / two_pi)
        n = n_end - round((float(tr.delta[0]) - sep) / two_pi)
        target = sep + two_pi * n_end
        window = tr.t >= tr.t[-1] - settle_window
        long_enough = tr.t[-1] - t_switch >= settle_window
        settled = (
            long_enough
            and np.all(np.abs(tr.delta[window] - target) < settle_tol)
            and np.all(np.abs(tr.delta_dot[window]) < rate_tol)
        )
        if settled:
            cls = (
                Classification.CONVERGED_DIRECT if n == 0 else Classification.CONVERGED_AFTER_SLIP
            )
            return SimReport(cls, abs(n), final_delta=delta_end, **common)
        raise InconclusiveError(
            "trajectory has not settled at the horizon",
            {
                "t_end": float(tr.t[-1]),
                "delta_end": delta_end,
                "delta_dot_end": float(tr.delta_dot[-1]),
                "target": target,
            },
        )

    t_fault = tr.event_time(EventKind.FAULT_ON)
    ref = tr.value_at(t_fault) if t_fault is not None else float(tr.delta[0])
    tail = tr.t >= t_switch
    advancing = np.all(np.abs(tr.delta_dot[tail]) > rate_tol)
    if abs(delta_end - ref) > 4.0 * math.pi and advancing:
        return SimReport(Classification.UNBOUNDED, **common)
    raise InconclusiveError(
        "no equilibria in the final network but the excursion is still below two turns",
        {"t_end": float(tr.t[-1]), "excursion": abs(delta_end - ref)},
    )


def simulate(
    sc: FaultScenario,
    p: PscParams,
    t_end: Optional[float] = None,
    rel_tol: float = REL_TOL,
    settle_tol: float = SETTLE_TOL,
    sample_dt: float = SAMPLE_DT,
) -> tuple[Trajectory, SimReport]:
    """Integrate and classify.

    With ``t_end`` omitted the horizon starts at :func:`default_horizon`
    and the post-switching span is doubled until the verdict is conclusive.
    """
    post_eq = find_equilibria(p, sc.final_state)
    if t_end is not None:
        tr = integrate(sc, p, t_end, rel_tol, sample_dt=sample_dt)
        return tr, classify(tr, post_eq, settle_tol)

    start = default_horizon(sc, p)
    t_last = sc.t_clear if sc.t_clear is not None else sc.t_fault
    span = start - t_last
    for _ in range(int(math.log2(MAX_HORIZON_GROWTH)) + 1):
        tr = integrate(sc, p, t_last + span, rel_tol, sample_dt=sample_dt)
        try:
            return tr, classify(tr, post_eq, settle_tol)
        except InconclusiveError as exc:
            last_exc = exc
            logger.debug("inconclusive at t_end=%.4g, extending: %s", t_last + span, exc)
            span *= 2.0
    raise last_exc


def classify_sg(
    tr: Trajectory,
    post_eq: Equilibria,
    settle_tol: float = SETTLE_TOL,
    rate_tol: float = RATE_TOL,
    settle_window: float = SETTLE_WINDOW,
) -> SimReport:
    """Verdict for a swing-equation run.

    Passing the final network's unstable equilibrium means loss of
    synchronism. A run that stays below it is converged if settled and
    oscillating otherwise.
    """
    peak = float(np.max(tr.i_g))
    common = dict(clearing_angle=_clearing_angle(tr), peak_current=peak, t_end=float(tr.t[-1]))
    t_switch = _last_switch(tr)
    tail = tr.t >= t_switch
    if not post_eq.exist:
        t_fault = tr.event_time(EventKind.FAULT_ON) or float(tr.t[0])
        ref = tr.value_at(t_fault)
        if abs(float(tr.delta[-1]) - ref) > 4.0 * math.pi:
            return SimReport(Classification.UNBOUNDED, **common)
        raise InconclusiveError("machine still accelerating below two turns",
                                {"t_end": float(tr.t[-1])})
    branch = round((float(tr.delta[0]) - post_eq.sep) / (2.0 * math.pi)) * 2.0 * math.pi
    uep = post_eq.uep + branch
    if np.any(tr.delta[tail] > uep) or np.any(tr.delta[tail] < uep - 2.0 * math.pi):
        return SimReport(Classification.UNBOUNDED, **common)
    sep = post_eq.sep + branch
    window = tr.t >= tr.t[-1] - settle_window
    if (
        tr.t[-1] - t_switch >= settle_window
        and np.all(np.abs(tr.delta[window] - sep) < settle_tol)
        and np.all(np.abs(tr.delta_dot[window]) < rate_tol)
    ):
        return SimReport(Classification.CONVERGED_DIRECT, final_delta=float(tr.delta[-1]), **common)
    return SimReport(Classification.OSCILLATING, final_delta=float(tr.delta[-1]), **common)


def numeric_cct(
    sc: FaultScenario,
    p: PscParams,
    time_tol: float = 1e-4,
    rel_tol: float = REL_TOL,
) -> float:
    """Critical clearing time (fault duration) by bisection on simulations.

    A duration is within the CCT iff the simulated angle at clearing does not
    exceed the critical clearing angle of the post-fault network.
    """
    if sc.during is None:
        raise BracketError("numeric CCT needs a during-fault network")
    a, b = ab_coefficients(p, sc.during)
    if not abs(a) > abs(b):
        raise BracketError("during-fault network has equilibria; no finite CCT exists")
    angle = cca(p, sc.post)
    delta0 = _resolve_delta0_psc(sc, p)
    if delta0 == angle:
        return 0.0

    def angle_after(duration: float) -> float:
        t_clear = sc.t_fault + duration
        tr = integrate(replace(sc, t_clear=t_clear), p, t_end=t_clear, rel_tol=rel_tol)
        if tr.event_time(EventKind.CURRENT_LIMIT_HIT) is not None:
            raise DomainError("current limit reached during the fault; CCT undefined")
        return float(tr.delta[-1])

    if delta0 > angle:
        raise BracketError("initial angle already beyond the critical clearing angle")
    lo, hi = 0.0, slip_period(a, b)
    if angle_after(hi) <= angle:
        raise BracketError("angle did not reach the critical clearing angle within one slip")
    while hi - lo > time_tol:
        mid = 0.5 * (lo + hi)
        if angle_after(mid) <= angle:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _run_one(args):
    sc, p, t_end, rel_tol, settle_tol, sample_dt = args
    return simulate(sc, p, t_end, rel_tol, settle_tol, sample_dt)[1]


def sweep_clearing(
    sc: FaultScenario,
    p: PscParams,
    clear_times: Sequence[float],
    t_end: Optional[float] = None,
    rel_tol: float = REL_TOL,
    settle_tol: float = SETTLE_TOL,
    sample_dt: float = SAMPLE_DT,
    n_jobs: int = 1,
) -> list[SimReport]:
    """One report per absolute clearing instant, in input order."""
    if len(clear_times) == 0:
        raise DomainError("clear_times must not be empty")
    if sc.during is None:
        raise DomainError("clearing sweep needs a during-fault network")
    jobs = [
        (replace(sc, t_clear=float(tc)), p, t_end, rel_tol, settle_tol, sample_dt)
        for tc in clear_times
    ]
    if n_jobs == 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_run_one, jobs))


def angle_crossings(tr: Trajectory, origin: float, step: float = 2.0 * math.pi) -> np.ndarray:
    """Times at which the angle passes ``origin + m * step`` (m = 1, 2, ...).

    Located on the cubic Hermite interpolant of the samples.
    """
    spline = tr._spline()
    times = []
    m = 1
    while True:
        level = origin + m * step
        above = np.flatnonzero(tr.delta >= level)
        if above.size == 0:
            break
        j = int(above[0])
        if j == 0:
            times.append(float(tr.t[0]))
        else:
            times.append(
                brentq(lambda t: float(spline(t)) - level, tr.t[j - 1], tr.t[j], xtol=1e-14)
            )
        m += 1
    return np.array(times)
