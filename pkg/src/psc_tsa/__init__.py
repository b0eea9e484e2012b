"""Transient stability of a grid-connected converter under power synchronization control."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    ClosedFormCoeffs,
    Equilibria,
    EquilibriumKind,
    PhasePortrait,
    cca,
    cct,
    closed_form_time,
    find_equilibria,
    power_equilibria,
    sample_portrait,
    slip_period,
)
from .config import FaultKind, ScenarioConfig, load_config, parse_config  # noqa: E402
from .dynamics import (  # noqa: E402
    AngleState,
    PscParams,
    SgParams,
    ab_coefficients,
    electrical_power,
    grid_current,
    psc_rhs,
    sg_energy,
    sg_rhs,
)
from .errors import (  # noqa: E402
    BracketError,
    DomainError,
    InconclusiveError,
    IntegrationError,
    NoEquilibriumError,
    PscTsaError,
    ScenarioError,
    ValidityDomainError,
)
from .model import (  # noqa: E402
    FaultScenario,
    NetworkElements,
    NetworkState,
    PerUnitBase,
    QuantityKind,
    StateLabel,
    from_per_unit,
    reduce_during_fault,
    reduce_post,
    reduce_pre,
    to_per_unit,
)
from .simulate import (  # noqa: E402
    Classification,
    Event,
    EventKind,
    SimReport,
    Trajectory,
    angle_crossings,
    check_current_limit,
    classify,
    classify_sg,
    integrate,
    numeric_cct,
    sg_integrate,
    simulate,
    sweep_clearing,
)
