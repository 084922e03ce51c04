"""Phase-space transport for a quartic bistable mode coupled to a harmonic bath."""

__version__ = "0.1.0"

from .model import (
    SystemParams,
    PhaseState,
    Stability,
    BifurcationCase,
    EquilibriumPoint,
    DegenerateParameters,
    NoSuchEquilibrium,
    EmptyContour,
    potential_energy,
    total_energy,
    vector_field,
    jacobian,
    critical_alpha,
    eigenvalues_at_origin,
    eigenvalues_at_wells,
    find_equilibria,
    classify,
    bifurcation_grid,
    equipotential_contour,
)
from .integrate import (
    Scheme,
    Direction,
    IntegratorConfig,
    EventSpec,
    plane_event,
    Trajectory,
    NonFiniteState,
    step,
    integrate,
    integrate_with_stm,
    integrate_until_event,
)
from .upo import (
    PeriodicOrbit,
    ContinuationResult,
    WrongRegime,
    LostEnergy,
    NoConvergence,
    NotASaddle,
    initial_guess,
    differential_correction,
    find_brake_orbit,
    continue_in_energy,
    analytic_upo_uncoupled,
    mirror_orbit,
    resample,
)
from .poincare import (
    SectionSpec,
    PoincareResult,
    EmptyAdmissibleRegion,
    seed_ensemble,
    section_map,
)
from .surface import (
    Orientation,
    DividingSurface,
    EnergeticallyForbidden,
    sample_ds,
    analytic_ds_uncoupled,
)
from .transport import (
    ExitClass,
    GapTimeRecord,
    gap_times,
    gap_time_histogram,
    FluxMethod,
    FluxResult,
    flux_analytic_uncoupled,
    flux_quadrature,
    flux_curve,
    Branch,
    ManifoldTube,
    globalize_manifolds,
)
