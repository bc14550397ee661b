"""Local instability versus chaos: unstable-interval products along Hamiltonian orbits."""

__version__ = "0.1.0"

from .integrate import (
    DeviationRecord,
    DeviationState,
    EigenSeries,
    TrajectoryRecord,
    propagate_coupled,
    propagate_deviation,
    propagate_phase,
)
from .models import (
    DomainError,
    ModelKind,
    ModelSpec,
    PhaseState,
    ThreeBodyParams,
    ToyParams,
    evaluate_potential,
    toy_matrix,
    total_energy,
)
from .sections import ApsisEvent, SectionPoint, apsis_events, poincare_section
from .stability import (
    Indicator,
    InvalidSample,
    LocalSpectrum,
    StabilityMatrix,
    StabilityVerdict,
    UnstableInterval,
    detect_unstable_intervals,
    local_spectrum,
    stability_matrix,
    uncertainty_verdict,
)
from .experiments import ExperimentConfig, ExperimentRecord, run_experiment  # noqa: E402
from .report import emit_report  # noqa: E402
