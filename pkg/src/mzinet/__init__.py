"""mzinet: sensitivity toolkit for interferometer networks sharing one
split squeezed-vacuum resource.

Three independent routes to every sensitivity number: a Gaussian phase-space
engine (network), closed-form laws (laws) and a truncated Fock-space oracle
(fock), plus resource optimization (optimize), synthetic homodyne traces
(tracelab) and a scenario/CSV front end (scenarios, cli).
"""

from .errors import (
    AllocationError,
    AnalysisError,
    ConfigError,
    DarkResponseError,
    InfeasibleSplitError,
    RegularizationError,
    ResourceLimitError,
    ScenarioParseError,
    TruncationError,
    VerificationError,
)
from .gaussian import (
    GaussianState,
    apply_beam_splitter,
    apply_displacement,
    apply_loss,
    apply_mzi,
    apply_squeezer,
    homodyne_moments,
    vacuum_state,
)
from .laws import (
    LossModel,
    SensitivityReport,
    SqueezedResource,
    db_below_sql,
    gain,
    min_variance_over_r,
    ns_to_r,
    optimized_variance,
    qcrb,
    r_to_ns,
    regime_limits,
    scaling_with_d,
    variance_vs_ns,
)
from .network import (
    MomentData,
    NetworkConfig,
    build_network,
    closed_form_variance,
    noise_matrix,
    qc_cascade,
    response_matrix,
    sensitivity_numeric,
    sensitivity_separable,
    weight_pattern,
)
from .optimize import (
    Allocation,
    configure_optimal,
    golden_min,
    optimal_allocation,
    optimize_squeezing,
    scan,
    separable_min_variance,
)
from .fock import (
    FockStateVector,
    mode_moments,
    multinomial_split,
    oracle_sensitivity,
    squeezed_vacuum_fock,
)
from .tracelab import (
    TraceParams,
    TraceSet,
    band_power,
    joint_noise_analysis,
    read_trace,
    synthesize,
    write_trace,
)
from .scenarios import (
    Scenario,
    load_scenario,
    photon_flux,
    reproduce,
    run_scenario,
    verify,
)

__version__ = "0.1.0"
