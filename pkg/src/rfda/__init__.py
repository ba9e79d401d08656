"""Random frequency diverse array (RFDA) simulation library.

Submodules
----------
model        array geometry, frequency-offset laws, steering vectors, echoes
beampattern  beampattern values and their analytic/empirical statistics
processing   observing matrices, matched filtering, sparse recovery
bounds       Fisher information, CRBs, coherence guarantees, ML estimation
experiments  seeded campaign runner behind the command-line interface
kernels      compiled/numpy evaluation kernels (selected at import)
"""

from .model import (
    SPEED_OF_LIGHT,
    ArrayConfig,
    ContinuousUniform,
    DiscreteUniform,
    EchoMatrix,
    FrequencyDistribution,
    FrequencyDraw,
    Gaussian,
    Target,
    TargetScene,
    dirichlet_kernel,
    element_positions,
    linear_draw,
    moment_generating,
    sample_frequencies,
    steering_vector,
    synthesize_echoes,
)
from .beampattern import (
    BeampatternMoments,
    EmpiricalStats,
    KsResult,
    NormalizedOffset,
    asymptotic_moments,
    beampattern_value,
    ks_normality_test,
    lfda_beampattern,
    marcum_q1,
    mean_beampattern,
    monte_carlo_stats,
    rho_trials,
    rho_value,
    sidelobe_ccdf,
    variance_beampattern,
)
from .processing import (
    DirectionRangeGrid,
    ObservingMatrix,
    RecoveryResult,
    build_observing_matrix,
    canonical_grid,
    canonical_sine_grid,
    detection_success,
    focuss_recover,
    gsp_recover,
    matched_filter,
    mfocuss_recover,
    noise_tolerance,
    sp_recover,
    zero_padding_2dfft,
)
from .bounds import (
    CoherenceReport,
    FimReport,
    MlEstimate,
    SingularityError,
    coherence_prob_bound,
    crb_uncorrelated,
    exact_recovery_sparsity,
    fim,
    ml_estimate,
    mutual_coherence,
    qcbp_error_bound,
    steering_jacobian,
)

__version__ = "0.1.0"
