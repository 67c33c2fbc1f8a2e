"""Singular angles and small-angle feedback stability certificates.

The toolkit measures the worst-case rotation an operator applies between
its input and output -- the singular angle -- for four kinds of objects:
discrete-time signals, complex matrices, stable LTI systems (per
frequency and as a supremum over frequencies), and sampled nonlinear
operators.  Feedback loops are certified stable when the loop's angle
budget stays strictly below pi.
"""

from .signal_core import (
    AngleRadians,
    DiscreteSignal,
    inner_product,
    l2_norm,
    load_signal_csv,
    save_signal_csv,
    signal_angle,
    truncate,
)
from .certificates import (
    BoundedAngle,
    HypothesisNotMet,
    Provenance,
    StabilityCertificate,
    Verdict,
    cascade_angle_bound,
    certificate_to_dict,
    cyclic_small_angle,
    feedback_angle_closure,
    incremental_small_angle,
    l2e_small_angle,
    multiplier_small_angle,
    nonlinear_small_angle,
    validate_certificate_dict,
)
from .matrix_angle import (
    AngleResult,
    AngleSolverOptions,
    NormalizedRangeSample,
    certified_angle_upper_bound,
    dense_angle_oracle,
    dense_angle_oracle_batch,
    eigen_angles,
    hpd_singular_angle_oracle,
    load_matrix_json,
    matrix_singular_angle,
    matrix_small_angle_check,
    normalized_numerical_range,
    save_matrix_json,
    vector_angle,
)
from .lti_systems import (
    FrequencyGrid,
    HinfAngleResult,
    LtiSystem,
    SectorBound,
    closed_loop,
    freq_response,
    frequencywise_angle,
    hinf_singular_angle,
    hinf_small_angle_check,
    is_stable,
    load_system_json,
    lti_small_angle_check,
    lure_cone_check,
    save_system_json,
    two_tone_bound,
    well_posedness_check,
)
from .multipliers import (
    MultiplierOperator,
    check_invertibility_on_grid,
    check_unitary_on_probes,
    generalized_signal_angle,
)
from .nonlinear_estimation import (
    AngleEstimate,
    Cascade,
    Feedback,
    FeedbackConvergenceError,
    LtiSurrogate,
    PassivityIndices,
    Scaled,
    StaticNonlinearity,
    SystemOperator,
    convex_vsp_angle_bound,
    estimate_generalized_angle,
    estimate_incremental_angle,
    estimate_l2_gain,
    estimate_l2e_angle,
    estimate_secant_gain,
    estimate_singular_angle,
    evaluate,
    ifofp_check,
    load_operator_json,
    make_probes,
    passivity_angle_check,
    secant_bound,
    secant_condition_check,
    sector_angle_bound,
    vsp_angle_bound,
)

__version__ = "0.1.0"
