from .params import DirectionFrame, ExampleParams, KernelBox, OutOfContract
from .bounds import FrequencyClaimReport, FrequencyClaimViolation, verify_frequency_claim
from .kernels import (
    PLATE_CONSTANT,
    QuadratureError,
    ReachSampling,
    convolve_on_reach,
    f_nu_eval,
    h_nu,
    kappa_nu,
    kernel_K_nu,
    mirror_sheet_bound,
    plate_minimum,
    reach_points,
)
from .lower_bound import LowerBoundLedger, ScalingResult, TruncationError, lower_bound_estimate, scaling_study
from .crossval import KhinchineCheck, khinchine_crossval
