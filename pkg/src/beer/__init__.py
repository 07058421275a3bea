"""Recover on-die ECC functions from miscorrection profiles, and profile raw errors with them."""

from .beep import (
    AmbiguousObservationError,
    BeepChip,
    BeepReport,
    craft_pattern,
    locate_errors,
    run_beep,
)
from .code import (
    DecodeResult,
    EccCode,
    FormatError,
    InvalidCodeError,
    canonicalize,
    code_from_dict,
    codes_equivalent,
    construct_code,
    decode,
    encode,
    hamming_7_4,
    parity_bits_for,
    sample_random_code,
)
from .experiments import (
    BeepCase,
    SweepConfig,
    SweepResult,
    compare_distributions,
    run_beep_sweep,
    run_fig1_distribution,
    run_noise_study,
    run_uniqueness_sweep,
)
from .gf2 import (
    BitMatrix,
    BitVector,
    DimensionError,
    SingularMatrixError,
    mat_vec_mul,
    rank,
    solve_linear,
)
from .profile import (
    MiscorrectionProfile,
    ObservedProfile,
    ProfileError,
    TestPattern,
    enumerate_test_patterns,
    exhaustive_profile,
    ingest_dump,
    monte_carlo_profile,
    threshold_filter,
)
from .retention import (
    CellPolarity,
    ChargeState,
    RetentionErrorModel,
    TransientNoiseModel,
    charge_states,
    inject_retention_errors,
    simulate_read,
)
from .solver import SolveOutcome, Uniqueness, UniquenessResult, check_uniqueness, solve

__version__ = "0.1.0"
