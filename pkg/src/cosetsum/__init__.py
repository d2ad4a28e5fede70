"""Computation of modulo sums of distributed sources over a discrete
memoryless multiple access channel: rate calculators, executable
finite-blocklength codecs, and exact/statistical code-ensemble verification.
"""

from .errors import (
    ArgumentError,
    AxisError,
    BudgetError,
    ConstructionError,
    CosetSumError,
    DecodeFailure,
    DimensionError,
    DomainError,
    EncoderFailure,
    NotSupportedError,
    ParseError,
    ValidationError,
)
from .galois import FieldMatrix, FieldVector, PrimeField, field_op, mat_vec_mul, rank
from .km import KmCode, km_build, km_encode, km_sum_decode
from .model import (
    LayeredChannelTest,
    LayeredSourceTest,
    Mac,
    SourcePair,
    TestChannel,
    builtin_example,
    load_instance,
    preset_instance,
    save_instance,
)
from .ncc import (
    CodePair,
    EncoderConfig,
    NestedCosetCode,
    ncc_build,
    ncc_decode,
    ncc_encode,
    ncc_validate_rates,
    theoretical_error_bound,
)
from .probability import ConditionalPmf, JointPmf, is_jointly_typical, is_typical, typical_set_size
from .regions import (
    RateRegion3,
    RateSummary,
    alpha_rate,
    alpha_sup,
    beta_c,
    beta_s,
    computation_lambda,
    lcc_rate,
    rate_summary,
    regions_intersect,
    separation_lambda,
    separation_lambda_cap,
)

__version__ = "0.1.0"
