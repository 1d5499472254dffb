"""Exact verification lab for non-malleable coding over binary
arbitrarily varying channels.

Everything on a verification path runs in exact rational arithmetic;
floating point appears only inside Monte-Carlo estimators.
"""

__version__ = "0.1.0"

from .channels import (
    BinaryChannel,
    ElementaryDecomposition,
    ExtendedChannel,
    StateSequence,
    channel_from_json,
    decompose,
    decompose_extended,
    elementary_channel,
    feasible_interval,
)
from .composed import (
    ComposedScheme,
    InducedFunction,
    SpecialStateSpec,
    certify_induced_family,
    composed_decode,
    composed_encode,
    composed_tamper_distribution,
    induced_family,
    induced_tamper,
    recovery_probability,
    verify_composed,
)
from .distributions import (
    BOT,
    SAME_STAR,
    FiniteDistribution,
    all_bitstrings,
    apply_copy,
    format_rational,
    mix,
    parse_rational,
    statistical_distance,
)
from .gf2 import (
    GF2Matrix,
    ReconstructionSet,
    SingularReport,
    delta_exact,
    delta_monte_carlo,
    ecc_decode,
    ecc_encode,
    gf2_invert,
    hamming_7_4,
    min_distance,
    random_full_rank,
    single_parity,
)
from .tampering import (
    AffineFunction,
    BitAction,
    BITFunction,
    NonAffineReport,
    bit_to_affine,
    compose_affine,
    enumerate_bit_functions,
    fit_affine,
)
from .verifier import (
    BOT_MAP,
    FamilyCertificate,
    NMReport,
    SearchResult,
    StochasticCode,
    TransferReport,
    certify_bit_family,
    certify_family,
    ds_mixture,
    optimal_simulator,
    search_nm_code,
    tamper_distribution_channel,
    tamper_distribution_channel_mixture,
    tamper_distribution_fn,
    tamper_map,
    verify_transfer,
)
