"""Terminated protograph LDPC convolutional ensembles: constructions,
iterative-decoding thresholds, asymptotic weight/trapping-set spectra, and
finite-length belief-propagation simulation."""

__version__ = "0.1.0"

from .protograph import (
    BaseMatrix,
    DegreeProfile,
    DesignRate,
    EnsembleSpec,
    ProtographError,
    degree_profile,
    design_rate,
    read_base_matrix_text,
    regular_components,
    regular_ensemble,
    tarja_components,
    tarja_ensemble,
    terminate,
    write_base_matrix_text,
)
from .enumerators import (
    GrowthRateResult,
    ZeroContour,
    check_node_exponent,
    finite_N_enumerator,
    min_distance_growth,
    spectral_shape,
    trapping_growth,
    zero_contour,
)
from .thresholds import (
    Awgn,
    Bec,
    BracketError,
    ThresholdResult,
    bec_de_converges,
    bec_threshold,
    biawgn_capacity,
    ebno_db_from_sigma,
    rca_converges,
    rca_threshold,
    reciprocal,
    shannon_ebno_db,
    sigma_from_ebno_db,
)
from .codes import (
    AlistError,
    BpDecoder,
    LiftedCode,
    LiftError,
    SimStats,
    awgn_llrs,
    bec_llrs,
    bp_decode,
    lift,
    read_alist,
    run_monte_carlo,
    write_alist,
)

__all__ = [
    "AlistError",
    "Awgn",
    "BaseMatrix",
    "Bec",
    "BpDecoder",
    "BracketError",
    "DegreeProfile",
    "DesignRate",
    "EnsembleSpec",
    "GrowthRateResult",
    "LiftError",
    "LiftedCode",
    "ProtographError",
    "SimStats",
    "ThresholdResult",
    "ZeroContour",
    "awgn_llrs",
    "bec_de_converges",
    "bec_llrs",
    "bec_threshold",
    "biawgn_capacity",
    "bp_decode",
    "check_node_exponent",
    "degree_profile",
    "design_rate",
    "ebno_db_from_sigma",
    "finite_N_enumerator",
    "lift",
    "min_distance_growth",
    "rca_converges",
    "rca_threshold",
    "read_alist",
    "read_base_matrix_text",
    "reciprocal",
    "regular_components",
    "regular_ensemble",
    "run_monte_carlo",
    "shannon_ebno_db",
    "sigma_from_ebno_db",
    "spectral_shape",
    "tarja_components",
    "tarja_ensemble",
    "terminate",
    "trapping_growth",
    "write_alist",
    "write_base_matrix_text",
    "zero_contour",
]
