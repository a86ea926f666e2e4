"""Kirkwood-Dirac quasiprobability distributions: computation, classicality tests and nonclassicality measures."""

from .core import (
    ConsistencyError,
    DensityOperator,
    DimensionMismatchError,
    EigenspacePartition,
    InvariantError,
    Ket,
    KDQError,
    Observable,
    OrthonormalBasis,
    PreconditionError,
    haar_random_basis,
    haar_random_ket,
    haar_random_unitary,
)
from .kd import (
    KDDistribution,
    PostselectionOutcome,
    coarse_grain,
    compute_extended_kd,
    compute_kd,
    condition_on,
    marginalize,
    one_sided_coarse_grain,
    reconstruct_state,
)
from .classicality import (
    Label,
    SupportCounts,
    Verdict,
    classify,
    commutation_report,
    corollary1_check,
    corollary2_check,
    support_counts,
    thm1_sufficient_nonclassical,
)
from .measures import NonclassicalityReport, check_max_conditions, nonclassicality_measures, thm2_bound
from .channels import convex_mix, depolarization_sweep, depolarize, negativity_threshold

__version__ = "0.1.0"
