"""Recovery of signals observed through an unknown transform from a finite set."""

from .decoder import (
    Classification,
    DecodeResult,
    SensingInstance,
    decode,
    membership_residual,
    simulate_instance,
)
from .errors import (
    ConfigError,
    DimensionError,
    NotDiagonalizable,
    NotInvertible,
    NumericalFailure,
    ParseError,
    PreconditionFailed,
    RankDeficient,
)
from .identifiability import (
    Category,
    ConverseWitness,
    PairVerdict,
    SetVerdict,
    certify_set,
    classify_pair,
    converse_witness,
    determinant_probe,
    predicted_intersection,
)
from .linalg import (
    Tolerance,
    cokernel_basis,
    least_squares_solve,
    numerical_rank,
    random_gaussian_matrix,
    rref_with_pivots,
    subspace_intersection_dim,
)
from .spectral import (
    Diagonal,
    EigenStructure,
    ExplicitMatrix,
    Permutation,
    ScalarIdentity,
    apply_transform,
    compose_relative,
    cyclic_shift,
    dominant_eigenvalue,
    eigenstructure,
    permutation_cycles,
    permutation_spectrum,
)

__version__ = "0.1.0"
