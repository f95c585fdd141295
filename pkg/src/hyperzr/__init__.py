"""Matrix Fourier analysis over Z_r^n with hidden-hypermatching, streaming and LDC tooling."""

from .zr import (
    Hypermatching,
    ZrString,
    apply_matching,
    count_hypermatchings,
    enumerate_hypermatchings,
    hamming_weight,
    sample_hypermatching,
    zr_dot,
)
from .matfourier import (
    FourierTable,
    MatrixFunction,
    fourier_transform,
    inverse_fourier,
    random_density_matrix,
    schatten_norm,
)
from .inequalities import (
    InequalityReport,
    block_embedding,
    check_bcl,
    check_density_fourier_bound,
    check_hypercontractivity,
    check_kkl,
    check_orthogonal_convexity,
    check_weak_bcl,
    zeta,
)

__version__ = "0.1.0"

__all__ = [
    "FourierTable",
    "Hypermatching",
    "InequalityReport",
    "MatrixFunction",
    "ZrString",
    "apply_matching",
    "block_embedding",
    "check_bcl",
    "check_density_fourier_bound",
    "check_hypercontractivity",
    "check_kkl",
    "check_orthogonal_convexity",
    "check_weak_bcl",
    "count_hypermatchings",
    "enumerate_hypermatchings",
    "fourier_transform",
    "hamming_weight",
    "inverse_fourier",
    "random_density_matrix",
    "sample_hypermatching",
    "schatten_norm",
    "zeta",
    "zr_dot",
]
