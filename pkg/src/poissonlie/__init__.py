"""Numerical verification of dynamical r-matrices and Poisson-Lie groupoids."""

from .liealg import (
    AlgebraElement,
    GroupElement,
    LieAlgebra,
    LieAlgebraError,
    RealifiedDouble,
    build_algebra,
)
from .matfun import ScalarFunction, analytic_of_ad, fun_of_matrix, frechet_of_matrix
from .rmatrix import (
    DynamicalRMatrix,
    ThreeTensor,
    TwoTensor,
    cdybe_residual,
    constant_r,
    default_rhs,
    f_hat,
)
from .poisson import PoissonChart, build_chart, jacobiator_residual, poisson_map_residual
from .compact import CartanCoords, IwasawaFactors, iwasawa_cartan

__all__ = [
    "AlgebraElement", "GroupElement", "LieAlgebra", "LieAlgebraError", "RealifiedDouble",
    "build_algebra", "ScalarFunction", "analytic_of_ad", "fun_of_matrix", "frechet_of_matrix",
    "DynamicalRMatrix", "ThreeTensor", "TwoTensor", "cdybe_residual", "constant_r",
    "default_rhs", "f_hat", "PoissonChart", "build_chart", "jacobiator_residual",
    "poisson_map_residual", "CartanCoords", "IwasawaFactors", "iwasawa_cartan",
]
