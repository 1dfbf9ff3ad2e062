"""Dense complex linear-algebra kernel used by every other module."""
from kreinpert.linalg.core import (
    CONDITION_LIMIT,
    GeneralEig,
    HermitianEig,
    as_cmatrix,
    condition_number,
    default_tol,
    eigvals,
    eigvalsh,
    fro_norm,
    general_eig,
    hermitian_defect,
    hermitian_eig,
    is_hermitian,
    match_spectra,
    matrix_exp,
    psd_inv_sqrt,
    psd_sqrt,
    singular_values,
    spectral_norm,
)

__all__ = [
    "CONDITION_LIMIT",
    "GeneralEig",
    "HermitianEig",
    "as_cmatrix",
    "condition_number",
    "default_tol",
    "eigvals",
    "eigvalsh",
    "fro_norm",
    "general_eig",
    "hermitian_defect",
    "hermitian_eig",
    "is_hermitian",
    "match_spectra",
    "matrix_exp",
    "psd_inv_sqrt",
    "psd_sqrt",
    "singular_values",
    "spectral_norm",
]
