"""Low-rank tensor completion with a truncated tensor nuclear norm.

Tensors are real ``numpy`` arrays of shape ``(n1, n2, n3)``; the algebra is
the t-product over mode-3 Fourier slices.
"""

from .errors import DimensionError, ImaginaryResidue, SolverDiagnostic, SVDFailure
from .metrics import RecoveryScore, score
from .solver import (
    ObservationMask,
    SolverConfig,
    SolverReport,
    admm_inner,
    best_r,
    sweep_r,
    ttnn_complete,
    tubal_nn_complete,
)
from .spectral import bdiag, dft_mode3, idft_mode3
from .talgebra import (
    TSvdFactors,
    conj_transpose,
    identity_tensor,
    is_orthogonal,
    t_product,
    t_svd,
    t_svt,
    tensor_nuclear_norm,
    truncated_norm,
    truncation_factors,
    tubal_rank,
)
from .tensor import bcirc, fold, frontal_slice, inner, norms, trace_tensor, unfold

__version__ = "0.1.0"
