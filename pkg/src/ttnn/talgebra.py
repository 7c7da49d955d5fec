"""The t-product algebra over real third-order tensors.

Everything is computed slice-wise in the mode-3 Fourier domain. Only the
first ``n3 // 2 + 1`` spectral slices are factorized; the rest follow by
conjugate symmetry. The self-conjugate slices (0, and ``n3/2`` for even
``n3``) are factorized as real matrices so that their factors stay real and
the inverse transform has no imaginary residue.

The tensor nuclear norm used here is ``tr(S)`` for the t-SVD ``X = U*S*V^T``,
which equals the matrix nuclear norm of spectral slice 0, i.e. of the sum of
the frontal slices. It vanishes on nonzero tensors whose frontal slices sum to
zero, so strictly it is a seminorm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, SVDFailure
from .spectral import dft_mode3, half_indices, idft_mode3, is_self_conjugate, mirror

RANK_RTOL = 1e-12


def _spectral_product(fa, fb):
    # (n1, n2, n3) x (n2, n4, n3) -> (n1, n4, n3), one matmul per slice
    return np.einsum("ijk,jlk->ilk", fa, fb)


def t_product(a, b) -> np.ndarray:
    """Tensor-tensor product ``a * b``.

    ``a`` is ``n1 x n2 x n3`` and ``b`` is ``n2 x n4 x n3``. Equivalent to
    ``fold(bcirc(a) @ unfold(b))`` but computed as per-slice matrix products
    of the spectra.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 3 or b.ndim != 3:
        raise DimensionError("t_product needs third-order tensors")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    n3 = a.shape[2]
    fa = dft_mode3(a)
    fb = dft_mode3(b)
    fc = np.empty((a.shape[0], b.shape[1], n3), dtype=np.complex128)
    for k in half_indices(n3):
        if is_self_conjugate(k, n3):
            fc[:, :, k] = fa[:, :, k].real @ fb[:, :, k].real
        else:
            fc[:, :, k] = fa[:, :, k] @ fb[:, :, k]
    return idft_mode3(mirror(fc))


def conj_transpose(a) -> np.ndarray:
    """Transpose each frontal slice and reverse the order of slices 2..n3."""
    a = np.asarray(a)
    n3 = a.shape[2]
    order = (-np.arange(n3)) % n3
    return np.ascontiguousarray(a[:, :, order].transpose(1, 0, 2))


def identity_tensor(n: int, n3: int) -> np.ndarray:
    if n < 1 or n3 < 1:
        raise ValueError("identity tensor needs n >= 1 and n3 >= 1")
    out = np.zeros((n, n, n3))
    out[:, :, 0] = np.eye(n)
    return out


def is_orthogonal(q, tol: float = 1e-8) -> bool:
    q = np.asarray(q, dtype=np.float64)
    n, m, n3 = q.shape
    if n != m:
        raise DimensionError(f"orthogonality needs square slices, got {q.shape}")
    eye = identity_tensor(n, n3)
    qt = conj_transpose(q)
    return (
        np.linalg.norm(t_product(q, qt) - eye) <= tol
        and np.linalg.norm(t_product(qt, q) - eye) <= tol
    )


@dataclass(frozen=True)
class TSvdFactors:
    """t-SVD factors with ``a = U * S * V^T``.

    ``sigma[k]`` holds the descending singular values of spectral slice ``k``
    (length ``min(n1, n2)``); it is the diagonal of ``dft_mode3(S)[:, :, k]``.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    sigma: np.ndarray


def _svd(mat, k, full_matrices):
    try:
        return np.linalg.svd(mat, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise SVDFailure(k, exc) from exc


def t_svd(a) -> TSvdFactors:
    a = np.asarray(a, dtype=np.float64)
    n1, n2, n3 = a.shape
    p = min(n1, n2)
    fa = dft_mode3(a)
    fu = np.zeros((n1, n1, n3), dtype=np.complex128)
    fs = np.zeros((n1, n2, n3), dtype=np.complex128)
    fv = np.zeros((n2, n2, n3), dtype=np.complex128)
    sigma = np.zeros((n3, p))
    diag = np.arange(p)
    for k in half_indices(n3):
        mat = fa[:, :, k].real if is_self_conjugate(k, n3) else fa[:, :, k]
        u, s, vh = _svd(mat, k, True)
        fu[:, :, k] = u
        fv[:, :, k] = vh.conj().T
        fs[diag, diag, k] = s
        sigma[k] = s
        if not is_self_conjugate(k, n3):
            sigma[n3 - k] = s
    return TSvdFactors(
        U=idft_mode3(mirror(fu)),
        S=idft_mode3(mirror(fs)),
        V=idft_mode3(mirror(fv)),
        sigma=sigma,
    )


def reconstruct(f: TSvdFactors) -> np.ndarray:
    return t_product(t_product(f.U, f.S), conj_transpose(f.V))


def tubal_rank(f: TSvdFactors, tol: float = RANK_RTOL) -> int:
    """Largest per-slice count of spectral singular values above ``tol * sigma_max``."""
    top = float(f.sigma.max(initial=0.0))
    if top == 0.0:
        return 0
    return int(np.max(np.sum(f.sigma > tol * top, axis=1)))


def first_slice_singular_values(a) -> np.ndarray:
    """Singular values of spectral slice 0, the sum of the frontal slices."""
    a = np.asarray(a, dtype=np.float64)
    return np.linalg.svd(a.sum(axis=2), compute_uv=False)


def tensor_nuclear_norm(a) -> float:
    return float(first_slice_singular_values(a).sum())


def truncated_norm(a, r: int) -> float:
    """Sum of all but the ``r`` largest singular values of spectral slice 0."""
    a = np.asarray(a)
    p = min(a.shape[0], a.shape[1])
    if not 0 <= r <= p:
        raise ValueError(f"truncation r={r} outside 0..{p}")
    return float(first_slice_singular_values(a)[r:].sum())


def truncation_factors(f: TSvdFactors, r: int):
    """Return ``(A, B)`` with ``A = U[:, :r, :]^T`` and ``B = V[:, :r, :]^T``."""
    p = min(f.U.shape[0], f.V.shape[0])
    if not 1 <= r <= p:
        raise ValueError(f"truncation r={r} outside 1..{p}")
    return conj_transpose(f.U[:, :r, :]), conj_transpose(f.V[:, :r, :])


def svt_spectrum(fx, tau: float) -> np.ndarray:
    """Shrink the singular values of every spectral slice of ``fx`` by ``tau``."""
    n3 = fx.shape[2]
    out = np.empty_like(fx, dtype=np.complex128)
    for k in half_indices(n3):
        mat = fx[:, :, k].real if is_self_conjugate(k, n3) else fx[:, :, k]
        u, s, vh = _svd(mat, k, False)
        keep = int(np.count_nonzero(s > tau))
        out[:, :, k] = (u[:, :keep] * (s[:keep] - tau)) @ vh[:keep]
    return mirror(out)


def t_svt(x, tau: float) -> np.ndarray:
    """Tensor singular value thresholding with threshold ``tau`` on every spectral slice."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return idft_mode3(svt_spectrum(dft_mode3(x), tau))
