"""Mode-3 discrete Fourier transform of third-order tensors.

The forward transform is unnormalized, ``X̄[i, j, k] = sum_t X[i, j, t] w**(t*k)``
with ``w = exp(-2j*pi/n3)``, so spectral slice 0 is the plain sum of the
frontal slices. The inverse carries the ``1/n3`` factor. Any ``n3`` is
accepted; numpy's pocketfft handles non-power-of-two lengths.

A spectrum of a real tensor is conjugate symmetric,
``X̄[:, :, k] == conj(X̄[:, :, n3 - k])``. Per-slice work only needs the
first ``n3 // 2 + 1`` slices (:func:`half_indices`); the remaining ones are
filled in by :func:`mirror`.
"""

from __future__ import annotations

import numpy as np

from .errors import ImaginaryResidue

RESIDUE_RTOL = 1e-8


def dft_mode3(t) -> np.ndarray:
    """Forward DFT of every tube ``t[i, j, :]``; returns a complex array."""
    return np.fft.fft(np.asarray(t, dtype=np.float64), axis=2)


def imaginary_tolerance(s) -> float:
    return RESIDUE_RTOL * max(1.0, float(np.linalg.norm(s)))


def idft_mode3(s) -> np.ndarray:
    """Inverse DFT along mode 3, returning the real part.

    Raises :class:`ImaginaryResidue` when the discarded imaginary part is
    larger than ``1e-8 * max(1, ||s||_F)``.
    """
    s = np.asarray(s)
    out = np.fft.ifft(s, axis=2)
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    tol = imaginary_tolerance(s)
    if residue > tol:
        raise ImaginaryResidue(residue, tol)
    return np.ascontiguousarray(out.real)


def half_indices(n3: int) -> range:
    """Spectral slices that determine the rest by conjugate symmetry."""
    return range(n3 // 2 + 1)


def is_self_conjugate(k: int, n3: int) -> bool:
    """Slices 0 and (for even ``n3``) ``n3/2`` are real for real input."""
    return k == 0 or 2 * k == n3


def mirror(s) -> np.ndarray:
    """Overwrite the upper half of ``s`` with conjugates of the lower half, in place."""
    n3 = s.shape[2]
    for k in range(1, (n3 + 1) // 2):
        s[:, :, n3 - k] = np.conj(s[:, :, k])
    return s


def is_conjugate_symmetric(s, tol: float | None = None) -> bool:
    s = np.asarray(s)
    if tol is None:
        tol = imaginary_tolerance(s)
    n3 = s.shape[2]
    mirrored = np.conj(s[:, :, (-np.arange(n3)) % n3])
    return bool(np.max(np.abs(s - mirrored), initial=0.0) <= tol)


def bdiag(s) -> np.ndarray:
    """Block-diagonal ``(n1*n3) x (n2*n3)`` matrix with the spectral slices in order."""
    s = np.asarray(s)
    n1, n2, n3 = s.shape
    out = np.zeros((n1 * n3, n2 * n3), dtype=np.result_type(s, np.complex128))
    for k in range(n3):
        out[k * n1:(k + 1) * n1, k * n2:(k + 1) * n2] = s[:, :, k]
    return out


def dft_matrix(n: int) -> np.ndarray:
    """The ``n x n`` Fourier matrix ``F[p, q] = w**(p*q)``; used by test oracles."""
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n)
