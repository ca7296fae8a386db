"""Mode-3 DFT and the conjugate-symmetry bookkeeping of real tensors.

Convention: unnormalized forward transform, ``1/n3``-normalized inverse
(the ``fft``/``ifft`` pair). Every frontal slice of the transform of a real
tensor satisfies ``slice[0]`` real and ``conj(slice[k]) == slice[n3 - k]``,
so only the slices returned by :func:`unique_slice_range` carry information.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag as _block_diag

from ._validation import check_tensor
from .exceptions import SpectralConsistencyError

logger = logging.getLogger(__name__)

#: Relative imaginary residue silently dropped by the inverse transform.
IMAG_DROP_TOL = 1e-10
#: Relative residue above which the inverse transform raises.
IMAG_ERROR_TOL = 1e-8


@dataclass(frozen=True)
class SpectralTensor:
    """Frontal slices of the mode-3 DFT, stored as an ``(n1, n2, n3)`` complex array.

    ``origin_real`` records whether the slices came from a real tensor, in
    which case the inverse transform enforces conjugate symmetry.
    """

    slices: np.ndarray
    origin_real: bool = True

    @property
    def dims(self):
        return self.slices.shape

    @property
    def n3(self):
        return self.slices.shape[2]

    def slice(self, k):
        return self.slices[:, :, k]


def unique_slice_range(n3):
    """Indices (0-based) of the slices that determine all the others.

    Slice ``k`` for ``k`` beyond this range equals ``conj(slice[n3 - k])``.

    >>> list(unique_slice_range(4)), list(unique_slice_range(5))
    ([0, 1, 2], [0, 1, 2])
    """
    n3 = int(n3)
    if n3 < 1:
        raise ValueError("n3 must be >= 1")
    return range(n3 // 2 + 1)


def mirror_slices(half, n3):
    """Complete a stack of unique slices ``(n1, n2, n3 // 2 + 1)`` by conjugation."""
    n_unique = n3 // 2 + 1
    if half.shape[2] != n_unique:
        raise ValueError(f"expected {n_unique} unique slices, got {half.shape[2]}")
    full = np.empty(half.shape[:2] + (n3,), dtype=np.complex128)
    full[:, :, :n_unique] = half
    if n3 > 1:
        k = np.arange(n_unique, n3)
        full[:, :, k] = np.conj(half[:, :, n3 - k])
    return full


def symmetry_residual(slices):
    """Largest deviation from the conjugate symmetry of a real signal's DFT."""
    n3 = slices.shape[2]
    res = float(np.max(np.abs(slices[:, :, 0].imag), initial=0.0))
    for k in range(1, n3):
        res = max(res, float(np.max(np.abs(np.conj(slices[:, :, k]) - slices[:, :, n3 - k]))))
    return res


def dft_mode3(a):
    """Unnormalized DFT of every tube ``a[i, j, :]``."""
    a = check_tensor(a)
    return SpectralTensor(np.fft.fft(a, axis=2), origin_real=True)


def idft_mode3(s):
    """Inverse of :func:`dft_mode3`, returning a real tensor.

    Imaginary residue relative to the output scale is dropped below
    ``IMAG_DROP_TOL``, dropped with a warning up to ``IMAG_ERROR_TOL`` and
    raises :class:`SpectralConsistencyError` beyond that.
    """
    if isinstance(s, SpectralTensor):
        slices, origin_real = s.slices, s.origin_real
    else:
        slices, origin_real = np.asarray(s), True
    out = np.fft.ifft(slices, axis=2)
    if origin_real:
        scale = max(float(np.max(np.abs(out.real), initial=0.0)), np.finfo(float).tiny)
        residue = float(np.max(np.abs(out.imag), initial=0.0)) / scale
        if residue > IMAG_ERROR_TOL:
            raise SpectralConsistencyError(
                f"imaginary residue {residue:.3e} after inverse DFT; "
                "conjugate symmetry was broken upstream"
            )
        if residue > IMAG_DROP_TOL:
            logger.warning("dropping imaginary residue %.3e after inverse DFT", residue)
    return np.ascontiguousarray(out.real)


def block_diag(s):
    """Block-diagonal matrix of the spectral slices, ``(n1*n3, n2*n3)``."""
    slices = s.slices if isinstance(s, SpectralTensor) else np.asarray(s)
    return _block_diag(*[slices[:, :, k] for k in range(slices.shape[2])])
