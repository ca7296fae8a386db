"""Tensor SVD, multi-rank and the tubal nuclear norm."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_tensor
from .exceptions import NumericalError
from .spectral import dft_mode3, idft_mode3, mirror_slices
from .tensor import conj_transpose, t_product


@dataclass(frozen=True)
class TsvdFactors:
    """``a = u * s * v^*`` with orthogonal ``u``, ``v`` and f-diagonal ``s``.

    ``spectral_singular_values`` has shape ``(min(n1, n2), n3)``; column ``k``
    holds the descending singular values of the ``k``-th Fourier slice.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    spectral_singular_values: np.ndarray

    def reconstruct(self):
        return t_product(t_product(self.u, self.s), conj_transpose(self.v))


@dataclass(frozen=True)
class MultiRank:
    ranks: np.ndarray

    @property
    def tubal_rank(self):
        return int(self.ranks.max(initial=0))


def _is_real_slice(k, n3):
    return k == 0 or 2 * k == n3


def spectral_svd(a, full_matrices=False, compute_uv=True):
    """SVD of the unique Fourier slices of ``a``.

    Returns ``(fa, u, s, vh)`` where ``fa`` is the full ``(n1, n2, n3)``
    spectrum and ``u``, ``s``, ``vh`` are stacked over the unique slices
    ``k = 0 .. n3 // 2`` along the *first* axis. ``s`` is descending per slice.
    The DC slice (and the Nyquist slice for even ``n3``) is decomposed in real
    arithmetic so its factors stay real.
    """
    a = check_tensor(a)
    n3 = a.shape[2]
    fa = dft_mode3(a).slices
    half = np.moveaxis(fa[:, :, : n3 // 2 + 1], 2, 0)
    try:
        res = np.linalg.svd(half, full_matrices=full_matrices, compute_uv=compute_uv)
    except np.linalg.LinAlgError:
        # locate the offending slice for the error message
        for k in range(half.shape[0]):
            try:
                np.linalg.svd(half[k], compute_uv=False)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(f"SVD did not converge on Fourier slice {k}", k) from exc
        raise
    if not compute_uv:
        return fa, None, res, None
    u, s, vh = res
    for k in range(half.shape[0]):
        if _is_real_slice(k, n3):
            uk, sk, vhk = np.linalg.svd(half[k].real, full_matrices=full_matrices)
            u[k], s[k], vh[k] = uk, sk, vhk
    return fa, u, s, vh


def spectral_singular_values(a):
    """Descending singular values of every Fourier slice, shape ``(r, n3)``."""
    a = check_tensor(a)
    n3 = a.shape[2]
    _, _, s, _ = spectral_svd(a, compute_uv=False)
    return mirror_svals(s, n3)


def mirror_svals(s_half, n3):
    """Expand ``(n3 // 2 + 1, r)`` unique-slice singular values to ``(r, n3)``."""
    k = np.arange(n3)
    src = np.where(k <= n3 // 2, k, n3 - k)
    return np.ascontiguousarray(np.asarray(s_half)[src].T)


def t_svd(a):
    """Full t-SVD of ``a``."""
    a = check_tensor(a)
    n1, n2, n3 = a.shape
    r = min(n1, n2)
    _, u, s, vh = spectral_svd(a, full_matrices=True)
    sbar = np.zeros((u.shape[0], n1, n2))
    idx = np.arange(r)
    sbar[:, idx, idx] = s
    uf = mirror_slices(np.moveaxis(u, 0, 2), n3)
    vf = mirror_slices(np.moveaxis(np.conj(np.swapaxes(vh, 1, 2)), 0, 2), n3)
    sf = mirror_slices(np.moveaxis(sbar, 0, 2).astype(np.complex128), n3)
    return TsvdFactors(
        u=idft_mode3(uf),
        s=idft_mode3(sf),
        v=idft_mode3(vf),
        spectral_singular_values=mirror_svals(s, n3),
    )


def multi_rank(a, tol=1e-10):
    """Per-slice ranks; a value counts when it exceeds ``tol`` times the global largest."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    sv = spectral_singular_values(a)
    top = sv.max(initial=0.0)
    return MultiRank(np.sum(sv > tol * top, axis=0).astype(int))


def tubal_nuclear_norm(a):
    sv = spectral_singular_values(a)
    return float(sv.sum() / sv.shape[1])
