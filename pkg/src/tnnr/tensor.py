"""Dense order-3 tensors and the t-product algebra.

Tensors are plain ``float64`` numpy arrays of shape ``(n1, n2, n3)``; the
frontal slice ``k`` is ``a[:, :, k]``. When flattened for storage the order
is ``i`` fastest, then ``j``, then ``k`` (Fortran order).
"""

import numpy as np

from ._validation import check_dims, check_same_shape, check_tensor
from .exceptions import ShapeError
from .spectral import dft_mode3, idft_mode3, mirror_slices


def inner_product(a, b):
    a = check_tensor(a, "a")
    b = check_tensor(b, "b")
    check_same_shape(a, b)
    return float(np.vdot(a, b))


def frobenius_norm(a):
    return float(np.linalg.norm(check_tensor(a).ravel()))


def frontal_slice(a, k):
    """Read-only view of the ``k``-th frontal slice (0-based)."""
    a = np.asarray(a)
    if not -a.shape[2] <= k < a.shape[2]:
        raise IndexError(f"slice index {k} out of range for n3={a.shape[2]}")
    view = a[:, :, k]
    view.flags.writeable = False
    return view


def unfold(a):
    """Stack the frontal slices vertically into an ``(n1*n3, n2)`` matrix."""
    a = check_tensor(a)
    n1, n2, n3 = a.shape
    return a.transpose(2, 0, 1).reshape(n3 * n1, n2)


def fold(m, dims):
    """Inverse of :func:`unfold`."""
    n1, n2, n3 = check_dims(dims)
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (n1 * n3, n2):
        raise ShapeError(f"cannot fold a {m.shape} matrix into dims {(n1, n2, n3)}")
    return m.reshape(n3, n1, n2).transpose(1, 2, 0).copy()


def bcirc(a):
    """Block circulant matrix of ``a``; block ``(p, q)`` is slice ``(p - q) mod n3``.

    Quadratic in ``n3`` and only meant as a reference for tests.
    """
    a = check_tensor(a)
    n1, n2, n3 = a.shape
    out = np.empty((n1 * n3, n2 * n3))
    for p in range(n3):
        for q in range(n3):
            out[p * n1:(p + 1) * n1, q * n2:(q + 1) * n2] = a[:, :, (p - q) % n3]
    return out


def t_product(a, b):
    """t-product ``a * b`` computed slice-wise in the Fourier domain."""
    a = check_tensor(a, "a")
    b = check_tensor(b, "b")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeError(f"t-product needs (n1, r, n3) * (r, n2, n3), got {a.shape} * {b.shape}")
    n3 = a.shape[2]
    h = n3 // 2 + 1
    af = dft_mode3(a).slices[:, :, :h]
    bf = dft_mode3(b).slices[:, :, :h]
    cf = np.moveaxis(np.moveaxis(af, 2, 0) @ np.moveaxis(bf, 2, 0), 0, 2)
    return idft_mode3(mirror_slices(cf, n3))


def conj_transpose(a):
    """Transpose every frontal slice and reverse the order of slices 2..n3."""
    a = check_tensor(a)
    order = [0] + list(range(a.shape[2] - 1, 0, -1))
    return a.transpose(1, 0, 2)[:, :, order].copy()


def identity_tensor(n, n3):
    if n < 1 or n3 < 1:
        raise ShapeError("identity tensor needs n >= 1 and n3 >= 1")
    out = np.zeros((n, n, n3))
    out[:, :, 0] = np.eye(n)
    return out


def f_diagonal(values):
    """Build an f-diagonal tensor from a ``(r, n3)`` array of tube entries."""
    values = np.asarray(values, dtype=np.float64)
    r, n3 = values.shape
    out = np.zeros((r, r, n3))
    idx = np.arange(r)
    out[idx, idx, :] = values
    return out
