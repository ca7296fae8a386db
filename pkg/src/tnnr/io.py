"""Binary tensor and mask files.

``TNS3`` files: magic ``b"TNS3"``, three little-endian ``uint32`` dims
``n1, n2, n3``, then ``n1*n2*n3`` little-endian ``float64`` values with ``i``
varying fastest, then ``j``, then ``k``.

``MSK3`` files: magic ``b"MSK3"``, the same header, then one byte per entry
(0 missing, 1 observed) in the same order.
"""

import struct

import numpy as np

from ._validation import check_tensor
from .completion import ObservationMask

TENSOR_MAGIC = b"TNS3"
MASK_MAGIC = b"MSK3"
_HEADER = struct.Struct("<4s3I")


class FileFormatError(OSError):
    """Malformed tensor or mask file."""


def _write(path, magic, dims, payload):
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, *dims))
        fh.write(payload)


def _read(path, magic, itemsize):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FileFormatError(f"{path}: file too short for a header")
    got, n1, n2, n3 = _HEADER.unpack_from(raw)
    if got != magic:
        raise FileFormatError(f"{path}: bad magic {got!r}, expected {magic!r}")
    if min(n1, n2, n3) < 1:
        raise FileFormatError(f"{path}: invalid dims {(n1, n2, n3)}")
    body = raw[_HEADER.size:]
    if len(body) != n1 * n2 * n3 * itemsize:
        raise FileFormatError(
            f"{path}: payload has {len(body)} bytes, dims {(n1, n2, n3)} need "
            f"{n1 * n2 * n3 * itemsize}"
        )
    return (n1, n2, n3), body


def write_tensor(path, a):
    a = check_tensor(a)
    _write(path, TENSOR_MAGIC, a.shape, a.astype("<f8").tobytes(order="F"))


def read_tensor(path):
    dims, body = _read(path, TENSOR_MAGIC, 8)
    a = np.frombuffer(body, dtype="<f8").reshape(dims, order="F").astype(np.float64)
    if not np.all(np.isfinite(a)):
        raise FileFormatError(f"{path}: tensor contains non-finite values")
    return a


def write_mask(path, mask):
    ind = mask.indicator if isinstance(mask, ObservationMask) else np.asarray(mask, bool)
    _write(path, MASK_MAGIC, ind.shape, ind.astype(np.uint8).tobytes(order="F"))


def read_mask(path):
    dims, body = _read(path, MASK_MAGIC, 1)
    raw = np.frombuffer(body, dtype=np.uint8)
    if np.any(raw > 1):
        raise FileFormatError(f"{path}: mask bytes must be 0 or 1")
    if not raw.any():
        raise FileFormatError(f"{path}: mask observes no entries")
    return ObservationMask(raw.reshape(dims, order="F").astype(bool))
