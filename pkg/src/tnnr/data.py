"""Generated test data shipped with the package."""

import numpy as np

from .tensor import t_product

TEXTURE_SEED = 20240517


def texture_image(n1=64, n2=64, n3=3, rank=4, seed=TEXTURE_SEED):
    """Deterministic low-tubal-rank colour "texture" with values in ``[0, 1]``.

    Built as ``A * B`` with nonnegative periodic factors, so the t-product is
    nonnegative and the tubal rank is at most ``rank``; the result is scaled
    by its maximum (a rank-preserving operation).
    """
    rng = np.random.default_rng(seed)
    i = np.arange(n1)[:, None, None]
    j = np.arange(n2)[None, :, None]
    freq_a = rng.integers(1, 6, size=(1, rank, n3))
    freq_b = rng.integers(1, 6, size=(rank, 1, n3))
    phase_a = rng.uniform(0, 2 * np.pi, size=(1, rank, n3))
    phase_b = rng.uniform(0, 2 * np.pi, size=(rank, 1, n3))
    a = 1.0 + np.cos(2 * np.pi * freq_a * i / n1 + phase_a)
    b = 1.0 + np.cos(2 * np.pi * freq_b * j / n2 + phase_b)
    img = t_product(a, b)
    return img / img.max()
