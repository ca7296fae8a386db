"""Image quality metrics for recovered tensors."""

import logging

import numpy as np
from scipy.signal import convolve2d

from ._validation import check_same_shape, check_tensor

logger = logging.getLogger(__name__)


def relative_error(x, ref):
    x = check_tensor(x, "x")
    ref = check_tensor(ref, "ref")
    check_same_shape(x, ref, ("x", "ref"))
    return float(np.linalg.norm((x - ref).ravel()) / np.linalg.norm(ref.ravel()))


def psnr(x, ref, peak=1.0):
    """``10 log10(peak^2 / MSE)`` in dB; ``inf`` when the tensors coincide."""
    x = check_tensor(x, "x")
    ref = check_tensor(ref, "ref")
    check_same_shape(x, ref, ("x", "ref"))
    if not peak > 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak ** 2 / mse))


def gaussian_window(size=11, sigma=1.5):
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2 * sigma ** 2))
    win = np.outer(g, g)
    return win / win.sum()


def _ssim_slice(a, b, win, c1, c2):
    def filt(img):
        return convolve2d(img, win, mode="valid")

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a ** 2
    var_b = filt(b * b) - mu_b ** 2
    cov = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(x, ref, data_range=1.0, window=11, sigma=1.5):
    """Mean SSIM over frontal slices with a Gaussian window.

    Constants ``C1 = (0.01 L)^2`` and ``C2 = (0.03 L)^2`` with ``L = data_range``;
    statistics are taken over the windows lying fully inside each slice.
    """
    x = check_tensor(x, "x")
    ref = check_tensor(ref, "ref")
    check_same_shape(x, ref, ("x", "ref"))
    if np.array_equal(x, ref):
        return 1.0
    size = min(window, x.shape[0], x.shape[1])
    if size % 2 == 0:
        size -= 1
    if size != window:
        logger.info("slices of %s are smaller than the %d-pixel window; using %d",
                    x.shape[:2], window, size)
    win = gaussian_window(size, sigma)
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    return float(np.mean([_ssim_slice(x[:, :, k], ref[:, :, k], win, c1, c2)
                          for k in range(x.shape[2])]))
