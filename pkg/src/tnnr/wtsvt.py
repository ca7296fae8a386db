"""Double-weighted spectral penalties and weighted tensor singular value thresholding.

A :class:`WeightScheme` assigns a slice weight ``alpha[k]`` and per-value
weights ``beta[i, k]`` to the ``i``-th singular value of the ``k``-th
Fourier slice. The induced penalty is

    sum_k sum_i alpha[k] * beta[i, k] * rho(sigma[i, k]).

Static schemes reproduce the classical relaxations (TNN, PSTNN, ...);
adaptive schemes take the weights from supergradients of the penalty at the
current iterate.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import penalty as _penalty
from ._validation import check_tensor
from .exceptions import ConfigError, ShapeError
from .spectral import idft_mode3, mirror_slices
from .tsvd import mirror_svals, spectral_singular_values, spectral_svd

PRESET_TAGS = ("tnn", "pstnn", "wtnn", "ttnn", "wsp")

# tolerated ordering inversion of thresholded values before it counts as a bug
_INVERSION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WeightScheme:
    """Slice weights ``alpha`` (``n3``,) and value weights ``beta`` (``r``, ``n3``)."""

    alpha: np.ndarray
    beta: np.ndarray
    penalty: _penalty.Penalty
    kind: str = "static"
    preset_tag: str = None
    # adaptive schemes keep rho(sigma) and the per-slice sums for diagnostics
    h: np.ndarray = field(default=None, repr=False)
    g: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        beta = np.asarray(self.beta, dtype=np.float64)
        if alpha.ndim != 1 or beta.ndim != 2 or beta.shape[1] != alpha.shape[0]:
            raise ShapeError(f"alpha {alpha.shape} and beta {beta.shape} do not match")
        if np.any(alpha < 0) or not np.any(alpha > 0):
            raise ConfigError("alpha must be nonnegative with at least one positive entry")
        if self.kind == "adaptive" and np.any(alpha <= 0):
            raise ConfigError("adaptive schemes need strictly positive alpha")
        if np.any(beta < 0):
            raise ConfigError("beta must be nonnegative")
        if np.any(np.diff(beta, axis=0) < -1e-12 * max(1.0, float(beta.max(initial=0)))):
            raise ConfigError("beta must be nondecreasing in the singular value index")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def n3(self):
        return self.alpha.shape[0]

    @property
    def rank_dim(self):
        return self.beta.shape[0]

    def check_dims(self, dims):
        n1, n2, n3 = dims
        if (min(n1, n2), n3) != self.beta.shape:
            raise ShapeError(
                f"weight scheme built for (r, n3)={self.beta.shape}, tensor has {dims}"
            )


def _penalize(sv, w):
    return float(np.sum(w.alpha[None, :] * w.beta * w.penalty.value(sv)))


def weighted_norm(x, w):
    """``sum_k sum_i alpha_k beta_ik rho(sigma_ik)`` over the Fourier singular values of ``x``."""
    x = check_tensor(x)
    w.check_dims(x.shape)
    return _penalize(spectral_singular_values(x), w)


def _default_truncation(r):
    return math.ceil(0.05 * r)


def _truncated_beta(r, n3, n_keep):
    if not 0 <= n_keep <= r:
        raise ConfigError(f"truncation N must lie in [0, {r}], got {n_keep}")
    beta = np.ones((r, n3))
    beta[:n_keep] = 0.0
    return beta


def preset_scheme(tag, dims, reference=None, **params):
    """Static weight scheme of a classical tubal relaxation.

    ``tag`` is one of ``tnn``, ``pstnn`` (``N``), ``wtnn`` (``eps``),
    ``ttnn`` (``N``) or ``wsp`` (``p``, ``c``, ``eps``). The ``wtnn`` and
    ``wsp`` weights depend on singular values, taken from ``reference``.
    """
    n1, n2, n3 = dims
    r = min(n1, n2)
    tag = tag.lower()
    if tag == "tnn":
        return WeightScheme(np.full(n3, 1.0 / n3), np.ones((r, n3)), _penalty.identity(),
                            preset_tag="TNN")
    if tag == "pstnn":
        n_keep = int(params.get("N", _default_truncation(r)))
        return WeightScheme(np.ones(n3), _truncated_beta(r, n3, n_keep), _penalty.identity(),
                            preset_tag=f"PSTNN({n_keep})")
    if tag == "ttnn":
        n_keep = int(params.get("N", _default_truncation(r)))
        alpha = np.zeros(n3)
        alpha[0] = 1.0
        return WeightScheme(alpha, _truncated_beta(r, n3, n_keep), _penalty.identity(),
                            preset_tag=f"TTNN({n_keep})")
    if tag in ("wtnn", "wsp"):
        if reference is None:
            raise ConfigError(f"preset {tag!r} needs a reference tensor for its weights")
        reference = check_tensor(reference, "reference")
        if reference.shape != tuple(dims):
            raise ShapeError("reference tensor does not match dims")
        sv = spectral_singular_values(reference)
        eps = float(params.get("eps", 1e-6 if tag == "wtnn" else 1e-3))
        if eps <= 0:
            raise ConfigError("eps must be positive")
        if tag == "wtnn":
            return WeightScheme(np.full(n3, 1.0 / n3), 1.0 / (sv + eps), _penalty.identity(),
                                preset_tag=f"WeightedTNN({eps:g})")
        p = float(params.get("p", 0.5))
        c = float(params.get("c", 1.0))
        if not 0 < p <= 1 or c <= 0:
            raise ConfigError("wsp needs p in (0, 1] and c > 0")
        # (1/2p)-th root of max(0, sigma_i^2 - sigma_r^2), i.e. its 2p-th power
        gap = np.maximum(0.0, sv ** 2 - sv[-1:, :] ** 2)
        beta = c / (gap ** (2.0 * p) + eps)
        return WeightScheme(np.full(n3, 1.0 / n3), beta, _penalty.power(p),
                            preset_tag=f"WeightedSchattenP({p:g},{c:g},{eps:g})")
    raise ConfigError(f"unknown preset {tag!r}; expected one of {PRESET_TAGS}")


def adaptive_weights_from_svals(sv, penalty):
    """Supergradient weights at Fourier singular values ``sv`` of shape ``(r, n3)``."""
    if not np.isfinite(penalty.lipschitz_grad):
        raise ConfigError(
            f"{penalty!r} has an unbounded derivative at 0; adaptive weights need a "
            "smoothed penalty"
        )
    h = penalty.value(sv)
    beta = penalty.grad(h)
    # sigma descending and rho' nonincreasing give ascending beta; remove roundoff dips
    beta = np.maximum.accumulate(beta, axis=0)
    g = np.sum(penalty.value(h), axis=0)
    alpha = penalty.grad(g)
    return WeightScheme(alpha, beta, penalty, kind="adaptive", preset_tag="TNNR", h=h, g=g)


def adaptive_weights(x, penalty):
    """Reweighting at ``x``: ``beta = rho'(rho(sigma))``, ``alpha = rho'(sum_i rho(rho(sigma)))``."""
    return adaptive_weights_from_svals(spectral_singular_values(x), penalty)


@functools.lru_cache(maxsize=64)
def _admitted(penalty):
    return _penalty.is_admissible(penalty)


def weighted_tsvt(y, eta, w, return_svals=False):
    """Minimizer of ``eta * weighted_norm(X, w) + ||X - y||^2 / 2``.

    Each Fourier singular value ``sigma[i, k]`` of ``y`` is replaced by the
    scalar prox with coefficient ``n3 * eta * alpha[k] * beta[i, k]``; the
    factor ``n3`` comes from ``||X||^2 = ||fft(X)||^2 / n3``.

    With ``return_svals`` the Fourier singular values of the result, shape
    ``(r, n3)`` and descending per slice, are returned as well.
    """
    y = check_tensor(y, "y")
    if not eta > 0:
        raise ConfigError("eta must be positive")
    w.check_dims(y.shape)
    if not _admitted(w.penalty):
        raise ConfigError(f"{w.penalty!r} failed the prox monotonicity check")
    n3 = y.shape[2]
    _, u, s, vh = spectral_svd(y)
    n_half = s.shape[0]
    coef = n3 * eta * (w.alpha[:n_half, None] * w.beta[:, :n_half].T)
    delta = np.asarray(w.penalty.prox(coef, s), dtype=np.float64)
    inversion = float(np.max(np.diff(delta, axis=1), initial=0.0))
    if inversion > _INVERSION_TOL * max(1.0, float(delta.max(initial=0.0))):
        raise ArithmeticError(f"thresholding broke the singular value order by {inversion:.3e}")
    half = (u * delta[:, None, :]) @ vh
    out = idft_mode3(mirror_slices(np.moveaxis(half, 0, 2), n3))
    if return_svals:
        return out, mirror_svals(-np.sort(-delta, axis=1), n3)
    return out
