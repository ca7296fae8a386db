"""Tensor completion instances: observation masks, the masked squared loss, data generators."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_dims, check_tensor
from .exceptions import ConfigError, ShapeError
from .tensor import t_product


@dataclass(frozen=True, eq=False)
class ObservationMask:
    """Boolean indicator of the observed entries (``True`` = observed)."""

    indicator: np.ndarray

    def __post_init__(self):
        ind = np.asarray(self.indicator, dtype=bool)
        if ind.ndim != 3:
            raise ShapeError("mask must be order 3")
        if not ind.any():
            raise ConfigError("mask observes no entries")
        ind.flags.writeable = False
        object.__setattr__(self, "indicator", ind)

    @property
    def dims(self):
        return self.indicator.shape

    @property
    def n_observed(self):
        return int(self.indicator.sum())

    @property
    def sampling_ratio(self):
        return self.n_observed / self.indicator.size

    @classmethod
    def full(cls, dims):
        return cls(np.ones(check_dims(dims), dtype=bool))


def project(mask, x):
    """Keep the observed entries of ``x`` and zero the rest."""
    x = check_tensor(x)
    if x.shape != mask.dims:
        raise ShapeError(f"mask {mask.dims} does not match tensor {x.shape}")
    return np.where(mask.indicator, x, 0.0)


@dataclass(frozen=True, eq=False)
class LossModel:
    """``f(X) = ||P(X - M)||^2`` with ``P`` the projection on the observed entries."""

    mask: ObservationMask
    observed: np.ndarray
    lf: float = field(default=2.0, init=False)

    def __post_init__(self):
        obs = check_tensor(self.observed, "observed")
        if obs.shape != self.mask.dims:
            raise ShapeError(f"observed {obs.shape} does not match mask {self.mask.dims}")
        object.__setattr__(self, "observed", project(self.mask, obs))

    @classmethod
    def from_full(cls, m, mask):
        return cls(mask, project(mask, m))

    @property
    def dims(self):
        return self.mask.dims

    def residual(self, x):
        return project(self.mask, x) - self.observed

    def value(self, x):
        r = self.residual(x)
        return float(np.vdot(r, r))

    def grad(self, x):
        return 2.0 * self.residual(x)

    def initial_guess(self):
        """Observed entries, zeros elsewhere."""
        return self.observed.copy()


def loss_value(loss, x):
    return loss.value(x)


def loss_grad(loss, x):
    return loss.grad(x)


def _uniform_indicator(dims, sr, rng):
    if not 0 < sr <= 1:
        raise ConfigError(f"sampling ratio must lie in (0, 1], got {sr}")
    total = int(np.prod(dims))
    n_obs = int(round(sr * total))
    if n_obs < 1:
        raise ConfigError("sampling ratio leaves no observed entries")
    flat = np.zeros(total, dtype=bool)
    flat[rng.choice(total, size=n_obs, replace=False)] = True
    return flat.reshape(dims, order="F")


def synth_instance(n1, n2, n3, r, sr, seed):
    """Random tubal-rank-``r`` tensor ``A * B`` with Gaussian factors and a uniform mask.

    Returns ``(m_true, mask)``; identical seeds give identical outputs.
    """
    n1, n2, n3 = check_dims((n1, n2, n3))
    if not 1 <= r <= min(n1, n2):
        raise ConfigError(f"rank must lie in [1, {min(n1, n2)}], got {r}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n1, r, n3))
    b = rng.standard_normal((r, n2, n3))
    m_true = t_product(a, b)
    mask = ObservationMask(_uniform_indicator((n1, n2, n3), sr, rng))
    return m_true, mask


def structured_mask(kind, dims, seed=0, **params):
    """Observation masks for inpainting experiments.

    kind ``uniform``
        ``sr`` fraction of entries observed uniformly at random.
    kind ``rectangle``
        the box ``[i0, i0 + h) x [j0, j0 + w)`` is missing in every slice.
    kind ``grid``
        rows and columns ``i`` with ``i % period < thickness`` are missing.
    """
    dims = check_dims(dims)
    n1, n2, _ = dims
    if kind == "uniform":
        return ObservationMask(_uniform_indicator(dims, float(params["sr"]),
                                                  np.random.default_rng(seed)))
    ind = np.ones(dims, dtype=bool)
    if kind == "rectangle":
        i0, j0, h, w = (int(params[k]) for k in ("i0", "j0", "h", "w"))
        if min(i0, j0, h, w) < 0 or i0 + h > n1 or j0 + w > n2:
            raise ConfigError(f"rectangle ({i0}, {j0}, {h}, {w}) exceeds {n1}x{n2}")
        ind[i0:i0 + h, j0:j0 + w, :] = False
    elif kind == "grid":
        period, thickness = int(params["period"]), int(params["thickness"])
        if period < 1 or not 0 <= thickness <= period:
            raise ConfigError("grid needs period >= 1 and 0 <= thickness <= period")
        ind[np.arange(n1) % period < thickness, :, :] = False
        ind[:, np.arange(n2) % period < thickness, :] = False
    else:
        raise ConfigError(f"unknown mask kind {kind!r}")
    return ObservationMask(ind)
