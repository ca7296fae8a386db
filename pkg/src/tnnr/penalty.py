"""Concave spectral penalties, their derivatives and scalar proximal maps.

The power family is ``rho(t) = (t + c)**p - c**p`` on ``t >= 0``: ``c = 0``
is the raw power, ``c > 0`` the smoothed variant whose derivative stays
finite at zero. ``p = 1`` gives the identity penalty.

The proximal map solves, elementwise,

    argmin_{d >= 0}  w * rho(d) + (d - sigma)**2 / 2.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import DomainError

_NEWTON_MAXITER = 200


def _check_nonneg(t, name):
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise DomainError(f"{name} must be finite")
    if np.any(t < 0):
        raise DomainError(f"{name} must be nonnegative")
    return t


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


class Penalty:
    """Interface shared by every penalty.

    Subclasses implement ``_value``, ``_grad`` and ``_prox`` on validated
    float arrays; the public wrappers handle scalars and domain checks.
    """

    name = "penalty"
    #: Lipschitz constant of the derivative on ``[0, inf)``.
    lipschitz_grad = np.inf

    def value(self, t):
        t = _check_nonneg(t, "t")
        return _scalar_or_array(self._value(t), t)

    def grad(self, t):
        t = _check_nonneg(t, "t")
        return _scalar_or_array(self._grad(t), t)

    def prox(self, w, sigma):
        w = _check_nonneg(w, "w")
        sigma = _check_nonneg(sigma, "sigma")
        w_b, s_b = np.broadcast_arrays(w, sigma)
        out = self._prox(np.array(w_b, dtype=np.float64), np.array(s_b, dtype=np.float64))
        return _scalar_or_array(out, s_b)

    def __call__(self, t):
        return self.value(t)


@dataclass(frozen=True, repr=False)
class PowerPenalty(Penalty):
    """``rho(t) = (t + smoothing)**p - smoothing**p`` with ``0 < p <= 1``."""

    p: float = 2.0 / 3.0
    smoothing: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"power p must lie in (0, 1], got {self.p}")
        if self.smoothing < 0:
            raise DomainError("smoothing must be nonnegative")

    def __repr__(self):
        if self.p == 1.0:
            return "IdentityPenalty()"
        if self.smoothing:
            return f"SmoothedPowerPenalty(p={self.p:g}, smoothing={self.smoothing:g})"
        return f"PowerPenalty(p={self.p:g})"

    @property
    def name(self):
        return repr(self)

    @property
    def lipschitz_grad(self):
        if self.p == 1.0:
            return 0.0
        if self.smoothing == 0.0:
            return np.inf
        return self.p * (1.0 - self.p) * self.smoothing ** (self.p - 2.0)

    def _value(self, t):
        if self.p == 1.0:
            return t.copy()
        c = self.smoothing
        return (t + c) ** self.p - c ** self.p

    def _grad(self, t):
        if self.p == 1.0:
            return np.ones_like(t)
        if self.smoothing == 0.0 and np.any(t == 0):
            raise DomainError(
                "derivative of the raw power penalty is unbounded at 0; "
                "use smoothed_power()"
            )
        return self.p * (t + self.smoothing) ** (self.p - 1.0)

    def _prox(self, w, sigma):
        if self.p == 1.0:
            return np.maximum(sigma - w, 0.0)
        p, c = self.p, self.smoothing
        out = sigma.copy()
        active = (w > 0) & (sigma > 0)
        if not np.any(active):
            return out
        w_a, s_a = w[active], sigma[active]

        def psi(d):
            # derivative of the prox objective; convex and eventually increasing in d
            return d - s_a + w_a * p * (d + c) ** (p - 1.0)

        def dpsi(d):
            return 1.0 + w_a * p * (p - 1.0) * (d + c) ** (p - 2.0)

        # psi is increasing right of its minimizer; the local minimizer of the
        # prox objective, if any, is the root of psi on [lo, sigma]
        lo = np.maximum((w_a * p * (1.0 - p)) ** (1.0 / (2.0 - p)) - c, 0.0)
        lo = np.minimum(lo, s_a)
        with np.errstate(divide="ignore"):
            # raw power at lo = 0: psi is +inf there, i.e. no interior root
            has_root = psi(lo) <= 0.0
        root = np.zeros_like(s_a)
        if np.any(has_root):
            root[has_root] = _safeguarded_newton(
                psi, dpsi, lo, s_a, has_root
            )
        f_root = w_a * ((root + c) ** p - c ** p) + 0.5 * (root - s_a) ** 2
        f_zero = 0.5 * s_a ** 2
        out[active] = np.where(has_root & (f_root <= f_zero), root, 0.0)
        return out


def _safeguarded_newton(psi, dpsi, lo, hi, mask):
    """Root of the increasing function ``psi`` on ``[lo, hi]`` for entries in ``mask``.

    Newton iterates start at ``hi`` and fall back to bisection whenever they
    leave the current bracket.
    """
    a = lo.copy()
    b = hi.copy()
    d = hi.copy()
    done = ~mask
    for _ in range(_NEWTON_MAXITER):
        val = psi(d)
        pos = val > 0
        b = np.where(pos, d, b)
        a = np.where(pos, a, d)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = d - val / dpsi(d)
        bad = ~np.isfinite(step) | (step <= a) | (step >= b)
        new = np.where(bad, 0.5 * (a + b), step)
        conv = np.abs(new - d) <= 1e-14 * np.maximum(1.0, np.abs(d))
        d = np.where(done, d, new)
        done |= conv | (b - a <= 1e-14 * np.maximum(1.0, b))
        if np.all(done):
            break
    return d[mask]


def identity():
    """``rho(t) = t``; its prox is soft-thresholding."""
    return PowerPenalty(p=1.0)


def power(p=2.0 / 3.0):
    return PowerPenalty(p=p)


def smoothed_power(p=2.0 / 3.0, smoothing=1e-6):
    """``(t + smoothing)**p - smoothing**p``, the default production penalty."""
    if smoothing <= 0:
        raise DomainError("smoothing must be positive")
    return PowerPenalty(p=p, smoothing=smoothing)


@dataclass(frozen=True, eq=False)
class CallablePenalty(Penalty):
    """Arbitrary scalar penalty given as a vectorized callable.

    The prox is found by grid search on ``[0, 4 * max(sigma, 1)]`` followed by
    a bounded scalar refinement. A minimizer on the right edge of the search
    interval is reported as ``inf`` (objective unbounded below).
    """

    func: object
    deriv: object = None
    name: str = "callable"
    grid_points: int = field(default=4001, repr=False)

    def _value(self, t):
        return np.asarray(self.func(t), dtype=np.float64)

    def _grad(self, t):
        if self.deriv is not None:
            return np.asarray(self.deriv(t), dtype=np.float64)
        h = 1e-6
        return (self.func(t + h) - self.func(np.maximum(t - h, 0.0))) / (
            t + h - np.maximum(t - h, 0.0)
        )

    def _prox(self, w, sigma):
        out = np.empty_like(sigma)
        for idx in np.ndindex(sigma.shape):
            out[idx] = self._prox_one(float(w[idx]), float(sigma[idx]))
        return out

    def _prox_one(self, w, sigma):
        upper = 4.0 * max(sigma, 1.0)
        grid = np.linspace(0.0, upper, self.grid_points)
        obj = w * self.func(grid) + 0.5 * (grid - sigma) ** 2
        j = int(np.argmin(obj))
        if j == len(grid) - 1:
            return np.inf
        step = grid[1] - grid[0]
        res = minimize_scalar(
            lambda d: w * float(self.func(np.asarray(d))) + 0.5 * (d - sigma) ** 2,
            bounds=(max(grid[j] - step, 0.0), grid[j] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return float(res.x) if res.fun <= obj[j] else float(grid[j])


def evaluate(penalty, t):
    return penalty.value(t)


def grad(penalty, t):
    return penalty.grad(t)


def scalar_prox(penalty, w, sigma):
    """Global minimizer of ``w * rho(d) + (d - sigma)**2 / 2`` over ``d >= 0``."""
    return penalty.prox(w, sigma)


def check_prox_monotone(penalty, w, grid):
    """True when the prox outputs are finite and nondecreasing along ``grid``."""
    grid = np.asarray(grid, dtype=np.float64)
    out = np.asarray(penalty.prox(np.full_like(grid, w), grid), dtype=np.float64)
    if not np.all(np.isfinite(out)):
        return False
    slack = 1e-12 * max(1.0, float(np.max(np.abs(out), initial=0.0)))
    return bool(np.all(np.diff(out) >= -slack))


STANDARD_GRID = np.arange(0, 1001) * 0.01
STANDARD_WEIGHTS = (0.1, 1.0, 10.0)


def is_admissible(penalty):
    """Registration gate: prox monotone on the standard grid for several weights."""
    return all(check_prox_monotone(penalty, w, STANDARD_GRID) for w in STANDARD_WEIGHTS)
