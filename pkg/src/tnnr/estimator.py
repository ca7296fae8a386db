"""scikit-learn style wrapper around the completion solver."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_same_shape, check_tensor
from .completion import LossModel, ObservationMask
from .presets import build_weights, parse_penalty
from .solver import SolverConfig, solve


class TNNRCompleter(BaseEstimator, TransformerMixin):
    """Fill the missing entries of an order-3 tensor.

    Missing entries are given either by ``NaN`` in ``X`` or by an explicit
    boolean ``mask`` (``True`` = observed). ``transform`` solves a fresh
    problem for its input; ``fit_transform`` returns the fitted completion.

    Parameters
    ----------
    lam, theta1, theta2, epsilon, lf, mu, max_iters, tol :
        Solver parameters, see :class:`tnnr.solver.SolverConfig`
        (``tol`` is the relative-change tolerance).
    penalty : str
        ``identity``, ``power23`` or ``smooth23[:EPS]``.
    preset : str
        ``tnnr`` for adaptive weights, or a static preset such as ``tnn`` or
        ``pstnn:3``.
    seed : int

    Attributes
    ----------
    completed_ : ndarray
    trace_ : ConvergenceTrace
    n_iter_ : int
    mask_ : ObservationMask
    """

    def __init__(self, lam=5.0, theta1=0.49, theta2=0.49, epsilon=0.01, lf=2.0,
                 mu=None, max_iters=500, tol=1e-4, penalty="smooth23",
                 preset="tnnr", seed=0):
        self.lam = lam
        self.theta1 = theta1
        self.theta2 = theta2
        self.epsilon = epsilon
        self.lf = lf
        self.mu = mu
        self.max_iters = max_iters
        self.tol = tol
        self.penalty = penalty
        self.preset = preset
        self.seed = seed

    def _config(self):
        return SolverConfig(lam=self.lam, theta1=self.theta1, theta2=self.theta2,
                            epsilon=self.epsilon, lf=self.lf, mu=self.mu,
                            max_iters=self.max_iters, tol_rel_change=self.tol,
                            penalty=parse_penalty(self.penalty), seed=self.seed)

    def _loss(self, X, mask):
        X = check_tensor(X, "X", allow_nonfinite=True)
        if mask is None:
            observed = ~np.isnan(X)
        else:
            observed = np.asarray(getattr(mask, "indicator", mask), dtype=bool)
            check_same_shape(observed, X, ("mask", "X"))
        if not np.all(np.isfinite(X[observed])):
            raise ValueError("observed entries of X must be finite")
        mask = ObservationMask(observed)
        return LossModel(mask, np.where(observed, X, 0.0))

    def _solve(self, X, mask):
        loss = self._loss(X, mask)
        weights = build_weights(self.preset, loss.dims, loss.initial_guess())
        x, trace = solve(loss, self._config(), weights=weights)
        return x, trace, loss.mask

    def fit(self, X, y=None, mask=None):
        self.completed_, self.trace_, self.mask_ = self._solve(X, mask)
        self.n_iter_ = self.trace_.iterations
        return self

    def transform(self, X, mask=None):
        check_is_fitted(self, "completed_")
        return self._solve(X, mask)[0]

    def fit_transform(self, X, y=None, mask=None):
        return self.fit(X, mask=mask).completed_
