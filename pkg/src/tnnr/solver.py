"""Inertial proximal gradient solver for reweighted low-tubal-rank recovery.

Each iteration extrapolates twice from the last two iterates,

    Y = X_t + theta1 * (X_t - X_{t-1})
    Z = X_t + theta2 * (X_t - X_{t-1}),

takes a weighted t-SVT step at ``Y - grad f(Z) / mu`` and, in adaptive
mode, refreshes the weights from the new iterate. Progress is certified by
the Lyapunov quantity ``H = F(X_{t+1}) + (mu * theta1 / 2) ||X_{t+1} - X_t||^2``
which must not increase when ``mu`` satisfies the step-size rule.
"""

import csv
import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import penalty as _penalty
from ._validation import check_same_shape, check_tensor
from .exceptions import ConfigError, DivergenceError
from .tsvd import spectral_singular_values
from .wtsvt import WeightScheme, _penalize, adaptive_weights_from_svals, weighted_tsvt

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("iter", "F", "H", "step_norm", "rel_change", "loss", "seconds")

H_SLACK = 1e-9
DIVERGENCE_FACTOR = 1e6


def minimal_step_parameter(theta1, theta2, lf, epsilon):
    """Smallest ``mu`` allowed for constant extrapolation weights.

    ``lf * max(theta2 / theta1, (1 - theta2) / (1 - 2 theta1 - epsilon))``;
    with ``theta1 = 0`` only ``theta2 = 0`` is admissible and the bound is
    ``lf / (1 - epsilon)``.
    """
    if theta1 == 0:
        if theta2 != 0:
            raise ConfigError("theta2 > 0 requires theta1 > 0 (mu >= theta2 * lf / theta1)")
        return lf / (1.0 - epsilon)
    return lf * max(theta2 / theta1, (1.0 - theta2) / (1.0 - 2.0 * theta1 - epsilon))


@dataclass
class SolverConfig:
    """Parameters of the inertial solver.

    ``mu=None`` selects the minimal admissible value from
    :func:`minimal_step_parameter`. ``theta_schedule``, if given, maps the
    iteration index ``t`` to ``(theta1_t, theta2_t)`` and overrides the
    constants; ``mu`` stays fixed, so the descent guarantee only holds when
    it is admissible for every scheduled pair. ``tol_ground_truth`` switches to the
    synthetic stopping rule ``||X - M|| / ||M|| < tol_ground_truth`` and is
    only honoured when the true tensor is passed to :func:`solve`.
    """

    lam: float = 5.0
    theta1: float = 0.49
    theta2: float = 0.49
    epsilon: float = 0.01
    lf: float = 2.0
    mu: float = None
    max_iters: int = 500
    tol_rel_change: float = 1e-4
    tol_ground_truth: float = None
    penalty: _penalty.Penalty = field(default_factory=_penalty.smoothed_power)
    seed: int = 0
    theta_schedule: object = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("lam must be positive")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if not 0 <= self.theta1 < (1 - self.epsilon) / 2:
            raise ConfigError(f"theta1 must lie in [0, {(1 - self.epsilon) / 2:g})")
        if not 0 <= self.theta2 <= 0.5:
            raise ConfigError("theta2 must lie in [0, 1/2]")
        if not self.lf > 0:
            raise ConfigError("lf must be positive")
        if self.mu is None:
            minimal_step_parameter(self.theta1, self.theta2, self.lf, self.epsilon)
        elif not self.mu > 0:
            raise ConfigError("mu must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.theta_schedule is not None and not callable(self.theta_schedule):
            raise ConfigError("theta_schedule must be callable")

    def thetas(self, t):
        """Extrapolation weights ``(theta1, theta2)`` for iteration ``t``."""
        if self.theta_schedule is None:
            return self.theta1, self.theta2
        theta1, theta2 = (float(v) for v in self.theta_schedule(t))
        if not (0 <= theta1 < (1 - self.epsilon) / 2 and 0 <= theta2 <= 0.5):
            raise ConfigError(f"scheduled thetas {(theta1, theta2)} out of range at t={t}")
        return theta1, theta2

    @property
    def step_parameter(self):
        """The constant ``mu`` used by every iteration."""
        if self.mu is not None:
            return float(self.mu)
        return minimal_step_parameter(self.theta1, self.theta2, self.lf, self.epsilon)

    @property
    def conforming(self):
        """Whether ``mu`` satisfies the step-size rule that guarantees descent of ``H``."""
        try:
            bound = minimal_step_parameter(self.theta1, self.theta2, self.lf, self.epsilon)
        except ConfigError:
            return False
        return self.step_parameter >= bound * (1 - 1e-12)

    @property
    def h_weight(self):
        """Weight ``delta = mu * theta1 / 2`` of the step term in ``H``."""
        return self.step_parameter * self.theta1 / 2.0

    def echo(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["penalty"] = repr(self.penalty)
        if self.theta_schedule is not None:
            out["theta_schedule"] = getattr(self.theta_schedule, "__name__", repr(self.theta_schedule))
        out["mu_effective"] = self.step_parameter
        return out


@dataclass
class IterState:
    x_curr: np.ndarray
    x_prev: np.ndarray
    t: int = 0
    weights: WeightScheme = None


@dataclass
class TraceRecord:
    iter: int
    F: float
    H: float
    step_norm: float
    rel_change: float
    loss: float
    seconds: float
    rel_error: float = float("nan")


@dataclass
class ConvergenceTrace:
    """Per-iteration history; row 0 describes the initial point."""

    mu: float
    theta1: float
    lf: float
    epsilon: float
    records: list = field(default_factory=list)
    stop_reason: str = None

    def append(self, rec):
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    @property
    def iterations(self):
        return max(len(self.records) - 1, 0)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for rec in self.records:
                row = asdict(rec)
                writer.writerow([row["iter"]] + [repr(float(row[c])) for c in TRACE_COLUMNS[1:]])


def penalty_value(sv, lam, penalty):
    """``lam * sum_k rho(sum_i rho(rho(sigma_ik)))`` for Fourier singular values ``sv``."""
    inner = np.sum(penalty.value(penalty.value(sv)), axis=0)
    return lam * float(np.sum(penalty.value(inner)))


def objective(x, cfg, loss):
    """Triple-composed rank surrogate plus the data loss."""
    x = check_tensor(x)
    return penalty_value(spectral_singular_values(x), cfg.lam, cfg.penalty) + loss.value(x)


def weighted_objective(x, cfg, loss, weights):
    """``lam * weighted_norm(x) + f(x)``, the objective of a static weight scheme."""
    x = check_tensor(x)
    return cfg.lam * _penalize(spectral_singular_values(x), weights) + loss.value(x)


def extrapolate(state, cfg, theta1=None, theta2=None):
    """Return ``(Y, Z)``, the two inertial points."""
    theta1 = cfg.theta1 if theta1 is None else theta1
    theta2 = cfg.theta2 if theta2 is None else theta2
    d = state.x_curr - state.x_prev
    return state.x_curr + theta1 * d, state.x_curr + theta2 * d


def prox_step(y, z, cfg, weights, loss, return_svals=False):
    """Minimizer of ``lam * weighted_norm(X) + <X - Y, grad f(Z)> + mu/2 ||X - Y||^2``.

    Completing the square turns this into a weighted t-SVT of the gradient
    point ``Y - grad f(Z) / mu`` with ``eta = lam / mu``.
    """
    mu = cfg.step_parameter
    point = y - loss.grad(z) / mu
    return weighted_tsvt(point, cfg.lam / mu, weights, return_svals=return_svals)


def surrogate_value(x, y, z, cfg, weights, loss):
    """The model ``Q(X, Y, Z)`` minimized by :func:`prox_step`."""
    mu = cfg.step_parameter
    d = x - y
    return (cfg.lam * _penalize(spectral_singular_values(x), weights)
            + float(np.vdot(d, loss.grad(z))) + 0.5 * mu * float(np.vdot(d, d)))


def _norm(a):
    return float(np.linalg.norm(a.ravel()))


def solve(loss, cfg=None, weights="adaptive", x0=None, m_true=None):
    """Run the inertial reweighted solver.

    Parameters
    ----------
    loss : LossModel
        Data term; its ``lf`` is not consulted, ``cfg.lf`` is.
    cfg : SolverConfig
    weights : "adaptive" or WeightScheme
        ``"adaptive"`` reweights after every step from the new iterate; a
        static scheme (e.g. from :func:`preset_scheme`) is kept fixed.
    x0 : array, optional
        Starting point; defaults to the observed entries with zeros elsewhere.
    m_true : array, optional
        Ground truth, enabling the relative-error stopping rule and the
        ``rel_error`` trace column.

    Returns
    -------
    x : ndarray
    trace : ConvergenceTrace
    """
    cfg = cfg or SolverConfig()
    if not cfg.conforming:
        logger.warning("mu=%g violates the step-size rule; H may increase", cfg.step_parameter)
    x = loss.initial_guess() if x0 is None else check_tensor(x0, "x0").copy()
    check_same_shape(x, loss.observed, ("x0", "observed"))
    if m_true is not None:
        m_true = check_tensor(m_true, "m_true")
        check_same_shape(m_true, x, ("m_true", "x0"))
        m_norm = _norm(m_true)
    use_truth = m_true is not None and cfg.tol_ground_truth is not None
    adaptive = isinstance(weights, str)
    if adaptive and weights != "adaptive":
        raise ConfigError(f"weights must be 'adaptive' or a WeightScheme, got {weights!r}")

    mu, lam, delta = cfg.step_parameter, cfg.lam, cfg.h_weight
    sv = spectral_singular_values(x)
    if adaptive:
        w = adaptive_weights_from_svals(sv, cfg.penalty)
        f_val = penalty_value(sv, lam, cfg.penalty)
    else:
        w = weights
        w.check_dims(x.shape)
        f_val = lam * _penalize(sv, w)
    loss_val = loss.value(x)
    f_val += loss_val

    trace = ConvergenceTrace(mu=mu, theta1=cfg.theta1, lf=cfg.lf, epsilon=cfg.epsilon)
    rel_err = _norm(x - m_true) / m_norm if m_true is not None else float("nan")
    trace.append(TraceRecord(0, f_val, f_val, 0.0, 0.0, loss_val, 0.0, rel_err))
    f_start = f_val
    state = IterState(x_curr=x, x_prev=x.copy(), t=0, weights=w)
    start = time.perf_counter()

    for t in range(cfg.max_iters):
        theta1, theta2 = cfg.thetas(t)
        if cfg.theta_schedule is not None:
            delta = mu * theta1 / 2.0
        y, z = extrapolate(state, cfg, theta1, theta2)
        x_new, sv_new = prox_step(y, z, cfg, state.weights, loss, return_svals=True)
        loss_val = loss.value(x_new)
        if adaptive:
            f_val = penalty_value(sv_new, lam, cfg.penalty) + loss_val
        else:
            f_val = lam * _penalize(sv_new, state.weights) + loss_val
        step = _norm(x_new - state.x_curr)
        h_val = f_val + delta * step ** 2
        rel_change = step / max(_norm(state.x_curr), 1.0)
        rel_err = _norm(x_new - m_true) / m_norm if m_true is not None else float("nan")
        trace.append(TraceRecord(t + 1, f_val, h_val, step, rel_change, loss_val,
                                 time.perf_counter() - start, rel_err))

        if not np.isfinite(f_val) or abs(f_val) > DIVERGENCE_FACTOR * max(abs(f_start), 1.0):
            trace.stop_reason = "diverged"
            raise DivergenceError(f"objective diverged at iteration {t + 1}: F={f_val:g}", trace)

        new_w = adaptive_weights_from_svals(sv_new, cfg.penalty) if adaptive else state.weights
        state = IterState(x_curr=x_new, x_prev=state.x_curr, t=t + 1, weights=new_w)

        if use_truth:
            if rel_err < cfg.tol_ground_truth:
                trace.stop_reason = "ground_truth"
                break
        elif rel_change < cfg.tol_rel_change:
            trace.stop_reason = "rel_change"
            break
    else:
        trace.stop_reason = "max_iters"
    return state.x_curr, trace


@dataclass
class MonitorReport:
    """Outcome of :func:`monitor_check`.

    ``h_increases`` lists iterations where ``H`` rose by more than the slack;
    ``decrement_violations`` those where the drop fell short of
    ``epsilon * lf / 2 * step_norm**2``. ``stationary`` tells whether the last
    relative change went below the step tolerance.
    """

    h_increases: list
    decrement_violations: list
    stationary: bool
    final_rel_change: float

    @property
    def h_monotone(self):
        return not self.h_increases

    @property
    def decrement_held(self):
        return not self.decrement_violations

    @property
    def passed(self):
        return self.h_monotone and self.decrement_held


def monitor_check(trace, cfg=None, step_tol=None, slack=H_SLACK):
    """Audit a trace against the descent guarantees of the solver."""
    if not len(trace):
        raise ValueError("empty trace")
    eps = cfg.epsilon if cfg is not None else trace.epsilon
    lf = cfg.lf if cfg is not None else trace.lf
    h = trace.column("H")
    steps = trace.column("step_norm")
    drops = h[:-1] - h[1:]
    increases = [int(i + 1) for i in np.flatnonzero(-drops > slack)]
    required = 0.5 * eps * lf * steps[1:] ** 2
    violations = [int(i + 1) for i in np.flatnonzero(drops < required - slack)]
    if step_tol is None:
        step_tol = cfg.tol_rel_change if cfg is not None else 1e-4
    final = float(trace.records[-1].rel_change)
    return MonitorReport(increases, violations, len(trace) == 1 or final < step_tol, final)
