"""
The regularized cost functional F_alpha(phi) = 1/2||T phi - f||^2 + alpha J(phi),
an accelerated gradient solver certified by the gradient norm, and the
closed-form Tikhonov oracle for the quadratic penalty.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .conf import reglab_setting
from .exceptions import InvalidParameter, SolverDivergence
from .operators import as_vector

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CostFunctional:
    operator: object
    data: np.ndarray
    alpha: float
    penalty: object

    def __post_init__(self):
        object.__setattr__(self, 'data', as_vector(self.data, self.operator.range_dim, 'data'))
        if self.alpha < 0 or not math.isfinite(self.alpha):
            raise InvalidParameter("alpha must be a finite nonnegative real")

    def residual(self, x):
        """T x - f."""
        return self.operator.apply(x) - self.data

    def misfit(self, x):
        r = self.residual(x)
        return 0.5 * float(r @ r)

    def misfit_gradient(self, x):
        return self.operator.apply_adjoint(self.residual(x))

    def value(self, x):
        x = as_vector(x, self.operator.domain_dim)
        return self.misfit(x) + self.alpha * self.penalty.value(x)

    def gradient(self, x):
        x = as_vector(x, self.operator.domain_dim)
        return self.misfit_gradient(x) + self.alpha * self.penalty.gradient(x)

    def with_alpha(self, alpha):
        return CostFunctional(self.operator, self.data, alpha, self.penalty)


def cost_value(F, x):
    return F.value(x)


def cost_gradient(F, x):
    return F.gradient(x)


@dataclass(frozen=True)
class SolveConfig:
    grad_tol: float = 1e-9
    max_iter: int = 50000
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    init: np.ndarray = None

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise InvalidParameter("grad_tol must be positive")
        if not 0 < self.shrink < 1:
            raise InvalidParameter("shrink factor must lie in (0, 1)")
        if not self.initial_step > 0:
            raise InvalidParameter("initial_step must be positive")
        if self.max_iter < 1:
            raise InvalidParameter("max_iter must be at least 1")

    @classmethod
    def from_settings(cls, **overrides):
        params = {
            'grad_tol': reglab_setting('GRAD_TOL'),
            'max_iter': reglab_setting('MAX_ITER'),
            'initial_step': reglab_setting('INITIAL_STEP'),
            'shrink': reglab_setting('SHRINK'),
            'sufficient_decrease': reglab_setting('SUFFICIENT_DECREASE'),
        }
        params.update(overrides)
        return cls(**params)

    def as_dict(self):
        return {
            'grad_tol': self.grad_tol,
            'max_iter': self.max_iter,
            'initial_step': self.initial_step,
            'shrink': self.shrink,
            'sufficient_decrease': self.sufficient_decrease,
        }


@dataclass(frozen=True)
class SolveResult:
    minimizer: np.ndarray
    iterations: int
    grad_norm: float
    optimality_residual: float
    objective: float
    alpha: float
    converged: bool
    restarts: int = 0
    objective_trace: tuple = field(default=(), repr=False)


def optimality_residual(F, x):
    """||T*(f - T x) - alpha grad J(x)||, the first-order condition rearranged."""
    lhs = F.operator.apply_adjoint(F.data - F.operator.apply(x))
    return float(np.linalg.norm(lhs - F.alpha * F.penalty.gradient(x)))


def _rounding_slack(value, data_norm):
    """Bound on the rounding error of an objective evaluation of size ``value``."""
    value = abs(value)
    return 64 * _EPS * (value + data_norm * math.sqrt(2.0 * value))


def _step_accepted(y, fy, gy, candidate, fc, gc, step, cfg, data_norm, adjoint_data_norm):
    """
    Backtracking test for a trial step from ``y``.

    The gradient may change by at most ||candidate - y|| / step, so the step
    never exceeds the inverse local Lipschitz constant of grad F. The Armijo
    decrease is required on top of that; it is waived only by the rounding
    error of the two objective evaluations, which near the minimizer swamps
    the true decrease.
    """
    moved = float(np.linalg.norm(candidate - y))
    grad_change = float(np.linalg.norm(gc - gy))
    grad_noise = 8 * _EPS * (adjoint_data_norm + float(np.linalg.norm(gy)) + float(np.linalg.norm(gc)))
    if step * grad_change > moved + step * grad_noise:
        return False
    decrease = fy - fc
    wanted = cfg.sufficient_decrease * step * float(gy @ gy)
    if decrease >= wanted:
        return True
    return decrease >= -_rounding_slack(fy, data_norm) and wanted <= 2 * _rounding_slack(fy, data_norm)


def solve(F, cfg=None):
    """
    Minimize F with Nesterov-accelerated gradient descent.

    Each step backtracks from the extrapolated point until the local
    Lipschitz estimate of grad F is at most 1/step and the Armijo condition
    holds. When a step would raise the objective above the last accepted
    iterate the momentum is dropped and the step is retaken from that
    iterate, so accepted objectives increase by at most evaluation rounding;
    momentum is also reset when the accepted step points uphill. Stops once
    ||grad F|| <= grad_tol.
    """
    cfg = cfg or SolveConfig.from_settings()
    n = F.operator.domain_dim
    x = np.zeros(n) if cfg.init is None else as_vector(cfg.init, n, 'init').copy()
    data_norm = float(np.linalg.norm(F.data))
    adjoint_data_norm = float(np.linalg.norm(F.operator.apply_adjoint(F.data)))

    fx = _safe_value(F, x)
    if not math.isfinite(fx):
        raise SolverDivergence("objective is not finite at the initial point")
    gx = F.gradient(x)
    y, fy, gy = x, fx, gx
    t = 1.0
    step = cfg.initial_step
    restarts = 0
    trace = [fx]
    grad_norm = float(np.linalg.norm(gx))
    iteration = 0

    while grad_norm > cfg.grad_tol and iteration < cfg.max_iter:
        iteration += 1
        while True:
            candidate = y - step * gy
            fc = _safe_value(F, candidate)
            if math.isfinite(fc):
                gc = F.gradient(candidate)
                if _step_accepted(y, fy, gy, candidate, fc, gc, step, cfg, data_norm, adjoint_data_norm):
                    break
            step *= cfg.shrink
            if step < 1e-300:
                raise SolverDivergence(
                    f"line search underflowed the step at iteration {iteration} "
                    f"(last finite objective {fx:.6g}, |grad|={grad_norm:.3g})"
                )

        if y is not x and fc > fx + _rounding_slack(fx, data_norm):
            logger.debug("restart at iteration %d (objective %.6g > %.6g)", iteration, fc, fx)
            restarts += 1
            y, fy, gy = x, fx, gx
            t = 1.0
            continue

        x_prev = x
        x, fx, gx = candidate, fc, gc
        grad_norm = float(np.linalg.norm(gx))
        trace.append(fx)

        if float(gy @ (x - x_prev)) > 0.0:
            restarts += 1
            t = 1.0
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        momentum = (t - 1.0) / t_next
        t = t_next
        if momentum == 0.0:
            y, fy, gy = x, fx, gx
            continue
        y = x + momentum * (x - x_prev)
        fy = _safe_value(F, y)
        if math.isfinite(fy):
            gy = F.gradient(y)
        else:
            y, fy, gy = x, fx, gx
            t = 1.0

    converged = grad_norm <= cfg.grad_tol
    if converged:
        logger.info("converged in %d iterations (|grad|=%.3g, %d restarts)", iteration, grad_norm, restarts)
    else:
        logger.warning("no convergence after %d iterations (|grad|=%.3g)", iteration, grad_norm)
    return SolveResult(
        minimizer=x,
        iterations=iteration,
        grad_norm=grad_norm,
        optimality_residual=optimality_residual(F, x),
        objective=fx,
        alpha=F.alpha,
        converged=converged,
        restarts=restarts,
        objective_trace=tuple(trace),
    )


def _safe_value(F, x):
    if not np.all(np.isfinite(x)):
        return math.inf
    with np.errstate(over='ignore', invalid='ignore'):
        value = F.value(x)
    return value if math.isfinite(value) else math.inf


def closed_form_tikhonov(op, data, alpha):
    """Solve (T*T + alpha I) phi = T* f by direct elimination."""
    if alpha <= 0:
        raise InvalidParameter("alpha must be positive")
    data = as_vector(data, op.range_dim, 'data')
    if op.kind == 'diagonal':
        return op.sigma * data / (op.sigma ** 2 + alpha)
    if op.domain_dim > 512:
        raise InvalidParameter("closed-form oracle is limited to dimension 512")
    A = op.as_matrix()
    return np.linalg.solve(A.T @ A + alpha * np.eye(op.domain_dim), A.T @ data)
