"""
Regularization-parameter rules, discrepancy-principle admissibility and the
inequality checks that accompany the convergence-rate bounds.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .conf import reglab_setting
from .exceptions import BracketingError, HessianLipschitzZero, InvalidParameter, PreconditionError, SolverDivergence
from .operators import as_vector
from .variational import CostFunctional, SolveConfig, solve

logger = logging.getLogger(__name__)

RULES = ('sqrt', 'power', 'hessian-sqrt')

LEMMA_SLACK = 1e-10


def _check_delta(delta):
    if not (delta > 0 and math.isfinite(delta)):
        raise InvalidParameter(f"delta must be a positive real, got {delta!r}")


def alpha_sqrt_rule(delta, tau, opnorm):
    """alpha(delta) = sqrt(delta) (tau + 1) ||T*||."""
    _check_delta(delta)
    if tau < 1:
        raise InvalidParameter(f"tau must be at least 1, got {tau!r}")
    if opnorm <= 0:
        raise InvalidParameter("operator norm must be positive")
    return math.sqrt(delta) * (tau + 1.0) * opnorm


def alpha_power_rule(delta, p):
    """alpha(delta) = delta**p for p in (0, 2)."""
    _check_delta(delta)
    if not 0 < p < 2:
        raise InvalidParameter(f"p must lie in (0, 2), got {p!r}")
    return delta ** p


def tau_of_hessian_lipschitz(lh, opnorm):
    """tau(L_H) = (1 + ||T*||^2 / L_H)^(1/2)."""
    if lh < 0:
        raise InvalidParameter("L_H must be nonnegative")
    if lh == 0:
        raise HessianLipschitzZero("tau(L_H) is undefined for L_H = 0; supply a fixed tau instead")
    return math.sqrt(1.0 + opnorm ** 2 / lh)


@dataclass(frozen=True)
class SqrtRule:
    tau: float
    opnorm: float
    kind = 'sqrt'
    sqrt_scaled = True

    def __post_init__(self):
        if self.tau < 1:
            raise InvalidParameter(f"tau must be at least 1, got {self.tau!r}")

    @property
    def admissibility_tau(self):
        return self.tau

    def alpha(self, delta):
        return alpha_sqrt_rule(delta, self.tau, self.opnorm)

    def as_dict(self):
        return {'kind': self.kind, 'tau': self.tau, 'opnorm': self.opnorm}


@dataclass(frozen=True)
class PowerRule:
    p: float
    opnorm: float = 1.0
    tau: float = 1.0
    kind = 'power'
    sqrt_scaled = False

    def __post_init__(self):
        if not 0 < self.p < 2:
            raise InvalidParameter(f"p must lie in (0, 2), got {self.p!r}")

    @property
    def admissibility_tau(self):
        return self.tau

    def alpha(self, delta):
        return alpha_power_rule(delta, self.p)

    def as_dict(self):
        return {'kind': self.kind, 'p': self.p, 'tau': self.tau, 'opnorm': self.opnorm}


@dataclass(frozen=True)
class HessianAwareSqrtRule:
    lh: float
    opnorm: float
    kind = 'hessian-sqrt'
    sqrt_scaled = True

    @property
    def tau(self):
        return tau_of_hessian_lipschitz(self.lh, self.opnorm)

    @property
    def admissibility_tau(self):
        return self.tau

    def alpha(self, delta):
        return alpha_sqrt_rule(delta, self.tau, self.opnorm)

    def as_dict(self):
        return {'kind': self.kind, 'lh': self.lh, 'tau': self.tau, 'opnorm': self.opnorm}


def make_rule(kind, opnorm, tau=1.0, p=1.0, lh=None):
    if kind == 'sqrt':
        return SqrtRule(tau=tau, opnorm=opnorm)
    if kind == 'power':
        return PowerRule(p=p, opnorm=opnorm, tau=tau)
    if kind == 'hessian-sqrt':
        if lh is None:
            raise InvalidParameter("the hessian-sqrt rule needs the Hessian-Lipschitz constant")
        return HessianAwareSqrtRule(lh=lh, opnorm=opnorm)
    raise InvalidParameter(f"unknown rule '{kind}', choose one of {', '.join(RULES)}")


@dataclass(frozen=True)
class AdmissibilityRecord:
    alpha: float
    discrepancy: float
    bound: float
    admissible: bool
    slack: float = 0.0


def _discrepancy(op, data, phi):
    return float(np.linalg.norm(op.apply(phi) - data))


def solver_slack(op, result, convexity_modulus=0.0):
    """
    Bound on ||T(phi - phi_exact)|| implied by the gradient certificate:
    ||T|| * grad_norm / m, m = sigma_min(T)^2 + 2 alpha c*.
    """
    modulus = op.smallest_singular_value ** 2 + 2.0 * result.alpha * convexity_modulus
    if modulus <= 0.0:
        return 0.0
    return float(op.singular_values[0]) * result.grad_norm / modulus


def check_admissible(op, data, result, tau, delta, convexity_modulus=0.0):
    """Does ||T phi_alpha - f|| <= tau delta hold (up to the solver slack)?"""
    data = as_vector(data, op.range_dim, 'data')
    discrepancy = _discrepancy(op, data, result.minimizer)
    bound = tau * delta
    slack = solver_slack(op, result, convexity_modulus)
    return AdmissibilityRecord(
        alpha=result.alpha,
        discrepancy=discrepancy,
        bound=bound,
        admissible=discrepancy <= bound + slack,
        slack=slack,
    )


@dataclass(frozen=True)
class DiscrepancySearchOutcome:
    alpha: float
    record: AdmissibilityRecord
    result: object
    steps: int
    monotone: bool
    evaluations: tuple = field(default=(), repr=False)


def discrepancy_search(op, data, penalty, tau, delta, alpha_range=(1e-6, 1e2), bisect_tol=None,
                       cfg=None, max_steps=None):
    """
    Bisection on log(alpha) for the largest admissible alpha.

    Requires discrepancy(alpha_lo) <= tau delta; when alpha_hi is already
    admissible it is returned directly. Solves are warm-started from the
    nearest admissible iterate. Monotonicity of the discrepancy in alpha is
    checked on the evaluated points and reported, not assumed.
    """
    if not delta > 0:
        raise BracketingError("delta must be positive to bracket the discrepancy", math.nan, math.nan, 0.0)
    bisect_tol = reglab_setting('BISECT_TOL') if bisect_tol is None else bisect_tol
    max_steps = reglab_setting('BISECT_MAX_STEPS') if max_steps is None else max_steps
    cfg = cfg or SolveConfig.from_settings()
    alpha_lo, alpha_hi = alpha_range
    if not 0 < alpha_lo < alpha_hi:
        raise InvalidParameter("alpha_range must satisfy 0 < alpha_lo < alpha_hi")
    data = as_vector(data, op.range_dim, 'data')
    modulus = getattr(penalty, 'convexity_modulus', 0.0)
    evaluations = []

    def evaluate(alpha, init=None):
        F = CostFunctional(op, data, alpha, penalty)
        result = solve(F, SolveConfig(
            grad_tol=cfg.grad_tol, max_iter=cfg.max_iter, initial_step=cfg.initial_step,
            shrink=cfg.shrink, sufficient_decrease=cfg.sufficient_decrease, init=init,
        ))
        if not result.converged:
            logger.warning("solve at alpha=%.6g stopped after %d iterations with |grad|=%.3g",
                           alpha, result.iterations, result.grad_norm)
            raise SolverDivergence(
                f"solver did not converge at alpha={alpha:.6g} during the discrepancy search "
                f"(|grad|={result.grad_norm:.3g})"
            )
        record = check_admissible(op, data, result, tau, delta, modulus)
        evaluations.append((alpha, record.discrepancy))
        return result, record

    hi_result, hi_record = evaluate(alpha_hi)
    if hi_record.admissible:
        return DiscrepancySearchOutcome(alpha_hi, hi_record, hi_result, 0, True, tuple(evaluations))
    lo_result, lo_record = evaluate(alpha_lo, init=hi_result.minimizer)
    if not lo_record.admissible:
        raise BracketingError(
            "no admissible alpha in the bracket", lo_record.discrepancy, hi_record.discrepancy, tau * delta,
        )

    steps = 0
    log_lo, log_hi = math.log(alpha_lo), math.log(alpha_hi)
    while steps < max_steps and log_hi - log_lo > math.log1p(bisect_tol):
        steps += 1
        mid = math.exp(0.5 * (log_lo + log_hi))
        result, record = evaluate(mid, init=lo_result.minimizer)
        if record.admissible:
            log_lo, lo_result, lo_record = math.log(mid), result, record
        else:
            log_hi = math.log(mid)

    ordered = sorted(evaluations)
    monotone = all(b[1] >= a[1] * (1 - 1e-9) - 1e-12 for a, b in zip(ordered, ordered[1:]))
    if not monotone:
        logger.warning("discrepancy was not monotone in alpha over the evaluated points")
    return DiscrepancySearchOutcome(lo_record.alpha, lo_record, lo_result, steps, monotone, tuple(evaluations))


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool
    extra: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.rhs - self.lhs


def _minimizer(result):
    return result.minimizer if hasattr(result, 'minimizer') else as_vector(result)


def residual_bound_check(op, result, phi_true, data, delta, opnorm):
    """||T phi_alpha - f|| <= delta + ||phi_alpha - phi_true|| ||T*||."""
    phi_alpha = _minimizer(result)
    phi_true = as_vector(phi_true, op.domain_dim, 'phi_true')
    data = as_vector(data, op.range_dim, 'data')
    data_true = op.apply(phi_true)
    noise = float(np.linalg.norm(data - data_true))
    # f_delta and T phi_true each carry a few ulps per entry
    rounding = 64 * float(np.finfo(float).eps) * math.sqrt(op.range_dim) * (
        float(np.linalg.norm(data)) + float(np.linalg.norm(data_true))
    )
    if noise > delta * (1 + 1e-12) + rounding:
        raise PreconditionError(
            f"||f - T phi_true|| = {noise:.6g} exceeds the declared noise level delta = {delta:.6g}"
        )
    lhs = _discrepancy(op, data, phi_alpha)
    rhs = delta + float(np.linalg.norm(phi_alpha - phi_true)) * opnorm
    return InequalityCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs + LEMMA_SLACK)


def weak_convergence_check(F, result, phi_true, delta):
    """
    alpha (J(phi_alpha) - J(phi_true)) <= 1/2 delta^2.

    Follows from F(phi_alpha) <= F(phi_true); for an inexact minimizer the
    convexity bound F(phi_alpha) - F(phi_true) <= ||grad F(phi_alpha)|| ||phi_alpha - phi_true||
    is added as slack. The sharper intermediate bound
    1/2||T phi_true - f||^2 - 1/2||T phi_alpha - f||^2 is reported as well.
    """
    phi_alpha = _minimizer(result)
    phi_true = as_vector(phi_true, F.operator.domain_dim, 'phi_true')
    lhs = F.alpha * (F.penalty.value(phi_alpha) - F.penalty.value(phi_true))
    rhs = 0.5 * delta ** 2
    grad_norm = float(np.linalg.norm(F.gradient(phi_alpha)))
    slack = grad_norm * float(np.linalg.norm(phi_alpha - phi_true))
    slack += 64 * float(np.finfo(float).eps) * (abs(F.value(phi_alpha)) + abs(F.value(phi_true)))
    intermediate = F.misfit(phi_true) - F.misfit(phi_alpha)
    return InequalityCheck(
        lhs=lhs, rhs=rhs, holds=lhs <= rhs + slack,
        extra={'intermediate_rhs': intermediate, 'slack': slack},
    )


@dataclass(frozen=True)
class HessianDiscrepancyReport:
    lhs: float
    main_term: float
    remainder: float
    tau: float
    holds: bool

    @property
    def bound(self):
        return self.main_term + self.remainder

    @property
    def slack(self):
        return self.bound - self.lhs


def hessian_discrepancy_diagnostic(F, result, phi_true, delta, lh_of_f, opnorm):
    """
    ||T phi_alpha - f|| <= delta tau(L_H) + sqrt(2 L_H ||phi_alpha - phi_true||^2),

    with L_H the Hessian-Lipschitz constant of F_alpha (alpha times that of
    J; the misfit Hessian is constant). The square-root term instantiates the
    unquantified higher-order remainder as L_H||e||^2 + L_H||e||^2.
    """
    tau = tau_of_hessian_lipschitz(lh_of_f, opnorm)
    phi_alpha = _minimizer(result)
    phi_true = as_vector(phi_true, F.operator.domain_dim, 'phi_true')
    lhs = float(np.linalg.norm(F.residual(phi_alpha)))
    error_sq = float((phi_alpha - phi_true) @ (phi_alpha - phi_true))
    main_term = delta * tau
    remainder = math.sqrt(2.0 * lh_of_f * error_sq)
    return HessianDiscrepancyReport(
        lhs=lhs, main_term=main_term, remainder=remainder, tau=tau,
        holds=lhs <= main_term + remainder + LEMMA_SLACK,
    )
