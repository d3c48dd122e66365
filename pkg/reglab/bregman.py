"""
Bregman divergences of the penalty, the misfit and the cost functional.

For a smooth convex functional Phi,

    D_Phi(u, v) = Phi(u) - Phi(v) - <grad Phi(v), u - v>,
    D_Phi^sym(u, v) = D_Phi(u, v) + D_Phi(v, u) = <grad Phi(u) - grad Phi(v), u - v>.

``value`` / ``gradient`` arguments are plain callables, so penalties,
cost functionals and ad-hoc functionals are all accepted.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConsistencyError, DimensionMismatch, InsufficientData
from .operators import as_vector

logger = logging.getLogger(__name__)

SYM_TOLERANCE = 1e-9
MISFIT_TOLERANCE = 1e-10


def _pair(u, v):
    u = as_vector(u, name='u')
    v = as_vector(v, u.size, 'v')
    return u, v


def bregman(value, gradient, u, v):
    u, v = _pair(u, v)
    return float(value(u) - value(v) - gradient(v) @ (u - v))


def bregman_sym(value, gradient, u, v):
    """
    Symmetric divergence, computed both as the sum of the two directional
    divergences and as the gradient inner product; the latter is returned.
    """
    u, v = _pair(u, v)
    as_sum = bregman(value, gradient, u, v) + bregman(value, gradient, v, u)
    as_inner = float((gradient(u) - gradient(v)) @ (u - v))
    scale = max(1.0, abs(value(u)), abs(value(v)))
    if abs(as_sum - as_inner) > SYM_TOLERANCE * scale:
        raise ConsistencyError(
            f"symmetric Bregman formulations disagree: sum={as_sum!r}, inner product={as_inner!r}"
        )
    return as_inner


def _misfit(op, data):
    def value(x):
        r = op.apply(x) - data
        return 0.5 * float(r @ r)

    def gradient(x):
        return op.apply_adjoint(op.apply(x) - data)

    return value, gradient


def bregman_misfit(op, data, u, v):
    """
    D_G for G(x) = 1/2||T x - f||^2 by the three-term formula.

    For linear T this equals 1/2||T(u - v)||^2 independently of f; the
    two are cross-checked.
    """
    u, v = _pair(u, v)
    if u.size != op.domain_dim:
        raise DimensionMismatch(f"u has dimension {u.size}, expected {op.domain_dim}")
    data = as_vector(data, op.range_dim, 'data')
    value, gradient = _misfit(op, data)
    three_term = bregman(value, gradient, u, v)
    Td = op.apply(u - v)
    closed_form = 0.5 * float(Td @ Td)
    scale = max(1.0, value(u), value(v))
    if abs(three_term - closed_form) > MISFIT_TOLERANCE * scale:
        raise ConsistencyError(
            f"misfit Bregman divergence {three_term!r} differs from 1/2||T(u-v)||^2 = {closed_form!r}"
        )
    return three_term


def bregman_misfit_sym(op, u, v):
    """<grad G(u) - grad G(v), u - v> = ||T(u - v)||^2 for linear T."""
    u, v = _pair(u, v)
    d = u - v
    return float(op.apply_adjoint(op.apply(d)) @ d)


def bregman_cost(F, u, v):
    return bregman(F.value, F.gradient, u, v)


def sym_identity_check(F, result, phi_true):
    """
    Residual of alpha D_J^sym(phi_alpha, phi_true) = D_G^sym(phi_alpha, phi_true).

    The identity presumes the penalty gradients are expressed through the
    misfit: alpha grad J(phi_alpha) by the first-order condition, with the
    descent sign, and the phi_true term by grad G(phi_true) = T*(f_true - f).
    The penalty side therefore keeps the computed grad J(phi_alpha), so the
    residual equals |<grad F(phi_alpha), phi_alpha - phi_true>| / (1 + |D_G^sym|)
    and vanishes only at a stationary point.
    """
    phi_alpha = result.minimizer if hasattr(result, 'minimizer') else as_vector(result)
    phi_alpha, phi_true = _pair(phi_alpha, phi_true)
    d = phi_alpha - phi_true
    misfit_grad_true = F.misfit_gradient(phi_true)
    misfit_side = float((F.misfit_gradient(phi_alpha) - misfit_grad_true) @ d)
    penalty_side = float((-F.alpha * F.penalty.gradient(phi_alpha) - misfit_grad_true) @ d)
    return abs(penalty_side - misfit_side) / (1.0 + abs(misfit_side))


def q_convexity_estimate(value, gradient, samples):
    """Smallest ratio D_Phi(u, v) / ||u - v||^2 over the sample pairs (q = 2)."""
    ratios = []
    for u, v in samples:
        u, v = _pair(u, v)
        dist_sq = float((u - v) @ (u - v))
        if dist_sq == 0.0:
            continue
        ratios.append(bregman(value, gradient, u, v) / dist_sq)
    if not ratios:
        raise InsufficientData("every sample pair had u == v; no convexity ratio could be formed")
    return max(0.0, min(ratios))


def strong_convexity_lower_bound(modulus, hessian_lipschitz, u, v):
    """
    Third-order Taylor lower bound on D_Phi(u, v) when grad^2 Phi >= modulus * I
    along the segment: modulus/2 ||u-v||^2 - L_H/6 ||u-v||^3.
    """
    u, v = _pair(u, v)
    dist = float(np.linalg.norm(u - v))
    return 0.5 * modulus * dist ** 2 - hessian_lipschitz / 6.0 * dist ** 3


@dataclass(frozen=True)
class MisfitConvexityEstimate:
    c_lower: float
    holds_2convex: bool


def misfit_convexity(op):
    """c = 1/2 sigma_min(T)^2, so that D_G(u, v) = 1/2||T(u-v)||^2 >= c||u-v||^2."""
    c_lower = 0.5 * op.smallest_singular_value ** 2
    return MisfitConvexityEstimate(c_lower=c_lower, holds_2convex=c_lower > 0.0)


@dataclass(frozen=True)
class BregmanReport:
    d_j: float
    d_j_sym: float
    d_g: float
    d_f: float
    sym_identity_residual: float
    at: tuple
    alpha: float

    @property
    def d_f_decomposition_residual(self):
        """|D_F - (D_G + alpha D_J)|; zero up to rounding since D is linear in Phi."""
        return abs(self.d_f - (self.d_g + self.alpha * self.d_j))

    def as_row(self):
        return {
            'd_j': self.d_j,
            'd_j_sym': self.d_j_sym,
            'd_g': self.d_g,
            'd_f': self.d_f,
            'sym_residual': self.sym_identity_residual,
        }


def bregman_report(F, result, phi_true):
    """All divergences between the regularized solution and the true solution."""
    phi_alpha = result.minimizer if hasattr(result, 'minimizer') else as_vector(result)
    phi_alpha, phi_true = _pair(phi_alpha, phi_true)
    penalty = F.penalty
    d_j = bregman(penalty.value, penalty.gradient, phi_alpha, phi_true)
    d_j_sym = bregman_sym(penalty.value, penalty.gradient, phi_alpha, phi_true)
    d_g = bregman_misfit(F.operator, F.data, phi_alpha, phi_true)
    d_f = bregman_cost(F, phi_alpha, phi_true)
    residual = sym_identity_check(F, phi_alpha, phi_true)
    report = BregmanReport(
        d_j=d_j, d_j_sym=d_j_sym, d_g=d_g, d_f=d_f,
        sym_identity_residual=residual, at=(phi_alpha, phi_true), alpha=F.alpha,
    )
    logger.debug("Bregman report: %s", report.as_row())
    return report
