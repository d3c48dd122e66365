"""
Smooth convex penalties J and their smoothness and convexity constants.

Every catalog penalty is separable, vanishes at the origin and carries a
strong-convexity term (mu/2)||x||^2, so its 2-convexity modulus is
c* = mu/2. Constants that only hold on a ball carry the radius they were
certified for.
"""
import math
from dataclasses import dataclass

import numpy as np

from .conf import reglab_setting
from .exceptions import InvalidParameter, NoGlobalConstant
from .operators import as_vector

CATALOG = ('quadratic', 'pseudo-huber-strong', 'quartic-strong')

GLOBAL = 'global'

# max_s |s| (1 + s^2)^(-5/2) is attained at s = 1/2
_PSEUDO_HUBER_THIRD_DERIVATIVE_PEAK = 0.5 * 1.25 ** -2.5


class Penalty:
    """Base class; subclasses define the separable pieces and the constants."""

    name = None
    smoothness_class = 2
    grad_lipschitz = None
    hessian_lipschitz = None
    convexity_modulus = 0.0
    radius = None

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"

    def value(self, x):
        return self._value(as_vector(x))

    def gradient(self, x):
        return self._gradient(as_vector(x))

    def hessian_vec(self, x, w):
        x = as_vector(x)
        return self._hessian_diagonal(x) * as_vector(w, x.size, 'w')

    def hessian_diagonal(self, x):
        return self._hessian_diagonal(as_vector(x))

    def _value(self, x):
        raise NotImplementedError

    def _gradient(self, x):
        raise NotImplementedError

    def _hessian_diagonal(self, x):
        raise NotImplementedError


class QuadraticPenalty(Penalty):
    """J(x) = 1/2 ||x||^2."""

    name = 'quadratic'
    grad_lipschitz = 1.0
    hessian_lipschitz = 0.0
    convexity_modulus = 0.5

    def _value(self, x):
        return 0.5 * float(x @ x)

    def _gradient(self, x):
        return x.copy()

    def _hessian_diagonal(self, x):
        return np.ones_like(x)


class PseudoHuberPenalty(Penalty):
    """
    J(x) = (mu/2)||x||^2 + sum_i eps^2 (sqrt(1 + (x_i/eps)^2) - 1).

    A smooth surrogate for total-variation-like penalties. The pseudo-Huber
    part has second derivative (1 + s^2)^(-3/2) <= 1 and third derivative
    -(3/eps) s (1 + s^2)^(-5/2), s = x/eps.
    """

    name = 'pseudo-huber-strong'

    def __init__(self, mu, eps):
        if mu <= 0 or eps <= 0:
            raise InvalidParameter("pseudo-huber-strong needs mu > 0 and eps > 0")
        self.mu = float(mu)
        self.eps = float(eps)
        self.convexity_modulus = self.mu / 2
        self.grad_lipschitz = self.mu + 1.0
        self.hessian_lipschitz = 3.0 / self.eps * _PSEUDO_HUBER_THIRD_DERIVATIVE_PEAK

    def _value(self, x):
        s2 = (x / self.eps) ** 2
        # sqrt(1 + s^2) - 1 without cancellation for small s
        smoothed = s2 / (np.sqrt(1.0 + s2) + 1.0)
        return 0.5 * self.mu * float(x @ x) + self.eps ** 2 * float(np.sum(smoothed))

    def _gradient(self, x):
        s = x / self.eps
        return self.mu * x + x / np.sqrt(1.0 + s * s)

    def _hessian_diagonal(self, x):
        s = x / self.eps
        return self.mu + (1.0 + s * s) ** -1.5


class QuarticPenalty(Penalty):
    """
    J(x) = (mu/2)||x||^2 + 1/4 sum_i x_i^4.

    Neither the gradient nor the Hessian is globally Lipschitz; both
    constants are certified on the Euclidean ball of ``radius``.
    """

    name = 'quartic-strong'

    def __init__(self, mu, radius):
        if mu <= 0 or radius <= 0:
            raise InvalidParameter("quartic-strong needs mu > 0 and radius > 0")
        self.mu = float(mu)
        self.radius = float(radius)
        self.convexity_modulus = self.mu / 2
        self.grad_lipschitz = self.mu + 3.0 * self.radius ** 2
        self.hessian_lipschitz = 6.0 * self.radius

    def _value(self, x):
        return 0.5 * self.mu * float(x @ x) + 0.25 * float(np.sum(x ** 4))

    def _gradient(self, x):
        return self.mu * x + x ** 3

    def _hessian_diagonal(self, x):
        return self.mu + 3.0 * x * x


@dataclass(frozen=True)
class PenaltyCatalogEntry:
    name: str
    mu: float = 1.0
    eps: float = 0.1
    radius: float = None

    def __post_init__(self):
        if self.name not in CATALOG:
            raise InvalidParameter(f"unknown penalty '{self.name}', choose one of {', '.join(CATALOG)}")
        if self.mu <= 0:
            raise InvalidParameter("mu must be positive")
        if self.eps <= 0:
            raise InvalidParameter("eps must be positive")

    @classmethod
    def from_settings(cls, name, **overrides):
        params = {
            'mu': reglab_setting('DEFAULT_MU'),
            'eps': reglab_setting('DEFAULT_EPS'),
            'radius': reglab_setting('QUARTIC_RADIUS') if name == 'quartic-strong' else None,
        }
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(name=name, **params)

    def build(self):
        if self.name == 'quadratic':
            return QuadraticPenalty()
        if self.name == 'pseudo-huber-strong':
            return PseudoHuberPenalty(self.mu, self.eps)
        radius = self.radius if self.radius is not None else reglab_setting('QUARTIC_RADIUS')
        return QuarticPenalty(self.mu, radius)

    def as_dict(self):
        return {'name': self.name, 'mu': self.mu, 'eps': self.eps, 'radius': self.radius}


def penalty_value(p, x):
    return p.value(x)


def penalty_gradient(p, x):
    return p.gradient(x)


def hessian_lipschitz_constant(entry, radius=GLOBAL):
    """Certified Hessian-Lipschitz constant, globally or on the ball of ``radius``."""
    if entry.name == 'quadratic':
        return 0.0
    if entry.name == 'pseudo-huber-strong':
        return 3.0 / entry.eps * _PSEUDO_HUBER_THIRD_DERIVATIVE_PEAK
    if radius == GLOBAL:
        raise NoGlobalConstant("quartic-strong has no global Hessian-Lipschitz constant; pass a radius")
    if not (isinstance(radius, (int, float)) and math.isfinite(radius) and radius > 0):
        raise InvalidParameter("radius must be a positive real or 'global'")
    return 6.0 * float(radius)
