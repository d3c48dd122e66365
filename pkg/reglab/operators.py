"""
Finite-dimensional forward operators.

The Hilbert space is R^n with the Euclidean inner product; vectors are
one-dimensional float64 numpy arrays. Every operator is immutable after
construction and exposes ``apply`` / ``apply_adjoint`` with an exact
adjoint pairing.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .conf import reglab_setting
from .exceptions import DimensionMismatch, InvalidParameter, NonFiniteValue

logger = logging.getLogger(__name__)


def as_vector(x, dim=None, name='x'):
    """Return ``x`` as a finite float64 vector, checking its dimension."""
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim == 0:
        vec = vec.reshape(1)
    if vec.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {vec.shape}")
    if dim is not None and vec.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dimension {vec.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(vec)):
        raise NonFiniteValue(f"{name} contains NaN or infinite entries")
    return vec


class ForwardOperator:
    """Linear, injective forward operator T: R^domain_dim -> R^range_dim."""

    kind = None

    def __init__(self, domain_dim, range_dim):
        self.domain_dim = int(domain_dim)
        self.range_dim = int(range_dim)

    def __repr__(self):
        return f"{type(self).__name__}({self.range_dim}x{self.domain_dim})"

    def apply(self, x):
        return self._apply(as_vector(x, self.domain_dim, 'x'))

    def apply_adjoint(self, y):
        return self._apply_adjoint(as_vector(y, self.range_dim, 'y'))

    def _apply(self, x):
        raise NotImplementedError

    def _apply_adjoint(self, y):
        raise NotImplementedError

    def as_matrix(self):
        """Dense matrix of the operator, built column by column."""
        eye = np.eye(self.domain_dim)
        return np.column_stack([self._apply(eye[:, j]) for j in range(self.domain_dim)])

    @cached_property
    def singular_values(self):
        return np.linalg.svd(self.as_matrix(), compute_uv=False)

    @property
    def smallest_singular_value(self):
        return float(self.singular_values[-1]) if self.domain_dim <= self.range_dim else 0.0


class DiagonalOperator(ForwardOperator):
    kind = 'diagonal'

    def __init__(self, singular_values):
        sigma = as_vector(singular_values, name='singular_values')
        if np.any(sigma <= 0):
            raise InvalidParameter("diagonal singular values must be strictly positive")
        if np.any(np.diff(sigma) > 0):
            raise InvalidParameter("diagonal singular values must be nonincreasing")
        super().__init__(sigma.size, sigma.size)
        self.sigma = sigma
        self.sigma.setflags(write=False)

    def _apply(self, x):
        return self.sigma * x

    def _apply_adjoint(self, y):
        return self.sigma * y

    def as_matrix(self):
        return np.diag(self.sigma)

    @cached_property
    def singular_values(self):
        return self.sigma.copy()


class DenseOperator(ForwardOperator):
    kind = 'dense'

    def __init__(self, matrix):
        mat = np.array(matrix, dtype=np.float64)
        if mat.ndim != 2:
            raise DimensionMismatch(f"matrix must be two-dimensional, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise NonFiniteValue("matrix contains NaN or infinite entries")
        super().__init__(mat.shape[1], mat.shape[0])
        self.matrix = mat
        self.matrix.setflags(write=False)

    def _apply(self, x):
        return self.matrix @ x

    def _apply_adjoint(self, y):
        return self.matrix.T @ y

    def as_matrix(self):
        return self.matrix.copy()


class ConvolutionOperator(ForwardOperator):
    """
    Discrete convolution with zero-padded boundaries.

    The output has the length of the input and is the centred window of the
    full convolution; the adjoint is the correlation with the same kernel.
    """

    kind = 'convolution'

    def __init__(self, kernel, n):
        k = as_vector(kernel, name='kernel')
        if k.size > 2 * n - 1:
            raise InvalidParameter(f"kernel of length {k.size} is too long for n={n}")
        super().__init__(n, n)
        self.kernel = k
        self.kernel.setflags(write=False)
        self._offset = (k.size - 1) // 2

    def _apply(self, x):
        full = np.convolve(x, self.kernel, mode='full')
        return full[self._offset:self._offset + self.domain_dim]

    def _apply_adjoint(self, y):
        padded = np.zeros(self.domain_dim + self.kernel.size - 1)
        padded[self._offset:self._offset + self.range_dim] = y
        return np.correlate(padded, self.kernel, mode='valid')


def identity_operator(n):
    return DiagonalOperator(np.ones(n))


@dataclass(frozen=True)
class OperatorNormEstimate:
    value: float
    iterations: int
    residual: float
    converged: bool

    @property
    def upper(self):
        return self.value + self.residual


def apply(op, x):
    return op.apply(x)


def apply_adjoint(op, y):
    return op.apply_adjoint(y)


def _rayleigh_gap(op, v):
    """
    ||T*T v - theta v|| / (2 sqrt(theta)) for the unit vector v, theta = ||T v||^2.

    Bounds the distance from sqrt(theta) to a singular value of T, which
    stays honest when a clustered spectrum stalls the successive differences.
    """
    tv = op._apply(v)
    theta = float(tv @ tv)
    if theta == 0.0:
        return 0.0
    return float(np.linalg.norm(op._apply_adjoint(tv) - theta * v)) / (2.0 * math.sqrt(theta))


def operator_norm(op, tol=None, max_iter=None, seed=0):
    """
    Spectral norm of ``op`` (equal to that of its adjoint) by power iteration on T*T.

    The estimate is ||T v|| for the current unit iterate v, i.e. the square
    root of the Rayleigh quotient of T*T. Iteration stops once successive
    estimates differ by at most ``tol``; otherwise the best estimate is
    returned with ``converged=False``. The reported residual is the larger
    of the last successive difference and the Rayleigh residual of v, so
    ``upper`` covers leading singular values too close to separate.
    """
    tol = reglab_setting('NORM_TOL') if tol is None else tol
    max_iter = reglab_setting('NORM_MAX_ITER') if max_iter is None else max_iter
    if tol <= 0:
        raise InvalidParameter("tol must be positive")

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.domain_dim)
    v /= np.linalg.norm(v)
    value = float(np.linalg.norm(op._apply(v)))
    difference = np.inf
    for iteration in range(1, max_iter + 1):
        w = op._apply_adjoint(op._apply(v))
        w_norm = np.linalg.norm(w)
        if w_norm == 0.0:
            # v lies in the null space; T is assumed injective so this only
            # happens for the zero operator
            return OperatorNormEstimate(0.0, iteration, 0.0, True)
        v = w / w_norm
        new_value = float(np.linalg.norm(op._apply(v)))
        difference = abs(new_value - value)
        value = max(value, new_value)
        if difference <= tol:
            residual = max(difference, _rayleigh_gap(op, v))
            logger.info("operator norm %.12g after %d power iterations (residual %.3g)",
                        value, iteration, residual)
            return OperatorNormEstimate(value, iteration, residual, True)

    residual = max(float(difference), _rayleigh_gap(op, v))
    logger.warning("power iteration did not reach tol=%g in %d iterations (residual %.3g)",
                   tol, max_iter, residual)
    return OperatorNormEstimate(value, max_iter, residual, False)
