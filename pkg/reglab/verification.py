"""
Seeded invariant suites run by the ``verify`` management command.

Each suite returns a list of ``CheckOutcome``; a check either holds on every
sample or reports the first sample that broke it.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .bregman import bregman, bregman_misfit, bregman_sym, sym_identity_check
from .exceptions import InvalidParameter
from .experiments import NoiseModel, inject_noise, make_diagonal_problem
from .operators import ConvolutionOperator, DenseOperator, DiagonalOperator, operator_norm
from .penalties import PenaltyCatalogEntry, QuadraticPenalty
from .regparam import (
    PowerRule, SqrtRule, residual_bound_check, tau_of_hessian_lipschitz, weak_convergence_check,
)
from .variational import CostFunctional, SolveConfig, closed_form_tikhonov, solve

logger = logging.getLogger(__name__)

SUITES = ('bregman', 'optimality', 'lemmas')

SAMPLES = 100
SAMPLE_DIM = 8


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ''


def _catalog():
    return [
        PenaltyCatalogEntry('quadratic').build(),
        PenaltyCatalogEntry('pseudo-huber-strong', mu=1.0, eps=0.1).build(),
        PenaltyCatalogEntry('quartic-strong', mu=1.0, radius=2.0).build(),
    ]


def _ball_sample(rng, radius=1.0):
    """A point drawn inside the Euclidean ball of ``radius``."""
    x = rng.standard_normal(SAMPLE_DIM)
    return x * (radius * rng.uniform(0.0, 1.0) / np.linalg.norm(x))


def _outcome(name, failures):
    if failures:
        return CheckOutcome(name, False, failures[0])
    return CheckOutcome(name, True)


def _random_dense(rng, m, n):
    # well conditioned so oracle comparisons are not dominated by rounding
    return DenseOperator(rng.standard_normal((m, n)) / math.sqrt(m) + 2.0 * np.eye(m, n))


def _operators(rng):
    return [
        DiagonalOperator(np.arange(1, SAMPLE_DIM + 1, dtype=np.float64) ** -1.0),
        _random_dense(rng, SAMPLE_DIM, SAMPLE_DIM),
        ConvolutionOperator(np.array([0.25, 0.5, 0.25]), SAMPLE_DIM),
    ]


def _bregman_suite(rng):
    outcomes = []
    quadratic = QuadraticPenalty()
    failures = []
    for _ in range(SAMPLES):
        u, v = rng.standard_normal(SAMPLE_DIM), rng.standard_normal(SAMPLE_DIM)
        dist_sq = float((u - v) @ (u - v))
        d = bregman(quadratic.value, quadratic.gradient, u, v)
        d_sym = bregman_sym(quadratic.value, quadratic.gradient, u, v)
        if abs(d - 0.5 * dist_sq) > 1e-10 or abs(d_sym - dist_sq) > 1e-10:
            failures.append(f"quadratic divergence {d!r} / {d_sym!r} against |u-v|^2 = {dist_sq!r}")
    outcomes.append(_outcome('quadratic closed form', failures))

    failures = []
    for op in _operators(rng):
        for _ in range(SAMPLES // 4):
            u, v = rng.standard_normal(SAMPLE_DIM), rng.standard_normal(SAMPLE_DIM)
            data = rng.standard_normal(op.range_dim)
            d_g = bregman_misfit(op, data, u, v)
            Td = op.apply(u - v)
            if abs(d_g - 0.5 * float(Td @ Td)) > 1e-10:
                failures.append(f"{op!r}: D_G={d_g!r} differs from 1/2|T(u-v)|^2")
    outcomes.append(_outcome('misfit closed form', failures))

    failures = []
    for penalty in _catalog():
        for _ in range(SAMPLES):
            u, v = _ball_sample(rng, 2.0), _ball_sample(rng, 2.0)
            d = bregman(penalty.value, penalty.gradient, u, v)
            d_sym = bregman_sym(penalty.value, penalty.gradient, u, v)
            if d < -1e-12 or d_sym < -1e-12:
                failures.append(f"{penalty.name}: negative divergence {min(d, d_sym)!r}")
    outcomes.append(_outcome('nonnegativity and symmetric agreement', failures))

    failures = []
    problem = make_diagonal_problem(SAMPLE_DIM, 1.0, 'smooth', PenaltyCatalogEntry('quadratic'))
    for index in range(5):
        data = inject_noise(problem.data_true, NoiseModel(delta=1e-2, seed=int(rng.integers(1 << 31))))
        alpha = 10.0 ** -(index + 1)
        F = CostFunctional(problem.operator, data, alpha, QuadraticPenalty())
        residual = sym_identity_check(F, closed_form_tikhonov(problem.operator, data, alpha), problem.phi_true)
        if residual > 1e-8:
            failures.append(f"closed-form minimizer at alpha={alpha:g}: residual {residual:.3g}")
    huber = PenaltyCatalogEntry('pseudo-huber-strong', mu=1.0, eps=0.1).build()
    data = inject_noise(problem.data_true, NoiseModel(delta=1e-2, seed=int(rng.integers(1 << 31))))
    F = CostFunctional(problem.operator, data, 0.1, huber)
    result = solve(F, SolveConfig.from_settings(grad_tol=1e-9))
    residual = sym_identity_check(F, result, problem.phi_true)
    if residual > 1e-6:
        failures.append(f"iterative minimizer: residual {residual:.3g}")
    outcomes.append(_outcome('symmetric divergence identity', failures))
    return outcomes


def _finite_difference(value, x, h=1e-6):
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (value(x + e) - value(x - e)) / (2.0 * h)
    return grad


def _optimality_suite(rng):
    outcomes = []
    failures = []
    cfg = SolveConfig.from_settings(grad_tol=1e-11)
    for index in range(20):
        if index % 2:
            op = _random_dense(rng, SAMPLE_DIM, SAMPLE_DIM)
        else:
            op = DiagonalOperator(np.sort(rng.uniform(0.1, 1.0, SAMPLE_DIM))[::-1])
        data = rng.standard_normal(op.range_dim)
        alpha = float(rng.uniform(0.2, 1.0))
        result = solve(CostFunctional(op, data, alpha, QuadraticPenalty()), cfg)
        gap = float(np.linalg.norm(result.minimizer - closed_form_tikhonov(op, data, alpha)))
        if gap > 1e-8:
            failures.append(f"instance {index}: |solve - closed form| = {gap:.3g}")
    outcomes.append(_outcome('closed-form oracle', failures))

    failures = []
    problem = make_diagonal_problem(SAMPLE_DIM, 1.0, 'smooth')
    for penalty in _catalog():
        for alpha in (1e-2, 1e-1, 1.0):
            F = CostFunctional(problem.operator, problem.data_true, alpha, penalty)
            result = solve(F, SolveConfig.from_settings(grad_tol=1e-10))
            if not result.converged or result.optimality_residual > 1e-9:
                failures.append(f"{penalty.name} alpha={alpha:g}: residual {result.optimality_residual:.3g}")
    outcomes.append(_outcome('optimality residual', failures))

    failures = []
    for penalty in _catalog():
        for _ in range(SAMPLES):
            x = _ball_sample(rng, 1.0)
            fd = _finite_difference(penalty.value, x)
            error = float(np.linalg.norm(fd - penalty.gradient(x)))
            if error > 1e-5 * max(1.0, float(np.linalg.norm(fd))):
                failures.append(f"{penalty.name}: gradient differs from finite differences by {error:.3g}")
            u, v = _ball_sample(rng, 2.0), _ball_sample(rng, 2.0)
            if float((penalty.gradient(u) - penalty.gradient(v)) @ (u - v)) < -1e-12:
                failures.append(f"{penalty.name}: gradient is not monotone")
    outcomes.append(_outcome('gradients', failures))

    failures = []
    for op in _operators(rng):
        for _ in range(SAMPLES // 4):
            x, y = rng.standard_normal(op.domain_dim), rng.standard_normal(op.range_dim)
            lhs, rhs = float(op.apply(x) @ y), float(x @ op.apply_adjoint(y))
            if abs(lhs - rhs) > 1e-12 * max(1.0, abs(lhs)):
                failures.append(f"{op!r}: <Tx, y>={lhs!r} but <x, T*y>={rhs!r}")
    outcomes.append(_outcome('adjoint consistency', failures))
    return outcomes


def _lemmas_suite(rng):
    outcomes = []
    problem = make_diagonal_problem(SAMPLE_DIM, 1.0, 'smooth')
    penalty = problem.penalty.build()
    opnorm = operator_norm(problem.operator).upper
    failures = []
    for delta in (1e-1, 1e-2, 1e-3):
        data = inject_noise(problem.data_true, NoiseModel(delta=delta, seed=int(rng.integers(1 << 31))))
        alpha = SqrtRule(tau=1.0, opnorm=opnorm).alpha(delta)
        F = CostFunctional(problem.operator, data, alpha, penalty)
        result = solve(F)
        lemma = residual_bound_check(problem.operator, result, problem.phi_true, data, delta, opnorm)
        weak = weak_convergence_check(F, result, problem.phi_true, delta)
        if not lemma.holds:
            failures.append(f"residual bound at delta={delta:g}: {lemma.lhs:.6g} > {lemma.rhs:.6g}")
        if not weak.holds:
            failures.append(f"weak convergence at delta={delta:g}: {weak.lhs:.6g} > {weak.rhs:.6g}")
    outcomes.append(_outcome('residual and weak-convergence bounds', failures))

    failures = []
    for lh, expected in ((1.0, math.sqrt(2.0)), (3.0, 2.0 / math.sqrt(3.0)), (1e12, 1.0)):
        got = tau_of_hessian_lipschitz(lh, 1.0)
        if abs(got - expected) > 1e-9:
            failures.append(f"tau({lh:g}) = {got!r}, expected {expected!r}")
    outcomes.append(_outcome('tau table', failures))

    failures = []
    deltas = np.logspace(-6, 0, 25)
    for rule in (SqrtRule(tau=1.0, opnorm=1.0), PowerRule(p=0.5), PowerRule(p=1.5)):
        alphas = [rule.alpha(d) for d in deltas]
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            failures.append(f"{rule.kind} rule is not increasing in delta")
        if alphas[0] > 1e-2:
            failures.append(f"{rule.kind} rule does not tend to zero")
    outcomes.append(_outcome('rule monotonicity', failures))

    failures = []
    for penalty in _catalog():
        radius = penalty.radius or 2.0
        for _ in range(SAMPLES):
            u, v = _ball_sample(rng, radius), _ball_sample(rng, radius)
            change = float(np.max(np.abs(penalty.hessian_diagonal(u) - penalty.hessian_diagonal(v))))
            if change > penalty.hessian_lipschitz * float(np.linalg.norm(u - v)) + 1e-12:
                failures.append(f"{penalty.name}: Hessian changes by {change:.3g}")
    outcomes.append(_outcome('Hessian-Lipschitz certificates', failures))
    return outcomes


def run_suite(name, seed=0):
    runners = {
        'bregman': _bregman_suite,
        'optimality': _optimality_suite,
        'lemmas': _lemmas_suite,
    }
    if name not in runners:
        raise InvalidParameter(f"unknown suite '{name}', choose one of {', '.join(SUITES)}")
    outcomes = runners[name](np.random.default_rng(seed))
    for outcome in outcomes:
        if not outcome.passed:
            logger.warning("check '%s' failed: %s", outcome.name, outcome.detail)
    return outcomes
