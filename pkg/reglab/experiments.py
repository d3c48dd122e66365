"""
Problem generators, exact-norm noise injection and delta-sweep rate studies.

A rate study solves one regularized problem per noise level, records the
error, the Bregman divergences and the admissibility of the chosen alpha,
checks the accompanying inequalities row by row, and fits log-log slopes
against delta.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bregman import bregman_report, misfit_convexity
from .exceptions import (
    BracketingError, InsufficientData, InvalidParameter, PreconditionError, SolverDivergence, StudyAborted,
)
from .operators import ConvolutionOperator, DiagonalOperator, as_vector, operator_norm
from .penalties import PenaltyCatalogEntry
from .regparam import (
    check_admissible, discrepancy_search, hessian_discrepancy_diagnostic,
    residual_bound_check, weak_convergence_check,
)
from .variational import CostFunctional, SolveConfig, solve

logger = logging.getLogger(__name__)

PROFILES = ('smooth', 'source', 'bump')

SOURCE_AMPLITUDE = 2e-4

ROW_COLUMNS = (
    'delta', 'alpha', 'admissible', 'discrepancy', 'error_norm',
    'd_j', 'd_j_sym', 'd_g', 'd_f', 'sym_residual',
)

# nominal orders in delta of the summary table
NOMINAL_RATES = {
    'error_norm': 0.5,
    'd_j': 0.5,
    'd_j_sym': 0.5,
    'd_g': 1.5,
}


@dataclass(frozen=True)
class ProblemInstance:
    operator: object
    phi_true: np.ndarray
    data_true: np.ndarray
    penalty: PenaltyCatalogEntry
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        mismatch = np.linalg.norm(self.data_true - self.operator.apply(self.phi_true))
        if mismatch > 1e-12:
            raise InvalidParameter(f"true data deviates from T phi_true by {mismatch:.3g}")

    def as_dict(self):
        return {'name': self.name, 'n': self.operator.domain_dim, **self.params}


def _profile(name, n, sigma=None):
    i = np.arange(1, n + 1, dtype=np.float64)
    if name == 'smooth':
        return 1.0 / i
    if name == 'source':
        # a source-condition element T*T w with w = 1, scaled small
        return SOURCE_AMPLITUDE * sigma ** 2
    if name == 'bump':
        t = (i - 0.5) / n
        bump = np.exp(-((t - 0.3) / 0.08) ** 2)
        plateau = np.where((t >= 0.6) & (t <= 0.8), 0.5, 0.0)
        return bump + plateau
    raise InvalidParameter(f"unknown profile '{name}', choose one of {', '.join(PROFILES)}")


def _problem(operator, profile, penalty, name, params):
    sigma = None
    if profile == 'source':
        sigma = operator.sigma if operator.kind == 'diagonal' else None
        if sigma is None:
            phi_true = SOURCE_AMPLITUDE * operator.apply_adjoint(operator.apply(np.ones(operator.domain_dim)))
        else:
            phi_true = _profile(profile, operator.domain_dim, sigma)
    else:
        phi_true = _profile(profile, operator.domain_dim)
    phi_true.setflags(write=False)
    return ProblemInstance(
        operator=operator,
        phi_true=phi_true,
        data_true=operator.apply(phi_true),
        penalty=penalty,
        name=name,
        params={'profile': profile, **params},
    )


def make_diagonal_problem(n, decay, profile='smooth', penalty=None):
    """Diagonal operator with singular values i^(-decay)."""
    if n < 2:
        raise InvalidParameter("diagonal problems need n >= 2")
    if decay < 0:
        raise InvalidParameter("decay must be nonnegative")
    penalty = penalty or PenaltyCatalogEntry.from_settings('pseudo-huber-strong')
    sigma = np.arange(1, n + 1, dtype=np.float64) ** -float(decay)
    return _problem(DiagonalOperator(sigma), profile, penalty, 'diagonal', {'decay': decay})


def gaussian_kernel(width):
    """Normalized sampled Gaussian of standard deviation ``width`` (in grid cells)."""
    if width <= 0:
        raise InvalidParameter("kernel width must be positive")
    half = max(1, int(math.ceil(4.0 * width)))
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (offsets / width) ** 2)
    return kernel / kernel.sum()


def make_blur_problem(n, width, penalty=None, profile='bump'):
    """One-dimensional deconvolution with a zero-padded Gaussian blur."""
    if n < 8:
        raise InvalidParameter("blur problems need n >= 8")
    penalty = penalty or PenaltyCatalogEntry.from_settings('pseudo-huber-strong')
    kernel = gaussian_kernel(width)
    half = (kernel.size - 1) // 2
    if half > n - 1:
        raise InvalidParameter(f"kernel width {width} is too large for n={n}")
    return _problem(ConvolutionOperator(kernel, n), profile, penalty, 'blur', {'width': width})


@dataclass(frozen=True)
class NoiseModel:
    delta: float
    seed: int = 0
    mode: str = 'exact-norm'


def inject_noise(data_true, model):
    """f_delta = f_true + delta g / ||g|| with g from the seeded generator."""
    data_true = as_vector(data_true, name='data_true')
    if model.delta < 0:
        raise InvalidParameter("delta must be nonnegative")
    if model.mode != 'exact-norm':
        raise InvalidParameter(f"unsupported noise mode '{model.mode}'")
    if model.delta == 0:
        return data_true.copy()
    rng = np.random.default_rng(model.seed)
    g = rng.standard_normal(data_true.size)
    while not np.any(g):
        g = rng.standard_normal(data_true.size)
    return data_true + model.delta * (g / np.linalg.norm(g))


def fit_loglog_slope(points):
    """Least-squares slope of log y against log x over the strictly positive points."""
    usable = [(x, y) for x, y in points if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)]
    if len(usable) < 2:
        raise InsufficientData(f"need at least two positive points for a log-log fit, got {len(usable)}")
    logs = np.log(np.array(usable, dtype=np.float64))
    if np.ptp(logs[:, 0]) == 0.0:
        raise InsufficientData("all x values coincide; slope is undefined")
    slope, _ = np.polyfit(logs[:, 0], logs[:, 1], 1)
    return float(slope)


@dataclass(frozen=True)
class RateStudyRow:
    delta: float
    alpha: float
    admissible: bool
    discrepancy: float
    error_norm: float
    d_j: float
    d_j_sym: float
    d_g: float
    d_f: float
    sym_residual: float
    checks: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        return {name: getattr(self, name) for name in ROW_COLUMNS}


@dataclass(frozen=True)
class RateStudyResult:
    rows: tuple
    fitted_slopes: dict
    config: dict
    summary: tuple = ()
    rate_constant: float = math.nan

    @property
    def violations(self):
        """(delta, check name) for every row check that failed."""
        return [
            (row.delta, name)
            for row in self.rows
            for name, check in row.checks.items()
            if isinstance(check, dict) and check.get('holds') is not None and not check['holds']
        ]

    @property
    def error_trend_monotone(self):
        errors = [row.error_norm for row in self.rows]
        return all(b <= a * (1 + 1e-9) for a, b in zip(errors, errors[1:]))


@dataclass(frozen=True)
class _RowContext:
    problem: ProblemInstance
    rule: object
    cfg: SolveConfig
    opnorm: float
    penalty: object
    use_search: bool
    c_misfit: float


def _solve_once(ctx, delta, seed):
    problem, penalty = ctx.problem, ctx.penalty
    data = inject_noise(problem.data_true, NoiseModel(delta=delta, seed=seed))
    alpha = ctx.rule.alpha(delta)
    tau = ctx.rule.admissibility_tau
    F = CostFunctional(problem.operator, data, alpha, penalty)
    result = solve(F, ctx.cfg)
    if not result.converged:
        raise StudyAborted(delta, f"solver did not converge (|grad|={result.grad_norm:.3g})")
    record = check_admissible(problem.operator, data, result, tau, delta, penalty.convexity_modulus)
    fallback = False
    if not record.admissible:
        logger.warning("alpha=%.6g from the %s rule is not admissible at delta=%.3g "
                       "(discrepancy %.6g > %.6g)", alpha, ctx.rule.kind, delta,
                       record.discrepancy, record.bound)
        if ctx.use_search:
            try:
                outcome = discrepancy_search(problem.operator, data, penalty, tau, delta,
                                             alpha_range=(alpha * 1e-4, alpha), cfg=ctx.cfg)
            except (BracketingError, SolverDivergence) as exc:
                raise StudyAborted(delta, str(exc)) from exc
            alpha, record, result, fallback = outcome.alpha, outcome.record, outcome.result, True
            F = F.with_alpha(alpha)
    return data, F, result, record, fallback


def _row_checks(ctx, delta, F, result, record, fallback):
    problem, penalty = ctx.problem, ctx.penalty
    phi_alpha, phi_true = result.minimizer, problem.phi_true
    error = float(np.linalg.norm(phi_alpha - phi_true))
    tau = ctx.rule.admissibility_tau
    checks = {'fallback': fallback}

    try:
        lemma = residual_bound_check(problem.operator, result, phi_true, F.data, delta, ctx.opnorm)
    except PreconditionError as exc:
        raise StudyAborted(delta, str(exc)) from exc
    checks['residual_lemma'] = {'lhs': lemma.lhs, 'rhs': lemma.rhs, 'holds': lemma.holds}

    weak = weak_convergence_check(F, result, phi_true, delta)
    checks['weak_convergence'] = {'lhs': weak.lhs, 'rhs': weak.rhs, 'holds': weak.holds,
                                  'intermediate_rhs': weak.extra['intermediate_rhs']}

    report = bregman_report(F, result, phi_true)
    admissible = record.admissible
    grad_slack = result.grad_norm * error / F.alpha
    rounding = 64 * float(np.finfo(float).eps)

    rhs = (tau + 1.0) * delta * ctx.opnorm * error / F.alpha
    checks['penalty_bound_general'] = {
        'lhs': report.d_j, 'rhs': rhs,
        'holds': (report.d_j <= rhs * (1 + rounding) + grad_slack) if admissible else None,
    }
    if ctx.rule.sqrt_scaled and not fallback:
        rhs = math.sqrt(delta) * error * (1 + 1e-6) + grad_slack
        checks['penalty_bound_sqrt'] = {
            'lhs': report.d_j, 'rhs': rhs,
            'holds': (report.d_j <= rhs) if admissible else None,
        }

    # admissibility is certified up to record.slack on the discrepancy
    rhs = 0.5 * delta ** 2 * (tau ** 2 + 1.0) + delta * ctx.opnorm * error
    excess = tau * delta * record.slack + 0.5 * record.slack ** 2
    checks['misfit_bound'] = {
        'lhs': report.d_g, 'rhs': rhs,
        'holds': (report.d_g <= rhs * (1 + rounding) + excess) if admissible else None,
    }
    if ctx.c_misfit > 0:
        rhs = delta ** 0.75 / ctx.c_misfit * math.sqrt(0.5 * (tau ** 2 + 1.0) + ctx.opnorm)
        checks['misfit_norm_bound'] = {
            'lhs': error, 'rhs': rhs,
            'holds': (error <= rhs) if admissible else None,
        }
    if penalty.smoothness_class == 2 and penalty.hessian_lipschitz:
        diag = hessian_discrepancy_diagnostic(F, result, phi_true, delta,
                                              F.alpha * penalty.hessian_lipschitz, ctx.opnorm)
        checks['hessian_discrepancy'] = {
            'lhs': diag.lhs, 'main_term': diag.main_term, 'remainder': diag.remainder,
            'slack': diag.slack, 'holds': diag.holds if record.admissible else None,
        }
    checks['d_f_decomposition_residual'] = report.d_f_decomposition_residual
    return error, report, checks


def _compute_row(ctx, index, delta, seed, repeats, grid_size):
    samples = []
    for repeat in range(repeats):
        row_seed = seed + index + repeat * grid_size
        _, F, result, record, fallback = _solve_once(ctx, delta, row_seed)
        error, report, checks = _row_checks(ctx, delta, F, result, record, fallback)
        samples.append((F.alpha, record, error, report, checks))
        logger.info("delta=%.3g seed=%d alpha=%.6g admissible=%s error=%.6g",
                    delta, row_seed, F.alpha, record.admissible, error)

    def log_mean(values):
        if len(values) == 1:
            return float(values[0])
        positive = [v for v in values if v > 0]
        if len(positive) < len(values):
            return float(np.mean(values))
        return float(np.exp(np.mean(np.log(positive))))

    checks = samples[0][4] if repeats == 1 else _merge_checks([s[4] for s in samples])
    return RateStudyRow(
        delta=delta,
        alpha=float(np.mean([s[0] for s in samples])),
        admissible=all(s[1].admissible for s in samples),
        discrepancy=float(np.mean([s[1].discrepancy for s in samples])),
        error_norm=log_mean([s[2] for s in samples]),
        d_j=log_mean([s[3].d_j for s in samples]),
        d_j_sym=log_mean([s[3].d_j_sym for s in samples]),
        d_g=log_mean([s[3].d_g for s in samples]),
        d_f=float(np.mean([s[3].d_f for s in samples])),
        sym_residual=float(np.mean([s[3].sym_identity_residual for s in samples])),
        checks=checks,
    )


def _merge_checks(all_checks):
    """Keep the first repeat's numbers; a check holds only if it held on every repeat."""
    merged = dict(all_checks[0])
    for name, check in merged.items():
        if isinstance(check, dict) and 'holds' in check:
            verdicts = [c[name].get('holds') for c in all_checks]
            if any(v is not None and not v for v in verdicts):
                merged[name] = {**check, 'holds': False}
    merged['fallback'] = any(c.get('fallback') for c in all_checks)
    merged['repeats'] = len(all_checks)
    return merged


def _slope_or_none(rows, attr, admissible_only=False):
    points = [(row.delta, getattr(row, attr)) for row in rows if row.admissible or not admissible_only]
    try:
        return fit_loglog_slope(points)
    except InsufficientData:
        return None


def summarize_rates(rows, fitted_slopes):
    """Nominal order against the fitted slope for each tabulated quantity."""
    keys = {
        'error_norm': 'error_vs_delta',
        'd_j': 'd_j_vs_delta',
        'd_j_sym': 'd_j_sym_vs_delta',
        'd_g': 'd_g_vs_delta',
    }
    return tuple(
        {'quantity': quantity, 'nominal_rate': NOMINAL_RATES[quantity], 'fitted_slope': fitted_slopes[key]}
        for quantity, key in keys.items()
    )


def run_rate_study(problem, rule, deltas, cfg=None, seed=0, repeats=1, discrepancy_search=False,
                   workers=1, opnorm=None):
    """
    Sweep the noise levels in ``deltas`` (strictly decreasing, at least four).

    Row i draws its noise with seed + i (+ r * len(deltas) for repeat r),
    so rows may run in parallel without changing the result.
    """
    deltas = tuple(float(d) for d in deltas)
    if len(deltas) < 4:
        raise InvalidParameter("a rate study needs at least four noise levels")
    if any(not (d > 0 and math.isfinite(d)) for d in deltas):
        raise InvalidParameter("every noise level must be positive; a log-log fit is undefined at delta = 0")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise InvalidParameter("noise levels must be strictly decreasing")
    if repeats < 1:
        raise InvalidParameter("repeats must be at least 1")
    cfg = cfg or SolveConfig.from_settings()
    penalty = problem.penalty.build()
    if opnorm is None:
        opnorm = operator_norm(problem.operator).upper
    ctx = _RowContext(
        problem=problem, rule=rule, cfg=cfg, opnorm=opnorm, penalty=penalty,
        use_search=discrepancy_search, c_misfit=misfit_convexity(problem.operator).c_lower,
    )

    def task(item):
        index, delta = item
        return _compute_row(ctx, index, delta, seed, repeats, len(deltas))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(task, enumerate(deltas)))
    else:
        rows = tuple(task(item) for item in enumerate(deltas))

    fitted_slopes = {
        'error_vs_delta': _slope_or_none(rows, 'error_norm'),
        'd_j_vs_delta': _slope_or_none(rows, 'd_j'),
        'd_g_vs_delta': _slope_or_none(rows, 'd_g'),
        'd_j_sym_vs_delta': _slope_or_none(rows, 'd_j_sym'),
        'error_vs_delta_admissible': _slope_or_none(rows, 'error_norm', admissible_only=True),
        'd_g_vs_delta_admissible': _slope_or_none(rows, 'd_g', admissible_only=True),
    }
    admissible = [row for row in rows if row.admissible]
    rate_constant = max((row.error_norm / math.sqrt(row.delta) for row in admissible), default=math.nan)
    config = {
        'problem': problem.as_dict(),
        'penalty': problem.penalty.as_dict(),
        'rule': rule.as_dict(),
        'deltas': list(deltas),
        'seed': seed,
        'repeats': repeats,
        'discrepancy_search': discrepancy_search,
        'solver': cfg.as_dict(),
        'opnorm': opnorm,
    }
    result = RateStudyResult(
        rows=rows,
        fitted_slopes=fitted_slopes,
        config=config,
        summary=summarize_rates(rows, fitted_slopes),
        rate_constant=rate_constant,
    )
    if not result.error_trend_monotone:
        logger.warning("error norm is not monotone in delta for study %s", problem.name)
    for delta, name in result.violations:
        logger.warning("check %s failed at delta=%.3g", name, delta)
    return result
