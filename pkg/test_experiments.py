import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from reglab.exceptions import InsufficientData, InvalidParameter, ReportWriteError, StudyAborted
from reglab.experiments import (
    NOMINAL_RATES, ROW_COLUMNS, NoiseModel, ProblemInstance, RateStudyResult, fit_loglog_slope,
    gaussian_kernel, inject_noise, make_blur_problem, make_diagonal_problem, run_rate_study,
)
from reglab.operators import DiagonalOperator, operator_norm
from reglab.penalties import PenaltyCatalogEntry
from reglab.regparam import HessianAwareSqrtRule, PowerRule, SqrtRule, residual_bound_check
from reglab.reports import emit_report, render_report
from reglab.variational import SolveConfig, closed_form_tikhonov

DEFAULT_GRID = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)


class ProblemGeneratorTest(SimpleTestCase):
    def test_diagonal_singular_values(self):
        problem = make_diagonal_problem(2, 1.0)
        np.testing.assert_array_equal(problem.operator.sigma, [1.0, 0.5])

    def test_zero_decay_is_identity(self):
        problem = make_diagonal_problem(16, 0.0)
        np.testing.assert_array_equal(problem.operator.sigma, np.ones(16))

    def test_fast_decay(self):
        problem = make_diagonal_problem(64, 2.0, 'smooth')
        self.assertAlmostEqual(problem.operator.sigma[-1], 64.0 ** -2, places=15)
        self.assertAlmostEqual(problem.phi_true[3], 0.25)

    def test_source_profile(self):
        problem = make_diagonal_problem(8, 1.0, 'source')
        np.testing.assert_allclose(problem.phi_true, 2e-4 * np.arange(1, 9, dtype=float) ** -2.0)

    def test_true_data_is_consistent(self):
        for problem in (make_diagonal_problem(16, 1.0, 'bump'), make_blur_problem(32, 1.5, profile='source')):
            np.testing.assert_allclose(problem.data_true, problem.operator.apply(problem.phi_true), atol=1e-15)

    def test_inconsistent_instance_rejected(self):
        op = DiagonalOperator([1.0, 0.5])
        with self.assertRaises(InvalidParameter):
            ProblemInstance(op, np.ones(2), np.ones(2), PenaltyCatalogEntry('quadratic'), 'diagonal')

    def test_unknown_profile(self):
        with self.assertRaises(InvalidParameter):
            make_diagonal_problem(8, 1.0, 'zigzag')

    def test_size_limits(self):
        with self.assertRaises(InvalidParameter):
            make_diagonal_problem(1, 1.0)
        with self.assertRaises(InvalidParameter):
            make_blur_problem(4, 1.0)

    def test_narrow_blur_is_identity(self):
        problem = make_blur_problem(64, 1e-4)
        np.testing.assert_allclose(problem.operator.apply(problem.phi_true), problem.phi_true, atol=1e-6)

    def test_kernel_is_normalized(self):
        for width in (0.5, 1.0, 2.0, 3.7):
            self.assertAlmostEqual(gaussian_kernel(width).sum(), 1.0, delta=1e-12)

    def test_blur_is_averaging(self):
        problem = make_blur_problem(64, 2.0)
        estimate = operator_norm(problem.operator)
        self.assertLessEqual(estimate.value, 1.0 + 1e-8)
        oracle = np.linalg.svd(problem.operator.as_matrix(), compute_uv=False)[0]
        self.assertAlmostEqual(estimate.value, oracle, delta=1e-8)

    def test_bump_profile_shape(self):
        problem = make_blur_problem(100, 2.0)
        t = (np.arange(100) + 0.5) / 100
        self.assertAlmostEqual(problem.phi_true[np.argmin(abs(t - 0.3))], 1.0, delta=0.01)
        self.assertTrue(np.all(problem.phi_true[(t > 0.62) & (t < 0.78)] >= 0.5))


class NoiseTest(SimpleTestCase):
    def test_zero_noise(self):
        data = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(inject_noise(data, NoiseModel(delta=0.0, seed=3)), data)

    def test_exact_norm(self):
        data = np.zeros(50)
        for seed in range(10):
            for delta in (1e-1, 1e-4, 1e-8):
                noisy = inject_noise(data, NoiseModel(delta=delta, seed=seed))
                self.assertAlmostEqual(np.linalg.norm(noisy - data) / delta, 1.0, delta=1e-14)

    def test_norm_on_top_of_signal(self):
        data = np.linspace(0.0, 1.0, 50)
        noisy = inject_noise(data, NoiseModel(delta=1e-1, seed=1))
        self.assertAlmostEqual(np.linalg.norm(noisy - data), 1e-1, delta=1e-13)

    def test_same_seed_same_noise(self):
        data = np.zeros(20)
        np.testing.assert_array_equal(inject_noise(data, NoiseModel(1e-2, seed=5)),
                                      inject_noise(data, NoiseModel(1e-2, seed=5)))
        self.assertFalse(np.array_equal(inject_noise(data, NoiseModel(1e-2, seed=5)),
                                        inject_noise(data, NoiseModel(1e-2, seed=6))))

    def test_negative_delta(self):
        with self.assertRaises(InvalidParameter):
            inject_noise(np.zeros(3), NoiseModel(delta=-1.0))


class SlopeTest(SimpleTestCase):
    def test_two_points(self):
        self.assertAlmostEqual(fit_loglog_slope([(1.0, 1.0), (0.01, 0.1)]), 0.5, places=12)

    def test_scale_invariance(self):
        for c in (1e-3, 1.0, 42.0):
            self.assertAlmostEqual(fit_loglog_slope([(x, c * x) for x in (1.0, 0.1, 0.01)]), 1.0, places=12)

    def test_power_law(self):
        xs = np.geomspace(1e-4, 1.0, 9)
        self.assertAlmostEqual(fit_loglog_slope([(x, x ** 0.75) for x in xs]), 0.75, delta=1e-12)

    def test_non_positive_values_dropped(self):
        self.assertAlmostEqual(fit_loglog_slope([(1.0, 1.0), (0.5, 0.0), (0.01, 0.1), (-1.0, 2.0)]), 0.5)

    def test_too_few_points(self):
        with self.assertRaises(InsufficientData):
            fit_loglog_slope([(1.0, 1.0), (0.1, -1.0)])
        with self.assertRaises(InsufficientData):
            fit_loglog_slope([(1.0, 1.0), (1.0, 2.0)])


class RateStudyValidationTest(SimpleTestCase):
    def setUp(self):
        self.problem = make_diagonal_problem(8, 1.0, 'smooth')
        self.rule = SqrtRule(1.0, 1.0)

    def test_zero_noise_level_rejected(self):
        with self.assertRaises(InvalidParameter):
            run_rate_study(self.problem, self.rule, (1e-1, 1e-2, 1e-3, 0.0))

    def test_needs_four_levels(self):
        with self.assertRaises(InvalidParameter):
            run_rate_study(self.problem, self.rule, (1e-1, 1e-2, 1e-3))

    def test_needs_decreasing_levels(self):
        with self.assertRaises(InvalidParameter):
            run_rate_study(self.problem, self.rule, (1e-1, 1e-3, 1e-2, 1e-4))

    def test_non_converged_solve_aborts(self):
        with self.assertRaises(StudyAborted) as ctx:
            run_rate_study(self.problem, self.rule, (1e-1, 1e-2, 1e-3, 1e-4), cfg=SolveConfig(max_iter=1))
        self.assertEqual(ctx.exception.delta, 1e-1)


class QuadraticStudyTest(SimpleTestCase):
    def test_rows_match_closed_form(self):
        problem = make_diagonal_problem(8, 1.0, 'smooth', PenaltyCatalogEntry('quadratic'))
        rule = SqrtRule(1.0, 1.0)
        deltas = (1e-1, 1e-2, 1e-3, 1e-4)
        result = run_rate_study(problem, rule, deltas, cfg=SolveConfig(grad_tol=1e-11), seed=3, opnorm=1.0)
        self.assertEqual([row.delta for row in result.rows], list(deltas))
        for index, row in enumerate(result.rows):
            data = inject_noise(problem.data_true, NoiseModel(delta=row.delta, seed=3 + index))
            phi = closed_form_tikhonov(problem.operator, data, rule.alpha(row.delta))
            self.assertAlmostEqual(row.error_norm, np.linalg.norm(phi - problem.phi_true), delta=1e-8)
            self.assertAlmostEqual(row.d_j, 0.5 * row.error_norm ** 2, delta=1e-10)


class SourceProfileStudyTest(SimpleTestCase):
    """Pseudo-Huber penalty on the diagonal problem with the square-root rule."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        problem = make_diagonal_problem(64, 1.0, 'source', PenaltyCatalogEntry('pseudo-huber-strong', 1.0, 0.1))
        cls.result = run_rate_study(problem, SqrtRule(1.0, operator_norm(problem.operator).upper), DEFAULT_GRID)

    def test_error_rate(self):
        slope = self.result.fitted_slopes['error_vs_delta']
        self.assertGreaterEqual(slope, 0.45)
        self.assertLessEqual(slope, 1.1)

    def test_single_rate_constant(self):
        admissible = [row for row in self.result.rows if row.admissible]
        self.assertTrue(admissible)
        self.assertLessEqual(self.result.rate_constant, 10.0)
        for row in admissible:
            self.assertLessEqual(row.error_norm, self.result.rate_constant * math.sqrt(row.delta) * (1 + 1e-12))

    def test_misfit_rate(self):
        self.assertGreaterEqual(self.result.fitted_slopes['d_g_vs_delta_admissible'], 1.35)

    def test_no_check_violations(self):
        self.assertEqual(self.result.violations, [])
        for row in self.result.rows:
            self.assertTrue(row.checks['residual_lemma']['holds'])
            self.assertTrue(row.checks['weak_convergence']['holds'])

    def test_penalty_and_misfit_bounds(self):
        for row in self.result.rows:
            for name in ('penalty_bound_general', 'penalty_bound_sqrt', 'misfit_bound', 'misfit_norm_bound'):
                check = row.checks[name]
                if row.admissible:
                    self.assertTrue(check['holds'], (row.delta, name))
                else:
                    self.assertIsNone(check['holds'])

    def test_norm_bound_compares_error(self):
        for row in self.result.rows:
            self.assertEqual(row.checks['misfit_norm_bound']['lhs'], row.error_norm)

    def test_symmetric_identity_residuals(self):
        for row in self.result.rows:
            self.assertLessEqual(row.sym_residual, 1e-6)

    def test_summary_table(self):
        quantities = {entry['quantity']: entry for entry in self.result.summary}
        self.assertEqual(set(quantities), set(NOMINAL_RATES))
        self.assertEqual(quantities['d_g']['nominal_rate'], 1.5)
        self.assertEqual(quantities['error_norm']['fitted_slope'], self.result.fitted_slopes['error_vs_delta'])

    def test_config_echo(self):
        config = self.result.config
        self.assertEqual(config['deltas'], list(DEFAULT_GRID))
        self.assertEqual(config['penalty']['name'], 'pseudo-huber-strong')
        self.assertEqual(config['rule']['kind'], 'sqrt')
        self.assertEqual(config['problem']['profile'], 'source')


class BlurStudyTest(SimpleTestCase):
    def test_hessian_diagnostic_on_admissible_rows(self):
        problem = make_blur_problem(64, 2.0)
        result = run_rate_study(problem, SqrtRule(1.0, operator_norm(problem.operator).upper),
                                (1e-1, 1e-2, 1e-3, 1e-4))
        for row in result.rows:
            diagnostic = row.checks['hessian_discrepancy']
            if row.admissible:
                self.assertGreaterEqual(diagnostic['slack'], 0.0)
                self.assertTrue(diagnostic['holds'])
            else:
                self.assertIsNone(diagnostic['holds'])


class SmallNoiseStudyTest(SimpleTestCase):
    def test_blur_study_down_to_tiny_noise(self):
        problem = make_blur_problem(64, 2.0)
        result = run_rate_study(problem, SqrtRule(1.0, operator_norm(problem.operator).upper),
                                (1e-4, 1e-5, 1e-6, 1e-7))
        self.assertEqual([row.delta for row in result.rows], [1e-4, 1e-5, 1e-6, 1e-7])
        for row in result.rows:
            self.assertTrue(row.checks['residual_lemma']['holds'])

    def test_injected_noise_passes_the_noise_precondition(self):
        for problem in (make_blur_problem(64, 2.0), make_diagonal_problem(64, 1.0, 'smooth')):
            for delta in (1e-5, 1e-7):
                for seed in range(200):
                    data = inject_noise(problem.data_true, NoiseModel(delta=delta, seed=seed))
                    check = residual_bound_check(problem.operator, problem.phi_true, problem.phi_true,
                                                 data, delta, 1.0)
                    self.assertTrue(check.holds, (delta, seed))


class RuleScalingTest(SimpleTestCase):
    deltas = (1e-1, 1e-2, 1e-3, 1e-4)

    def test_hessian_aware_rule_gets_the_sqrt_penalty_bound(self):
        problem = make_diagonal_problem(8, 1.0, 'source')
        result = run_rate_study(problem, HessianAwareSqrtRule(1.0, 1.0), self.deltas)
        for row in result.rows:
            self.assertIn('penalty_bound_sqrt', row.checks)

    def test_power_rule_has_no_sqrt_penalty_bound(self):
        problem = make_diagonal_problem(8, 1.0, 'smooth', PenaltyCatalogEntry('quadratic'))
        result = run_rate_study(problem, PowerRule(1.0), self.deltas)
        for row in result.rows:
            self.assertNotIn('penalty_bound_sqrt', row.checks)
            self.assertIn('penalty_bound_general', row.checks)


class StudyBehaviourTest(SimpleTestCase):
    def setUp(self):
        self.problem = make_diagonal_problem(8, 1.0, 'smooth')
        self.rule = SqrtRule(1.0, 1.0)
        self.deltas = (1e-1, 1e-2, 1e-3, 1e-4)

    def test_determinism(self):
        first = run_rate_study(self.problem, self.rule, self.deltas, seed=11)
        second = run_rate_study(self.problem, self.rule, self.deltas, seed=11)
        self.assertEqual(render_report(first, 'json'), render_report(second, 'json'))

    def test_parallel_rows_match_serial(self):
        serial = run_rate_study(self.problem, self.rule, self.deltas, seed=2)
        parallel = run_rate_study(self.problem, self.rule, self.deltas, seed=2, workers=3)
        self.assertEqual(render_report(serial, 'json'), render_report(parallel, 'json'))

    def test_repeats_average_in_log_space(self):
        single = [run_rate_study(self.problem, self.rule, self.deltas, seed=s).rows[0].error_norm
                  for s in (0, 4)]
        repeated = run_rate_study(self.problem, self.rule, self.deltas, seed=0, repeats=2)
        self.assertAlmostEqual(repeated.rows[0].error_norm, math.sqrt(single[0] * single[1]), places=12)
        self.assertEqual(repeated.rows[0].checks['repeats'], 2)

    def test_inadmissible_rule_falls_back_to_search(self):
        problem = make_diagonal_problem(8, 1.0, 'smooth', PenaltyCatalogEntry('quadratic'))
        deltas = (1e-1, 3e-2, 1e-2, 3e-3)
        with self.assertLogs('reglab.experiments', level='WARNING'):
            result = run_rate_study(problem, PowerRule(0.1), deltas, discrepancy_search=True)
        for row, delta in zip(result.rows, deltas):
            self.assertTrue(row.checks['fallback'])
            self.assertTrue(row.admissible)
            self.assertLess(row.alpha, PowerRule(0.1).alpha(delta))

    def test_inadmissible_rows_are_flagged_without_search(self):
        problem = make_diagonal_problem(8, 1.0, 'smooth', PenaltyCatalogEntry('quadratic'))
        result = run_rate_study(problem, PowerRule(0.1), (1e-1, 3e-2, 1e-2, 3e-3))
        self.assertTrue(all(not row.admissible for row in result.rows))
        self.assertIsNone(result.fitted_slopes['error_vs_delta_admissible'])


class ReportTest(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        problem = make_diagonal_problem(8, 1.0, 'smooth')
        cls.result = run_rate_study(problem, SqrtRule(1.0, 1.0), (1e-1, 1e-2, 1e-3, 1e-4), seed=1)

    def test_csv_header_and_rows(self):
        lines = render_report(self.result, 'csv').splitlines()
        self.assertEqual(len(lines), 5)
        self.assertEqual(lines[0], 'delta,alpha,admissible,discrepancy,error_norm,d_j,d_j_sym,d_g,d_f,sym_residual')
        first = lines[1].split(',')
        self.assertEqual(float(first[0]), 0.1)
        self.assertIn(first[2], ('true', 'false'))
        self.assertEqual(float(first[4]), self.result.rows[0].error_norm)

    def test_empty_result_is_header_only(self):
        empty = RateStudyResult(rows=(), fitted_slopes={}, config={})
        self.assertEqual(render_report(empty, 'csv'), ','.join(ROW_COLUMNS) + '\n')

    def test_json_round_trip(self):
        payload = json.loads(render_report(self.result, 'json'))
        self.assertEqual(len(payload['rows']), 4)
        for parsed, row in zip(payload['rows'], self.result.rows):
            for name in ROW_COLUMNS:
                self.assertEqual(parsed[name], getattr(row, name))
        self.assertEqual(set(payload['fitted_slopes']), {
            'error_vs_delta', 'd_j_vs_delta', 'd_g_vs_delta', 'd_j_sym_vs_delta',
            'error_vs_delta_admissible', 'd_g_vs_delta_admissible',
        })
        self.assertEqual(payload['config']['seed'], 1)
        self.assertIn('residual_lemma', payload['rows'][0]['checks'])

    def test_emit_writes_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = emit_report(self.result, 'csv', Path(tmp) / 'nested' / 'study.csv')
            self.assertEqual(path.read_text(), render_report(self.result, 'csv'))

    def test_unwritable_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            blocker = Path(tmp) / 'blocker'
            blocker.write_text('')
            with self.assertRaises(ReportWriteError) as ctx:
                emit_report(self.result, 'json', blocker / 'study.json')
            self.assertIn('blocker', str(ctx.exception))

    def test_unknown_format(self):
        with self.assertRaises(InvalidParameter):
            render_report(self.result, 'xlsx')
