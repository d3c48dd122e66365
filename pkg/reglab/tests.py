from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase, override_settings

from .conf import DEFAULTS, reglab_setting
from .exceptions import InvalidParameter
from .verification import SUITES, run_suite


class ReglabSettingTest(SimpleTestCase):
    """Settings lookups fall back to packaged defaults."""

    @override_settings(REGLAB={})
    def test_defaults(self):
        for name, value in DEFAULTS.items():
            self.assertEqual(reglab_setting(name), value)

    @override_settings(REGLAB={'GRAD_TOL': 1e-6})
    def test_override(self):
        self.assertEqual(reglab_setting('GRAD_TOL'), 1e-6)
        self.assertEqual(reglab_setting('MAX_ITER'), DEFAULTS['MAX_ITER'])

    @override_settings(REGLAB=None)
    def test_missing_dict(self):
        self.assertEqual(reglab_setting('SHRINK'), 0.5)

    def test_unknown_name(self):
        with self.assertRaises(ImproperlyConfigured):
            reglab_setting('LEARNING_RATE')


class VerificationSuiteTest(SimpleTestCase):
    def test_every_suite_passes(self):
        for suite in SUITES:
            outcomes = run_suite(suite, seed=0)
            self.assertTrue(outcomes)
            failed = [(o.name, o.detail) for o in outcomes if not o.passed]
            self.assertEqual(failed, [], suite)

    def test_unknown_suite(self):
        with self.assertRaises(InvalidParameter):
            run_suite('rates')
