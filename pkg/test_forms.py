from django.test import SimpleTestCase, override_settings

from reglab.forms import RateStudyForm, TauForm, VerifyForm, parse_deltas


def rate_study_data(**overrides):
    data = {
        'problem': 'diagonal', 'n': 64, 'penalty': 'pseudo-huber-strong', 'rule': 'sqrt',
        'seed': 0, 'repeats': 1, 'workers': 1, 'format': 'json',
    }
    data.update(overrides)
    return data


class RateStudyFormTest(SimpleTestCase):
    def test_minimal_options_use_defaults(self):
        form = RateStudyForm(data=rate_study_data())
        self.assertTrue(form.is_valid(), form.errors)
        cleaned = form.cleaned_data
        self.assertEqual(cleaned['deltas'], (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4))
        self.assertEqual(cleaned['tau'], 1.0)
        self.assertEqual(cleaned['mu'], 1.0)
        self.assertEqual(cleaned['eps'], 0.1)
        self.assertEqual(cleaned['decay'], 1.0)
        self.assertEqual(cleaned['profile'], 'source')
        self.assertFalse(cleaned['discrepancy_search'])

    def test_blur_defaults_to_bump_profile(self):
        form = RateStudyForm(data=rate_study_data(problem='blur'))
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['profile'], 'bump')
        self.assertEqual(form.cleaned_data['width'], 2.0)

    def test_deltas_parsed(self):
        form = RateStudyForm(data=rate_study_data(deltas='1e-1, 1e-2,1e-3,1e-4'))
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['deltas'], (1e-1, 1e-2, 1e-3, 1e-4))

    def test_invalid_deltas(self):
        for deltas in ('1e-1,1e-2,1e-3', '1e-1,1e-2,1e-3,0', '1e-1,1e-3,1e-2,1e-4', 'a,b,c,d'):
            form = RateStudyForm(data=rate_study_data(deltas=deltas))
            self.assertFalse(form.is_valid(), deltas)
            self.assertIn('deltas', form.errors)

    def test_tau_below_one(self):
        form = RateStudyForm(data=rate_study_data(tau=0.5))
        self.assertFalse(form.is_valid())
        self.assertIn('tau', form.errors)

    def test_p_out_of_range(self):
        form = RateStudyForm(data=rate_study_data(rule='power', p=2.0))
        self.assertFalse(form.is_valid())
        self.assertIn('p', form.errors)

    def test_unknown_choices(self):
        form = RateStudyForm(data=rate_study_data(penalty='total-variation', rule='l-curve', format='xml'))
        self.assertFalse(form.is_valid())
        self.assertEqual(set(form.errors), {'penalty', 'rule', 'format'})

    def test_blur_needs_eight_points(self):
        form = RateStudyForm(data=rate_study_data(problem='blur', n=4))
        self.assertFalse(form.is_valid())
        self.assertIn('n', form.errors)

    def test_hessian_rule_with_quadratic_penalty(self):
        form = RateStudyForm(data=rate_study_data(penalty='quadratic', rule='hessian-sqrt'))
        self.assertFalse(form.is_valid())
        self.assertIn('rule', form.errors)

    def test_nonpositive_mu(self):
        form = RateStudyForm(data=rate_study_data(mu=0))
        self.assertFalse(form.is_valid())
        self.assertIn('mu', form.errors)

    def test_discrepancy_search_flag(self):
        form = RateStudyForm(data=rate_study_data(discrepancy_search=True))
        self.assertTrue(form.is_valid(), form.errors)
        self.assertTrue(form.cleaned_data['discrepancy_search'])

    @override_settings(REGLAB={'DEFAULT_DELTAS': (1.0, 0.5, 0.25, 0.125)})
    def test_default_grid_from_settings(self):
        self.assertEqual(parse_deltas(''), (1.0, 0.5, 0.25, 0.125))


class TauFormTest(SimpleTestCase):
    def test_valid(self):
        form = TauForm(data={'lh': 3.0, 'opnorm': 1.0})
        self.assertTrue(form.is_valid())

    def test_zero_lipschitz(self):
        form = TauForm(data={'lh': 0.0, 'opnorm': 1.0})
        self.assertFalse(form.is_valid())
        self.assertIn('undefined', form.errors['lh'][0])

    def test_negative_values(self):
        form = TauForm(data={'lh': -1.0, 'opnorm': -2.0})
        self.assertFalse(form.is_valid())
        self.assertEqual(set(form.errors), {'lh', 'opnorm'})


class VerifyFormTest(SimpleTestCase):
    def test_suites(self):
        for suite in ('bregman', 'optimality', 'lemmas', 'all'):
            self.assertTrue(VerifyForm(data={'suite': suite, 'seed': 0}).is_valid())
        self.assertFalse(VerifyForm(data={'suite': 'rates', 'seed': 0}).is_valid())
