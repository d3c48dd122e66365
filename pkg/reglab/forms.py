from django import forms

from .conf import reglab_setting
from .experiments import PROFILES
from .penalties import CATALOG
from .reports import FORMATS
from .regparam import RULES
from .verification import SUITES


def _choices(values):
    return [(value, value) for value in values]


def parse_deltas(text):
    """'1e-1,1e-2,...' -> tuple of floats; blank gives the configured default grid."""
    if text is None or not str(text).strip():
        return tuple(reglab_setting('DEFAULT_DELTAS'))
    try:
        return tuple(float(part) for part in str(text).split(',') if part.strip())
    except ValueError:
        raise forms.ValidationError("Noise levels must be a comma-separated list of numbers.")


class RateStudyForm(forms.Form):
    DEFAULT_PROFILES = {'diagonal': 'source', 'blur': 'bump'}

    problem = forms.ChoiceField(choices=_choices(('diagonal', 'blur')))
    n = forms.IntegerField(min_value=2)
    decay = forms.FloatField(min_value=0.0, required=False)
    width = forms.FloatField(required=False)
    profile = forms.ChoiceField(choices=_choices(PROFILES), required=False)
    penalty = forms.ChoiceField(choices=_choices(CATALOG))
    mu = forms.FloatField(required=False)
    eps = forms.FloatField(required=False)
    radius = forms.FloatField(required=False)
    rule = forms.ChoiceField(choices=_choices(RULES))
    tau = forms.FloatField(required=False)
    p = forms.FloatField(required=False)
    deltas = forms.CharField(required=False)
    seed = forms.IntegerField()
    repeats = forms.IntegerField(min_value=1)
    discrepancy_search = forms.BooleanField(required=False)
    workers = forms.IntegerField(min_value=1)
    out = forms.CharField(required=False)
    format = forms.ChoiceField(choices=_choices(FORMATS))
    save = forms.CharField(required=False, max_length=100)

    def clean_deltas(self):
        deltas = parse_deltas(self.cleaned_data.get('deltas'))
        if len(deltas) < 4:
            raise forms.ValidationError("A rate study needs at least four noise levels.")
        if any(not delta > 0 for delta in deltas):
            raise forms.ValidationError("Every noise level must be positive.")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise forms.ValidationError("Noise levels must be strictly decreasing.")
        return deltas

    def clean_tau(self):
        tau = self.cleaned_data.get('tau')
        if tau is None:
            return reglab_setting('DEFAULT_TAU')
        if tau < 1:
            raise forms.ValidationError("tau must be at least 1.")
        return tau

    def clean_p(self):
        p = self.cleaned_data.get('p')
        if p is None:
            return reglab_setting('DEFAULT_P')
        if not 0 < p < 2:
            raise forms.ValidationError("p must lie strictly between 0 and 2.")
        return p

    def _positive_or_default(self, name, default):
        value = self.cleaned_data.get(name)
        if value is None:
            return default
        if not value > 0:
            raise forms.ValidationError(f"{name} must be positive.")
        return value

    def clean_mu(self):
        return self._positive_or_default('mu', reglab_setting('DEFAULT_MU'))

    def clean_eps(self):
        return self._positive_or_default('eps', reglab_setting('DEFAULT_EPS'))

    def clean_radius(self):
        return self._positive_or_default('radius', reglab_setting('QUARTIC_RADIUS'))

    def clean_width(self):
        return self._positive_or_default('width', 2.0)

    def clean(self):
        cleaned_data = super().clean()
        problem = cleaned_data.get('problem')
        if cleaned_data.get('decay') is None:
            cleaned_data['decay'] = 1.0
        if problem and not cleaned_data.get('profile'):
            cleaned_data['profile'] = self.DEFAULT_PROFILES[problem]
        if problem == 'blur' and (cleaned_data.get('n') or 0) < 8:
            self.add_error('n', "Blur problems need n >= 8.")
        if cleaned_data.get('rule') == 'hessian-sqrt' and cleaned_data.get('penalty') == 'quadratic':
            self.add_error('rule', "The quadratic penalty has L_H = 0, so tau(L_H) is undefined.")
        return cleaned_data


class TauForm(forms.Form):
    lh = forms.FloatField()
    opnorm = forms.FloatField()

    def clean_lh(self):
        lh = self.cleaned_data['lh']
        if lh < 0:
            raise forms.ValidationError("L_H must be nonnegative.")
        if lh == 0:
            raise forms.ValidationError("tau(L_H) is undefined for L_H = 0; use a fixed tau instead.")
        return lh

    def clean_opnorm(self):
        opnorm = self.cleaned_data['opnorm']
        if not opnorm > 0:
            raise forms.ValidationError("The operator norm must be positive.")
        return opnorm


class VerifyForm(forms.Form):
    suite = forms.ChoiceField(choices=_choices(SUITES + ('all',)))
    seed = forms.IntegerField()
