"""Access to the ``REGLAB`` settings dict with packaged defaults."""
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    'GRAD_TOL': 1e-9,
    'MAX_ITER': 50000,
    'INITIAL_STEP': 1.0,
    'SHRINK': 0.5,
    'SUFFICIENT_DECREASE': 1e-4,
    'NORM_TOL': 1e-12,
    'NORM_MAX_ITER': 5000,
    'DEFAULT_DELTAS': (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4),
    'DEFAULT_MU': 1.0,
    'DEFAULT_EPS': 0.1,
    'DEFAULT_TAU': 1.0,
    'DEFAULT_P': 1.0,
    'QUARTIC_RADIUS': 10.0,
    'BISECT_MAX_STEPS': 40,
    'BISECT_TOL': 1e-3,
}


def reglab_setting(name):
    if name not in DEFAULTS:
        raise ImproperlyConfigured(f"Unknown REGLAB setting '{name}'.")
    overrides = getattr(settings, 'REGLAB', {}) or {}
    return overrides.get(name, DEFAULTS[name])
