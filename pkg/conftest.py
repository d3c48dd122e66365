"""Pytest wiring: set up Django and a test database the way ``manage.py test`` does."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
django.setup()

_state = {}


def pytest_sessionstart(session):
    from django.test.utils import setup_test_environment, setup_databases

    setup_test_environment()
    _state['old_config'] = setup_databases(verbosity=0, interactive=False)


def pytest_sessionfinish(session, exitstatus):
    from django.test.utils import teardown_databases, teardown_test_environment

    if 'old_config' in _state:
        teardown_databases(_state['old_config'], verbosity=0)
        teardown_test_environment()
