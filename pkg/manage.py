#!/usr/bin/env python
"""Command-line entry point: rate_study, verify, tau and the usual Django commands."""
import os
import sys


def main():
    """Run a management command."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages listed in "
            "requirements.txt into the active environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
