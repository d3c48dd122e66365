"""``manage.py rate-study``: the hyphenated spelling of ``rate_study``."""
from .rate_study import Command as RateStudyCommand


class Command(RateStudyCommand):
    pass
