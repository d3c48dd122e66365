from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from reglab.exceptions import ReglabError, ReportWriteError, StudyAborted
from reglab.experiments import make_blur_problem, make_diagonal_problem, run_rate_study
from reglab.forms import RateStudyForm
from reglab.models import RateStudy
from reglab.operators import operator_norm
from reglab.penalties import PenaltyCatalogEntry
from reglab.regparam import make_rule
from reglab.reports import emit_report, render_report


def _bool(value):
    lowered = value.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(value)


class Command(BaseCommand):
    help = "Sweep noise levels on a test problem and report errors, Bregman divergences and fitted rates."

    def add_arguments(self, parser):
        parser.add_argument('--problem', default='diagonal', help="diagonal or blur")
        parser.add_argument('--n', type=int, default=64)
        parser.add_argument('--decay', type=float, default=None, help="singular value decay s (diagonal)")
        parser.add_argument('--width', type=float, default=None, help="Gaussian kernel width (blur)")
        parser.add_argument('--profile', default=None, help="true-solution profile: smooth, source or bump")
        parser.add_argument('--penalty', default='pseudo-huber-strong')
        parser.add_argument('--mu', type=float, default=None)
        parser.add_argument('--eps', type=float, default=None)
        parser.add_argument('--radius', type=float, default=None, help="certificate radius for quartic-strong")
        parser.add_argument('--rule', default='sqrt', help="sqrt, power or hessian-sqrt")
        parser.add_argument('--tau', type=float, default=None)
        parser.add_argument('--p', type=float, default=None)
        parser.add_argument('--deltas', default='', help="comma-separated, strictly decreasing noise levels")
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--repeats', type=int, default=1)
        parser.add_argument('--discrepancy-search', type=_bool, default=False)
        parser.add_argument('--workers', type=int, default=1)
        parser.add_argument('--out', default='',
                            help="report path, relative to the working directory; stdout when omitted")
        parser.add_argument('--format', default='json', help="csv or json")
        parser.add_argument('--save', default='', help="also store the study in the database under this name")

    def handle(self, *args, **options):
        form = RateStudyForm(data={name: options.get(name) for name in RateStudyForm.base_fields})
        if not form.is_valid():
            errors = '; '.join(f"{field}: {' '.join(msgs)}" for field, msgs in form.errors.items())
            raise CommandError(f"Invalid options: {errors}", returncode=2)
        opts = form.cleaned_data

        try:
            entry = PenaltyCatalogEntry(
                opts['penalty'], mu=opts['mu'], eps=opts['eps'],
                radius=opts['radius'] if opts['penalty'] == 'quartic-strong' else None,
            )
            if opts['problem'] == 'diagonal':
                problem = make_diagonal_problem(opts['n'], opts['decay'], opts['profile'], entry)
            else:
                problem = make_blur_problem(opts['n'], opts['width'], entry, opts['profile'])
            opnorm = operator_norm(problem.operator).upper
            rule = make_rule(opts['rule'], opnorm, tau=opts['tau'], p=opts['p'],
                             lh=entry.build().hessian_lipschitz)
        except ReglabError as exc:
            raise CommandError(str(exc), returncode=2)

        if opts['save'] and RateStudy.objects.filter(name=opts['save']).exists():
            raise CommandError(f"A study named '{opts['save']}' already exists.", returncode=2)

        try:
            result = run_rate_study(
                problem, rule, opts['deltas'], seed=opts['seed'], repeats=opts['repeats'],
                discrepancy_search=opts['discrepancy_search'], workers=opts['workers'], opnorm=opnorm,
            )
        except StudyAborted as exc:
            raise CommandError(str(exc), returncode=1)

        if opts['out']:
            try:
                path = emit_report(result, opts['format'], Path(opts['out']))
            except ReportWriteError as exc:
                raise CommandError(str(exc), returncode=1)
            self.stderr.write(f"Report written to {path}")
        else:
            self.stdout.write(render_report(result, opts['format']), ending='')

        if opts['save']:
            study = RateStudy.objects.create_from_result(result, opts['save'])
            self.stderr.write(f"Saved study '{study.name}' (id {study.id})")

        if result.violations:
            listed = ', '.join(f"{name} at delta={delta:g}" for delta, name in result.violations)
            raise CommandError(f"Checks failed: {listed}", returncode=1)
