from django.core.management.base import BaseCommand, CommandError

from reglab.forms import VerifyForm
from reglab.verification import SUITES, run_suite


class Command(BaseCommand):
    help = "Run the seeded invariant suites and print PASS/FAIL per check."

    def add_arguments(self, parser):
        parser.add_argument('--suite', default='all', help="bregman, optimality, lemmas or all")
        parser.add_argument('--seed', type=int, default=0)

    def handle(self, *args, **options):
        form = VerifyForm(data={'suite': options['suite'], 'seed': options['seed']})
        if not form.is_valid():
            errors = '; '.join(' '.join(msgs) for msgs in form.errors.values())
            raise CommandError(errors, returncode=2)
        suite = form.cleaned_data['suite']
        names = SUITES if suite == 'all' else (suite,)

        failed = 0
        for name in names:
            for outcome in run_suite(name, form.cleaned_data['seed']):
                if outcome.passed:
                    self.stdout.write(self.style.SUCCESS(f"PASS {outcome.name}"))
                else:
                    failed += 1
                    self.stdout.write(self.style.ERROR(f"FAIL {outcome.name}: {outcome.detail}"))
        if failed:
            raise CommandError(f"{failed} check(s) failed", returncode=1)
