from django.core.management.base import BaseCommand, CommandError

from reglab.forms import TauForm
from reglab.regparam import tau_of_hessian_lipschitz


class Command(BaseCommand):
    help = "Print tau(L_H) = (1 + ||T*||^2 / L_H)^(1/2)."

    def add_arguments(self, parser):
        parser.add_argument('--lh', type=float, required=True, help="Hessian-Lipschitz constant L_H")
        parser.add_argument('--opnorm', type=float, default=1.0, help="operator norm ||T*||")

    def handle(self, *args, **options):
        form = TauForm(data={'lh': options['lh'], 'opnorm': options['opnorm']})
        if not form.is_valid():
            errors = '; '.join(' '.join(msgs) for msgs in form.errors.values())
            raise CommandError(errors, returncode=2)
        tau = tau_of_hessian_lipschitz(form.cleaned_data['lh'], form.cleaned_data['opnorm'])
        self.stdout.write(format(tau, '.17g'))
