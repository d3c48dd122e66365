from django.db import models, transaction

from .reports import report_payload


class RateStudyManager(models.Manager):
    @transaction.atomic
    def create_from_result(self, result, name):
        config = result.config
        payload = report_payload(result)
        study = self.create(
            name=name,
            problem=config['problem']['name'],
            penalty=config['penalty']['name'],
            rule=config['rule']['kind'],
            seed=config['seed'],
            config=payload['config'],
            fitted_slopes=payload['fitted_slopes'],
            summary={'table': payload['summary'], 'rate_constant': payload['rate_constant']},
        )
        RateStudyRow.objects.bulk_create([
            RateStudyRow(study=study, **{k: v for k, v in row.items() if k != 'checks'})
            for row in payload['rows']
        ])
        return study


class RateStudy(models.Model):
    name = models.CharField(max_length=100, unique=True)
    problem = models.CharField(max_length=20)
    penalty = models.CharField(max_length=30)
    rule = models.CharField(max_length=20)
    seed = models.IntegerField(default=0)
    config = models.JSONField(default=dict)
    fitted_slopes = models.JSONField(default=dict)
    summary = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    objects = RateStudyManager()

    class Meta:
        ordering = ['-created_at', 'name']
        verbose_name_plural = 'rate studies'

    def __str__(self):
        return f"{self.name} ({self.problem}, {self.penalty}, {self.rule})"

    def to_report(self):
        """The JSON report structure, without the per-row checks."""
        return {
            'rows': [row.as_dict() for row in self.rows.all()],
            'fitted_slopes': self.fitted_slopes,
            'summary': self.summary.get('table', []),
            'rate_constant': self.summary.get('rate_constant'),
            'config': self.config,
        }


class RateStudyRow(models.Model):
    COLUMNS = (
        'delta', 'alpha', 'admissible', 'discrepancy', 'error_norm',
        'd_j', 'd_j_sym', 'd_g', 'd_f', 'sym_residual',
    )

    study = models.ForeignKey(RateStudy, on_delete=models.CASCADE, related_name='rows')
    delta = models.FloatField()
    alpha = models.FloatField()
    admissible = models.BooleanField()
    discrepancy = models.FloatField()
    error_norm = models.FloatField()
    d_j = models.FloatField()
    d_j_sym = models.FloatField()
    d_g = models.FloatField()
    d_f = models.FloatField()
    sym_residual = models.FloatField(null=True)

    class Meta:
        ordering = ['study', '-delta']
        unique_together = ('study', 'delta')

    def __str__(self):
        return f"{self.study.name} - delta={self.delta:g}"

    def as_dict(self):
        return {name: getattr(self, name) for name in self.COLUMNS}
