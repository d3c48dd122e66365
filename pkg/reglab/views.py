import csv

from django.http import HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404
from django.views.decorators.http import require_GET

from .models import RateStudy, RateStudyRow
from .reports import csv_cell


@require_GET
def study_list(request):
    studies = [
        {
            'id': study.id,
            'name': study.name,
            'problem': study.problem,
            'penalty': study.penalty,
            'rule': study.rule,
            'seed': study.seed,
            'rows': study.rows.count(),
            'fitted_slopes': study.fitted_slopes,
        }
        for study in RateStudy.objects.all()
    ]
    return JsonResponse({'studies': studies})


@require_GET
def study_detail(request, study_id):
    study = get_object_or_404(RateStudy, id=study_id)
    return JsonResponse({'id': study.id, 'name': study.name, **study.to_report()})


@require_GET
def study_csv(request, study_id):
    study = get_object_or_404(RateStudy, id=study_id)
    response = HttpResponse(content_type='text/csv')
    response['Content-Disposition'] = f'attachment; filename="{study.name}.csv"'
    writer = csv.writer(response, lineterminator='\n')
    writer.writerow(RateStudyRow.COLUMNS)
    for row in study.rows.all():
        values = row.as_dict()
        writer.writerow(['' if values[name] is None else csv_cell(values[name]) for name in RateStudyRow.COLUMNS])
    return response
