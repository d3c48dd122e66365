from django.contrib import admin

from .models import RateStudy, RateStudyRow


class RateStudyRowInline(admin.TabularInline):
    model = RateStudyRow
    extra = 0
    fields = ['delta', 'alpha', 'admissible', 'discrepancy', 'error_norm', 'd_j', 'd_g']
    readonly_fields = fields


@admin.register(RateStudy)
class RateStudyAdmin(admin.ModelAdmin):
    list_display = ['name', 'problem', 'penalty', 'rule', 'seed', 'created_at']
    list_filter = ['problem', 'penalty', 'rule']
    search_fields = ['name']
    inlines = [RateStudyRowInline]


@admin.register(RateStudyRow)
class RateStudyRowAdmin(admin.ModelAdmin):
    list_display = ['study', 'delta', 'alpha', 'admissible', 'error_norm']
    list_filter = ['admissible', 'study']
