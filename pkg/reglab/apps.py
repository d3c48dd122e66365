from django.apps import AppConfig


class ReglabConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'reglab'
    verbose_name = 'Regularization laboratory'
