"""
URL configuration for the regularization laboratory.

Studies saved with ``manage.py rate_study --save NAME`` are browsable as
JSON or CSV under ``/studies/``; both models are also in the admin.
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('', include('reglab.urls')),
]
