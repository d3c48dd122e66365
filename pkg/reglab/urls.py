from django.urls import path

from . import views

urlpatterns = [
    # Stored rate studies
    path('studies/', views.study_list, name='study_list'),
    path('studies/<int:study_id>/', views.study_detail, name='study_detail'),
    path('studies/<int:study_id>/csv/', views.study_csv, name='study_csv'),
]
