from django.urls import path
from . import views

urlpatterns = [
    path('api/runs/', views.RunListView.as_view(), name='run-list'),
    path('api/runs/<int:pk>/', views.RunDetailView.as_view(), name='run-detail'),

    path('api/gbf/', views.GbfTableView.as_view(), name='gbf-table'),
    path('api/quasienergies/', views.QuasienergyView.as_view(), name='quasienergies'),
]
