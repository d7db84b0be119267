"""
URL Configuration for the sideband app
"""

from django.urls import path
from . import views

urlpatterns = [
    path('table/', views.resonance_table, name='resonance_table'),
    path('check/', views.check_config, name='check_config'),
    path('map/dqd/', views.map_dqd, name='map_dqd'),
    path('map/rx/', views.map_rx, name='map_rx'),
    path('search/', views.search, name='search'),
]
