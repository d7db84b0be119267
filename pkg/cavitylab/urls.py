"""
URL configuration for the sideband toolkit.

The HTTP side is small and read-only: tables, checks, qubit mappings and the
parameter search. Simulations and sweeps stay on the management command.
"""

from django.urls import path, include
from django.http import JsonResponse
from sideband import __version__


def api_root(request):
    """
    Root endpoint that shows available API endpoints.
    """
    return JsonResponse({
        'message': 'Sideband-resonance cavity QED toolkit',
        'version': __version__,
        'endpoints': {
            'table': '/sideband/table/',
            'check': '/sideband/check/',
            'map_dqd': '/sideband/map/dqd/',
            'map_rx': '/sideband/map/rx/',
            'search': '/sideband/search/',
            'docs': 'See README.md for the CLI'
        }
    })


urlpatterns = [
    path('api/', api_root, name='api-root'),
    path('sideband/', include('sideband.urls')),
]
