"""
Sideband API Views

Read-only endpoints over the service layer: the resonance table, config
checks, the two qubit mappings and the parameter search. Bad input comes back
as 400, numerical failures as 422.
"""

from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response
import logging

from .exceptions import SidebandError
from .runconfig import config_from_fields
from .services import SidebandService

logger = logging.getLogger(__name__)

API_SEARCH_LIMIT = 1000


def _respond(result, success_status=status.HTTP_200_OK):
    """Turns a service result dict into a Response with the right status."""
    if result['success']:
        return Response(result, status=success_status)
    failure = status.HTTP_422_UNPROCESSABLE_ENTITY if result.get('numerical') else status.HTTP_400_BAD_REQUEST
    return Response({
        'message': result['message'],
        'errors': result.get('errors', []),
        'relation': result.get('relation'),
    }, status=failure)


@api_view(['GET'])
def resonance_table(request):
    """
    Lists the nine resonance conditions with their constraints,
    interactions and gates.
    """
    return _respond(SidebandService.table())


@api_view(['POST'])
def check_config(request):
    """
    Takes RunConfig fields as JSON and returns the validation report,
    which conditions hold and the constraint residuals.
    """
    try:
        config = config_from_fields(dict(request.data))
    except SidebandError as e:
        logger.error(f"Rejected config over HTTP: {e}")
        return _respond(e.to_dict())
    return _respond(SidebandService.check(config))


@api_view(['POST'])
def map_dqd(request):
    return _respond(SidebandService.map_dqd(request.data))


@api_view(['POST'])
def map_rx(request):
    return _respond(SidebandService.map_rx(request.data))


@api_view(['POST'])
def search(request):
    """
    Runs the integer search inline (one worker) and returns the ranked
    candidates, at most API_SEARCH_LIMIT of them.
    """
    return _respond(SidebandService.search(request.data, threads=1, max_limit=API_SEARCH_LIMIT))
