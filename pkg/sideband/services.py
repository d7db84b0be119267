"""
Sideband Service Layer

This file contains the operations both the management command and the HTTP
views call. Each method returns a result dict with 'success' set, so the
callers only decide how to show it: exit codes on the command line, status
codes over HTTP.
"""

from typing import Any, Dict, Optional, Sequence
import logging

from django.conf import settings

from .dynamics import simulate, sweep_decay
from .effective import check_constraints
from .exceptions import EXIT_VALIDATION, ConvergenceError, SidebandError
from .mapping import DqdParams, RxParams, dqd_spectrum, dqd_validity, geff_derivative_form, map_dqd, map_rx
from .models import to_ghz
from .resonance import classify_resonance, table_rows, two_photon_resonances
from .runconfig import RunConfig, unit_metadata, validation_report
from .search import SearchBounds, search_parameters
from .serializers import DqdParamsSerializer, RxParamsSerializer, SearchBoundsSerializer, flatten_errors

logger = logging.getLogger(__name__)


def _failure(error: SidebandError, operation: str) -> Dict[str, Any]:
    logger.error(f"{operation} failed: {error}")
    result = error.to_dict()
    result['exit_code'] = error.exit_code
    result['numerical'] = isinstance(error, ConvergenceError)
    return result


def _invalid(errors: Dict, operation: str) -> Dict[str, Any]:
    messages = flatten_errors(errors)
    logger.error(f"{operation} rejected: {messages}")
    return {
        'success': False,
        'message': 'Validation failed',
        'errors': messages,
        'relation': None,
        'exit_code': EXIT_VALIDATION,
        'numerical': False,
    }


class SidebandService:
    """
    Entry points for the toolkit. Every method catches the library's own
    errors and reports them in the result instead of raising.
    """

    @staticmethod
    def table() -> Dict[str, Any]:
        return {'success': True, 'rows': table_rows()}

    @staticmethod
    def check(config: RunConfig) -> Dict[str, Any]:
        """
        Validation report, resonance classification and constraint
        residuals for one config.
        """
        try:
            report = validation_report(config)
            sys = config.system()
            matches = classify_resonance(sys)
            constraints = check_constraints(sys, config.condition)
            logger.info(f"Checked {config.condition.label}: holding {report['conditions_holding']}")
            return {
                'success': True,
                'report': report,
                'resonances': [
                    {'condition': cond.label, 'constraints_ok': ok} for cond, ok in matches
                ],
                'two_photon_resonances': [list(pair) for pair in two_photon_resonances(sys)],
                'constraints': constraints.to_dict(),
                'metadata': unit_metadata(config.rates.convention),
            }
        except SidebandError as e:
            return _failure(e, 'check')

    @staticmethod
    def map_dqd(data: Dict[str, Any]) -> Dict[str, Any]:
        serializer = DqdParamsSerializer(data=data)
        if not serializer.is_valid():
            return _invalid(serializer.errors, 'map dqd')
        values = serializer.validated_data
        params = DqdParams(
            tunnel_2t=values['tunnel_2t_ghz'],
            bz=values['bz_ghz'],
            bx=values['bx_ghz'],
            g_charge=values['g_charge_ghz'],
            drive_amp_F=values['drive_amp_ghz'],
            drive_freq=values['drive_freq_ghz'],
            drive_phase=values['drive_phase'],
            eps0=values['eps0_ghz'],
        )
        try:
            qubit = map_dqd(params, values['mode'])
            result = {'success': True, 'mode': values['mode'], 'qubit': qubit.to_ghz_dict(), 'warnings': []}
            if values['mode'] == 'spin':
                spectrum = dqd_spectrum(params)
                result['spectrum'] = spectrum.to_dict()
                result['warnings'] = dqd_validity(params, spectrum)
            logger.info(f"Mapped DQD ({values['mode']}): omega/2pi = {to_ghz(qubit.omega):.6g} GHz")
            return result
        except SidebandError as e:
            return _failure(e, 'map dqd')

    @staticmethod
    def map_rx(data: Dict[str, Any]) -> Dict[str, Any]:
        serializer = RxParamsSerializer(data=data)
        if not serializer.is_valid():
            return _invalid(serializer.errors, 'map rx')
        values = serializer.validated_data
        params = RxParams(
            tunnel_t=values['tunnel_ghz'],
            delta_hubbard=values['hubbard_ghz'],
            g_charge=values['g_charge_ghz'],
            exchange_jl=values.get('exchange_left_ghz'),
            exchange_jr=values.get('exchange_right_ghz'),
            drive_freq=values.get('drive_freq_ghz'),
            rabi=values['rabi_ghz'],
        )
        try:
            qubit = map_rx(params)
            logger.info(f"Mapped RX qubit: g/2pi = {to_ghz(qubit.g):.6g} GHz")
            return {
                'success': True,
                'qubit': qubit.to_ghz_dict(),
                'xi': params.xi,
                'g_derivative_ghz': geff_derivative_form(params),
                'warnings': params.warnings(),
            }
        except SidebandError as e:
            return _failure(e, 'map rx')

    @staticmethod
    def search(data: Dict[str, Any], threads: Optional[int] = None,
               max_limit: Optional[int] = None) -> Dict[str, Any]:
        """
        Ranked candidates. The command line returns all of them unless asked
        for fewer; max_limit caps the count for callers that need a bound.
        """
        serializer = SearchBoundsSerializer(data=data)
        if not serializer.is_valid():
            return _invalid(serializer.errors, 'search')
        values = dict(serializer.validated_data)
        condition = values.pop('condition')
        limit = values.pop('limit')
        if max_limit is not None:
            limit = max_limit if limit is None else min(limit, max_limit)
        threads = settings.SIDEBAND_THREADS if threads is None else threads
        try:
            candidates = search_parameters(condition, SearchBounds(**values), threads=threads, limit=limit)
            return {
                'success': True,
                'condition': condition.label,
                'count': len(candidates),
                'candidates': [c.to_row() for c in candidates],
            }
        except SidebandError as e:
            return _failure(e, 'search')

    @staticmethod
    def simulate(config: RunConfig, check_convergence: bool = True, sample_every: int = 0) -> Dict[str, Any]:
        try:
            sys = config.system()
            dt = config.dt_ns if config.dt_ns is not None else sys.tau / settings.SIDEBAND_STEPS_PER_PERIOD
            outcome = simulate(
                sys, config.condition, config.initial_state, rates=config.rates, dt=dt,
                check_convergence=check_convergence, sample_every=sample_every,
            )
            outcome.metadata.update(unit_metadata(
                config.rates.convention,
                condition=config.condition.label,
                exactify=config.exactify,
                tau_m_ns=sys.tau_m,
            ))
            logger.info(f"Simulated {config.condition.label}: F0 = {outcome.f0:.6f}")
            return {'success': True, 'outcome': outcome.to_dict()}
        except SidebandError as e:
            return _failure(e, 'simulate')

    @staticmethod
    def sweep(config: RunConfig, gamma_grid: Sequence[float], kappa_grid: Sequence[float],
              threads: Optional[int] = None) -> Dict[str, Any]:
        threads = settings.SIDEBAND_THREADS if threads is None else threads
        try:
            sys = config.system()
            dt = config.dt_ns if config.dt_ns is not None else sys.tau / settings.SIDEBAND_STEPS_PER_PERIOD
            records = sweep_decay(
                sys, config.condition, gamma_grid, kappa_grid, config.initial_state,
                dt=dt, convention=config.rates.convention, threads=threads,
            )
            logger.info(f"Sweep over {len(records)} points finished")
            return {
                'success': True,
                'rows': [
                    {'gamma_khz': r.gamma_khz, 'kappa_khz': r.kappa_khz, 'error': r.error} for r in records
                ],
                'metadata': unit_metadata(
                    config.rates.convention,
                    condition=config.condition.label,
                    dt_ns=dt,
                    n_max=sys.n_max,
                    exactify=config.exactify,
                ),
            }
        except SidebandError as e:
            return _failure(e, 'sweep')
