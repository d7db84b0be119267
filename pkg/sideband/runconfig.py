"""
Run Configurations and Output Files

This file reads the flat key = value config files (the shipped rc7.cfg and
rc9.cfg are the reference iSWAP and double-excitation points), turns them into
the parameter records, builds the validation report with the derived
quantities, parses sweep grids and writes the CSV and JSON result files.

Every frequency key carries its unit: _ghz for frequencies given as
omega/2pi, _khz for decay rates, _ns for times. Keys without a suffix are
rejected so that nobody has to guess which convention a number is in.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union
import csv
import io
import json
import logging
import math
import subprocess

import numpy as np

from . import __version__
from .effective import dispersive_shifts, exactify
from .exceptions import ValidationError
from .models import DecayRates, DrivenQubitParams, SystemParams, ghz, to_ghz, to_mhz
from .resonance import ResonanceCondition, classify_resonance, coupling_strength, two_photon_resonances
from .serializers import RunConfigSerializer, flatten_errors

logger = logging.getLogger(__name__)

# Keys that would be ambiguous without a unit suffix
FREQUENCY_STEMS = ('eta', 'omega_c', 'omega1', 'omega2', 'drive1', 'drive2', 'rabi1', 'rabi2', 'g1', 'g2')
RATE_STEMS = ('gamma1', 'gamma2', 'kappa')
TIME_STEMS = ('dt',)

# Output order for render_config
RENDER_ORDER = (
    'condition', 'eta_ghz', 'omega_c_ghz',
    'omega1_ghz', 'drive1_ghz', 'rabi1_ghz', 'g1_ghz', 'phase1',
    'omega2_ghz', 'drive2_ghz', 'rabi2_ghz', 'g2_ghz', 'phase2',
    'm', 'n_max', 'dt_ns', 'exactify', 'initial_state',
    'gamma1_khz', 'gamma2_khz', 'kappa_khz', 'rate_convention',
    'output', 'format',
)

FREQUENCY_CONVENTION = 'GHz values are omega/2pi'
CSV_FORMAT = '.12g'


@dataclass(frozen=True)
class RunConfig:
    condition: ResonanceCondition
    eta_ghz: float
    omega_c_ghz: float
    omega_ghz: Tuple[float, float]
    drive_ghz: Tuple[float, float]
    rabi_ghz: Tuple[float, float]
    g_ghz: Tuple[float, float]
    m: int
    phase: Tuple[float, float] = (0.0, 0.0)
    rates: DecayRates = field(default_factory=DecayRates)
    initial_state: Optional[str] = None
    dt_ns: Optional[float] = None
    n_max: int = 2
    exactify: bool = False
    output: Optional[str] = None
    format: Optional[str] = None

    @classmethod
    def from_validated(cls, data: Dict) -> 'RunConfig':
        return cls(
            condition=data['condition'],
            eta_ghz=data['eta_ghz'],
            omega_c_ghz=data['omega_c_ghz'],
            omega_ghz=(data['omega1_ghz'], data['omega2_ghz']),
            drive_ghz=(data['drive1_ghz'], data['drive2_ghz']),
            rabi_ghz=(data['rabi1_ghz'], data['rabi2_ghz']),
            g_ghz=(data['g1_ghz'], data['g2_ghz']),
            m=data['m'],
            phase=(data['phase1'], data['phase2']),
            rates=DecayRates(data['gamma1_khz'], data['gamma2_khz'], data['kappa_khz'], data['rate_convention']),
            initial_state=data.get('initial_state'),
            dt_ns=data.get('dt_ns'),
            n_max=data['n_max'],
            exactify=data['exactify'],
            output=data.get('output'),
            format=data.get('format'),
        )

    def to_fields(self) -> Dict[str, object]:
        values = {
            'condition': self.condition.label,
            'eta_ghz': self.eta_ghz,
            'omega_c_ghz': self.omega_c_ghz,
            'm': self.m,
            'n_max': self.n_max,
            'dt_ns': self.dt_ns,
            'exactify': self.exactify,
            'initial_state': self.initial_state,
            'gamma1_khz': self.rates.gamma1,
            'gamma2_khz': self.rates.gamma2,
            'kappa_khz': self.rates.kappa,
            'rate_convention': self.rates.convention,
            'output': self.output,
            'format': self.format,
        }
        for j in (1, 2):
            values[f'omega{j}_ghz'] = self.omega_ghz[j - 1]
            values[f'drive{j}_ghz'] = self.drive_ghz[j - 1]
            values[f'rabi{j}_ghz'] = self.rabi_ghz[j - 1]
            values[f'g{j}_ghz'] = self.g_ghz[j - 1]
            values[f'phase{j}'] = self.phase[j - 1]
        return values

    def qubits(self) -> Tuple[DrivenQubitParams, DrivenQubitParams]:
        return tuple(
            DrivenQubitParams.from_ghz(self.omega_ghz[j], self.drive_ghz[j], self.g_ghz[j],
                                       self.rabi_ghz[j], self.phase[j])
            for j in range(2)
        )

    def system(self) -> SystemParams:
        """
        The validated SystemParams, with w set from the condition and the
        couplings replaced by the exact ones when exactify is on.
        """
        sys = SystemParams.build(
            self.qubits(), ghz(self.omega_c_ghz), ghz(self.eta_ghz),
            self.m, self.n_max,
        )
        sys.require_valid(effective=True)
        sys = SystemParams(sys.qubits, sys.omega_c, sys.eta, sys.p, sys.q, sys.m,
                           self.condition.resonant_index(sys), sys.n_max)
        if self.exactify:
            sys = exactify(sys, self.condition)
        return sys


def _check_keys(raw: Dict[str, str]):
    known = set(RunConfigSerializer().fields)
    for key in raw:
        if key in known:
            continue
        if key in FREQUENCY_STEMS:
            raise ValidationError(f"Frequency key '{key}' needs a unit suffix ('{key}_ghz')",
                                  relation='frequency keys carry _ghz')
        if key in RATE_STEMS:
            raise ValidationError(f"Rate key '{key}' needs a unit suffix ('{key}_khz')",
                                  relation='rate keys carry _khz')
        if key in TIME_STEMS:
            raise ValidationError(f"Time key '{key}' needs a unit suffix ('{key}_ns')",
                                  relation='time keys carry _ns')
        raise ValidationError(f"Unknown key '{key}'", relation='known keys only')


def read_pairs(text: str) -> Dict[str, str]:
    """key = value lines; '#' starts a comment; duplicate keys are errors."""
    raw = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ValidationError(f"Line {number}: expected 'key = value'", relation='key = value')
        key, value = (part.strip() for part in line.split('=', 1))
        if key in raw:
            raise ValidationError(f"Line {number}: duplicate key '{key}'", relation='unique keys')
        raw[key] = value
    return raw


def parse_config(text: str) -> RunConfig:
    return config_from_fields(read_pairs(text))


def config_from_fields(raw: Dict[str, object]) -> RunConfig:
    """Same checks as parse_config for fields that arrive as a dict (HTTP bodies)."""
    _check_keys(raw)
    serializer = RunConfigSerializer(data=raw)
    if not serializer.is_valid():
        errors = flatten_errors(serializer.errors)
        logger.error(f"Config rejected: {errors}")
        raise ValidationError(errors[0], relation='config fields')
    config = RunConfig.from_validated(serializer.validated_data)
    logger.info(f"Loaded config for {config.condition.label}")
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ValidationError(f"Cannot read config {path}: {e}", relation='readable config')
    return parse_config(text)


def _render_value(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(config: RunConfig) -> str:
    values = config.to_fields()
    lines = [f"# {FREQUENCY_CONVENTION}; rates in kHz ({config.rates.convention})"]
    for key in RENDER_ORDER:
        value = values[key]
        if value is None:
            continue
        lines.append(f"{key} = {_render_value(value)}")
    return '\n'.join(lines) + '\n'


def validation_report(config: RunConfig) -> Dict:
    """
    Derived quantities for the config in reporting units:
    detunings and sidebands in GHz, J and chi in MHz, tau_m in ns.
    """
    sys = config.system()
    cond = config.condition
    shifts = dispersive_shifts(sys)
    report = {
        'condition': cond.label,
        'p': list(sys.p),
        'q': list(sys.q),
        'w': sys.w,
        'm': sys.m,
        'eta_ghz': to_ghz(sys.eta),
        'tau_ns': sys.tau,
        'tau_m_ns': sys.tau_m,
        'J_mhz': to_mhz(coupling_strength(sys, cond)) if cond.holds(sys) else None,
        'chi1_mhz': to_mhz(shifts.chi1),
        'chi2_mhz': to_mhz(shifts.chi2),
        'conditions_holding': [c.label for c, _ in classify_resonance(sys)],
        'constraints_ok': cond.constraints_satisfied(sys),
        'two_photon_resonances': [list(pair) for pair in two_photon_resonances(sys)],
        'warnings': sys.warnings(),
    }
    for j in (1, 2):
        qubit = sys.qubits[j - 1]
        report[f'Delta{j}_ghz'] = to_ghz(sys.cavity_detuning(j))
        report[f'Delta{j}_plus_ghz'] = to_ghz(sys.sideband(j, 1))
        report[f'Delta{j}_minus_ghz'] = to_ghz(sys.sideband(j, -1))
        report[f'W{j}_ghz'] = to_ghz(sys.dressed(j))
        report[f'g{j}_ghz'] = to_ghz(qubit.g)
        report[f'g{j}_over_W{j}'] = qubit.g / sys.dressed(j)
    if cond in (ResonanceCondition.RC7, ResonanceCondition.RC9) and cond.holds(sys) and sys.m > 0 \
            and not config.exactify:
        report['exact'] = _exact_rows(sys, cond)
    if report['two_photon_resonances']:
        report['warnings'].append("Two-photon cross resonance mu_1 = -mu_2 present")
    for message in report['warnings']:
        logger.warning(message)
    return report


def _exact_rows(sys: SystemParams, cond: ResonanceCondition) -> Dict[str, float]:
    """J and chi at the couplings that satisfy the gate constraints exactly."""
    exact = exactify(sys, cond)
    shifts = dispersive_shifts(exact)
    return {
        'g1_ghz': to_ghz(exact.qubits[0].g),
        'g2_ghz': to_ghz(exact.qubits[1].g),
        'J_mhz': to_mhz(coupling_strength(exact, cond)),
        'chi1_mhz': to_mhz(shifts.chi1),
        'chi2_mhz': to_mhz(shifts.chi2),
    }


def parse_grid(text: str) -> List[float]:
    """
    Sweep grids: 'min:max:logN' gives N points per decade, 'min:max:N' gives
    N evenly spaced points, and 'a,b,c' is an explicit list.
    """
    text = text.strip()
    try:
        if ':' not in text:
            values = [float(part) for part in text.split(',') if part.strip()]
        else:
            low, high, count = text.split(':')
            low, high = float(low), float(high)
            if count.startswith('log'):
                per_decade = int(count[3:])
                if low <= 0 or high < low or per_decade < 1:
                    raise ValueError
                steps = int(math.floor(per_decade * math.log10(high / low) + 1e-9))
                values = [low * 10.0 ** (k / per_decade) for k in range(steps + 1)]
                values[-1] = high if math.isclose(values[-1], high, rel_tol=1e-9) else values[-1]
            else:
                points = int(count)
                if points < 1 or high < low:
                    raise ValueError
                values = np.linspace(low, high, points).tolist()
    except ValueError:
        raise ValidationError(f"Bad grid '{text}'", relation='grid min:max:logN')
    if not values:
        raise ValidationError(f"Empty grid '{text}'", relation='grid non-empty')
    return values


def version_stamp() -> str:
    """Package version plus the short commit hash when run from a checkout."""
    try:
        commit = subprocess.run(
            ['git', 'rev-parse', '--short', 'HEAD'], capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        commit = ''
    return f"{__version__}+{commit}" if commit else __version__


def unit_metadata(rate_convention: str, **extra) -> Dict[str, object]:
    meta = {
        'frequency_convention': FREQUENCY_CONVENTION,
        'rate_units': 'kHz',
        'rate_convention': rate_convention,
        'version': version_stamp(),
    }
    meta.update(extra)
    return meta


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), CSV_FORMAT)
    return str(value)


def write_csv(stream: TextIO, columns: Sequence[str], rows: Iterable[Dict], metadata: Dict):
    """
    '# key: value' metadata lines, a header, then one line per row with
    floats at 12 significant digits.
    """
    for key in sorted(metadata):
        stream.write(f"# {key}: {metadata[key]}\n")
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[column]) for column in columns])


def population_table(outcome: Dict) -> Tuple[List[str], List[Dict]]:
    """
    Columns and rows for writing a simulation outcome as CSV: one row per
    population sample, or a single row for the final state when nothing was
    sampled. Basis state 'eg,1' becomes column 'p_eg_1'.
    """
    columns = ['t_ns'] + [f"p_{label.replace(',', '_')}" for label in outcome['basis']]
    samples = outcome.get('samples') or [
        {'t_ns': outcome['time_ns'], 'populations': outcome['final_populations']},
    ]
    rows = [dict(zip(columns, [sample['t_ns'], *sample['populations']])) for sample in samples]
    return columns, rows


def csv_text(columns: Sequence[str], rows: Iterable[Dict], metadata: Dict) -> str:
    buffer = io.StringIO()
    write_csv(buffer, columns, rows, metadata)
    return buffer.getvalue()


def json_text(payload: Dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + '\n'


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, ResonanceCondition):
        return value.label
    if isinstance(value, Enum):
        return value.value
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def write_output(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    logger.info(f"Wrote {path}")
    return path
