"""
Integer Parameter Search

This file looks for operating points of the iSWAP (rc7) and double-excitation
(rc9) gates on the integer grid. For every (q1, q2, p1, p2) that satisfies the
resonance equality, the W-constraints and the well-definedness conditions, the
couplings are solved from the gate-time and shift-cancellation constraints for
each m, and kept if they land in the g window.

Work is split over disjoint q1 ranges and merged in a fixed order, so the
result does not depend on the number of workers.
"""

from dataclasses import dataclass
from multiprocessing import Pool
from typing import Dict, Iterator, List, Optional, Tuple
import logging
import math

from .dynamics import worker_count
from .effective import check_constraints, exact_couplings
from .exceptions import UnsupportedError, ValidationError
from .models import SystemParams, to_ghz
from .resonance import ResonanceCondition, two_photon_resonances

logger = logging.getLogger(__name__)

SEARCHABLE = (ResonanceCondition.RC7, ResonanceCondition.RC9)
DEFAULT_MAX_G_OVER_W = 0.2

CSV_COLUMNS = ('tau_m_ns', 'p1', 'p2', 'q1', 'q2', 'w', 'm', 'g1_ghz', 'g2_ghz',
               'g1_over_W1', 'g2_over_W2', 'J_tau_m')


@dataclass(frozen=True)
class SearchBounds:
    qmax: int
    pmax: int
    mmax: int
    eta_ghz: float
    omega_c_ghz: float = 7.0
    qmin: int = 1
    mmin: int = 1
    wmin: Optional[int] = None
    wmax: Optional[int] = None
    g_min_ghz: float = 0.0
    g_max_ghz: Optional[float] = None
    max_g_over_w: float = DEFAULT_MAX_G_OVER_W
    n_max: int = 2

    def validate(self) -> List[str]:
        errors = []
        if self.qmin < 1 or self.qmax < self.qmin:
            errors.append("q range is empty [1 <= qmin <= qmax]")
        if self.pmax < 1:
            errors.append("p range is empty [pmax >= 1]")
        if self.mmin < 1 or self.mmax < self.mmin:
            errors.append("m range is empty [1 <= mmin <= mmax]")
        if self.eta_ghz <= 0:
            errors.append("Base frequency must be positive [eta > 0]")
        if self.wmin is not None and self.wmax is not None and self.wmax < self.wmin:
            errors.append("w range is empty [wmin <= wmax]")
        if self.max_g_over_w <= 0:
            errors.append("Perturbative bound must be positive [g/W > 0]")
        return errors

    def w_allowed(self, w: int) -> bool:
        if self.wmin is not None and w < self.wmin:
            return False
        if self.wmax is not None and w > self.wmax:
            return False
        return True


@dataclass(frozen=True)
class SearchCandidate:
    system: SystemParams
    condition: ResonanceCondition
    w: int
    gate_phase: float
    max_residual: float

    @property
    def sort_key(self) -> Tuple:
        sys = self.system
        return (sys.tau_m, sys.p[0], sys.p[1], sys.q[0], sys.q[1])

    def to_row(self) -> Dict:
        sys = self.system
        g1, g2 = (qb.g for qb in sys.qubits)
        return {
            'tau_m_ns': sys.tau_m,
            'p1': sys.p[0],
            'p2': sys.p[1],
            'q1': sys.q[0],
            'q2': sys.q[1],
            'w': self.w,
            'm': sys.m,
            'g1_ghz': to_ghz(g1),
            'g2_ghz': to_ghz(g2),
            'g1_over_W1': g1 / sys.dressed(1),
            'g2_over_W2': g2 / sys.dressed(2),
            'J_tau_m': self.gate_phase,
        }


def _grid_tuples(cond: ResonanceCondition, bounds: SearchBounds, q1_values) -> Iterator[Tuple[int, int, int, int]]:
    """(p1, p2, q1, q2) with p1 + s1 q1 = p2 + s2 q2, both p non-zero."""
    s1, s2 = cond.sidebands
    for q1 in q1_values:
        for q2 in range(bounds.qmin, bounds.qmax + 1):
            for p1 in range(-bounds.pmax, bounds.pmax + 1):
                w = p1 + s1 * q1
                p2 = w - s2 * q2
                if p1 == 0 or p2 == 0 or abs(p2) > bounds.pmax:
                    continue
                if w == 0 or not bounds.w_allowed(w):
                    continue
                yield p1, p2, q1, q2


def _only_condition(sys: SystemParams, cond: ResonanceCondition) -> bool:
    holding = [c for c in ResonanceCondition if c.holds(sys)]
    return holding == [cond]


def _search_chunk(args) -> List[SearchCandidate]:
    cond, bounds, q1_values = args
    found = []
    for p1, p2, q1, q2 in _grid_tuples(cond, bounds, q1_values):
        if any(bounds.omega_c_ghz - p * bounds.eta_ghz <= 0 for p in (p1, p2)):
            continue
        base = SystemParams.from_grid(
            (p1, p2), (q1, q2), bounds.eta_ghz, bounds.omega_c_ghz, (0.0, 0.0), 1, bounds.n_max,
        )
        if base.well_definedness_errors() or cond.violated_constraints(base):
            continue
        if not _only_condition(base, cond) or two_photon_resonances(base):
            continue

        w = cond.resonant_index(base)
        for m in range(bounds.mmin, bounds.mmax + 1):
            sys = SystemParams(base.qubits, base.omega_c, base.eta, base.p, base.q, m, w, base.n_max)
            try:
                g1, g2 = exact_couplings(sys, cond)
            except ValidationError:
                # Wrong sign of w for this condition; no m will help
                break
            if not _couplings_allowed(sys, g1, g2, bounds):
                continue
            sys = sys.with_couplings(g1, g2)
            report = check_constraints(sys, cond)
            found.append(SearchCandidate(
                system=sys,
                condition=cond,
                w=w,
                gate_phase=report.gate_phase,
                max_residual=max((r.residual for r in report.residuals), default=0.0),
            ))
    return found


def _couplings_allowed(sys: SystemParams, g1: float, g2: float, bounds: SearchBounds) -> bool:
    for j, g in ((1, g1), (2, g2)):
        g_ghz = to_ghz(g)
        if g_ghz < bounds.g_min_ghz:
            return False
        if bounds.g_max_ghz is not None and g_ghz > bounds.g_max_ghz:
            return False
        if g / sys.dressed(j) > bounds.max_g_over_w:
            return False
    return True


def _chunks(bounds: SearchBounds, workers: int) -> List[List[int]]:
    values = list(range(bounds.qmin, bounds.qmax + 1))
    size = max(1, math.ceil(len(values) / max(workers, 1)))
    return [values[i:i + size] for i in range(0, len(values), size)]


def search_parameters(cond, bounds: SearchBounds, threads: int = 1,
                      limit: Optional[int] = None) -> List[SearchCandidate]:
    """
    Enumerates valid operating points for rc7 or rc9, ranked by
    (tau_m, p1, p2, q1, q2). An empty list is a valid answer.
    """
    cond = ResonanceCondition.parse(cond)
    if cond not in SEARCHABLE:
        raise UnsupportedError(
            f"Parameter search is only defined for rc7 and rc9, not {cond.label}",
            relation='condition in {7, 9}',
        )
    errors = bounds.validate()
    if errors:
        message = errors[0]
        raise ValidationError(message, relation=message[message.rfind('[') + 1:-1])

    workers = worker_count(threads)
    tasks = [(cond, bounds, chunk) for chunk in _chunks(bounds, workers)]
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            parts = pool.map(_search_chunk, tasks)
    else:
        parts = [_search_chunk(task) for task in tasks]

    candidates = sorted((c for part in parts for c in part), key=lambda c: c.sort_key)
    logger.info(f"Search for {cond.label} found {len(candidates)} candidates")
    if limit is not None:
        candidates = candidates[:limit]
    return candidates
