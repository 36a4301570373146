"""Job specs and command dispatch shared by every CLI command."""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from .._version import __version__
from ..core.chevalley import basic_invariants, verify_chevalley
from ..core.config import SolverConfig
from ..core.errors import SchemaError
from ..core.factorize import invariant_map, solve_psi, verify_factorization
from ..core.polyalg import PolyMap
from ..core.propermap import Pseudoellipsoid, boundary_identity_check, multiplicity_estimate, orbit_check
from ..core.unigroup import FiniteUnitaryGroup, coset_decomposition, is_normal, reflection_subgroup

logger = logging.getLogger(__name__)

COMMANDS = ('closure', 'invariants', 'multiplicity', 'orbit-check', 'factorize', 'verify')

# payload keys checked before anything is computed
REQUIRED_KEYS = {
    'closure': ('dim', 'generators'),
    'invariants': (),
    'multiplicity': ('F',),
    'orbit-check': ('F', 'group', 'pseudoellipsoid'),
    'factorize': ('F', 'group', 'pseudoellipsoid'),
    'verify': ('psi', 'F', 'group', 'pseudoellipsoid'),
}

# which SolverConfig field a payload/flag "degree_cap" drives
DEGREE_FIELD = {'factorize': 'psi_degree_cap'}


@dataclass(frozen=True)
class JobSpec:
    command: str
    payload: Dict[str, Any]
    seed: Optional[int] = None
    tolerances: Optional[Dict[str, float]] = None

    @classmethod
    def from_dict(cls, data: Any) -> "JobSpec":
        if not isinstance(data, Mapping):
            raise SchemaError("a job must be a JSON object")
        unknown = set(data) - {'command', 'payload', 'seed', 'tolerances'}
        if unknown:
            raise SchemaError(f"unknown job field(s): {', '.join(sorted(unknown))}")
        command = data.get('command')
        if command not in COMMANDS:
            raise SchemaError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        payload = data.get('payload')
        if not isinstance(payload, Mapping):
            raise SchemaError("'payload' must be a JSON object")
        tolerances = data.get('tolerances')
        if tolerances is not None and not isinstance(tolerances, Mapping):
            raise SchemaError("'tolerances' must be a JSON object")
        return cls(command, dict(payload), _optional_int(data.get('seed'), 'seed', minimum=0),
                   dict(tolerances) if tolerances is not None else None)

    def validate(self):
        if self.command not in COMMANDS:
            raise SchemaError(f"unknown command {self.command!r}")
        if self.command == 'invariants':
            spec = self.payload.get('group', self.payload)
            if not isinstance(spec, Mapping) or not {'dim', 'generators'} <= set(spec):
                raise SchemaError("invariants needs a group spec with 'dim' and 'generators'")
        missing = [k for k in REQUIRED_KEYS[self.command] if k not in self.payload]
        if missing:
            raise SchemaError(f"{self.command} payload is missing: {', '.join(missing)}")

    def config(self, flags: Optional[Mapping[str, Any]] = None) -> SolverConfig:
        """Defaults, then payload fields, then job fields, then flags."""
        degree_field = DEGREE_FIELD.get(self.command, 'degree_cap')
        from_payload = {
            'seed': _optional_int(self.payload.get('seed'), 'seed', minimum=0),
            'tolerances': self.payload.get('tolerances'),
            'trials': _optional_int(self.payload.get('trials'), 'trials'),
            'order_cap': _optional_int(self.payload.get('order_cap'), 'order_cap'),
            'starts': _optional_int(self.payload.get('starts'), 'starts'),
            'workers': _optional_int(self.payload.get('workers'), 'workers'),
            degree_field: _optional_int(self.payload.get('degree_cap'), 'degree_cap'),
        }
        config = SolverConfig().with_overrides(from_payload)
        config = config.with_overrides({'seed': self.seed, 'tolerances': self.tolerances})
        if flags:
            flags = dict(flags)
            if 'degree_cap' in flags:
                flags[degree_field] = flags.pop('degree_cap')
            if flags.get('tol') is not None:
                flags['tolerances'] = {'identity': flags['tol']}
            flags.pop('tol', None)
            config = config.with_overrides(flags)
        return config


def _optional_int(value: Any, name: str, minimum: int = 1) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise SchemaError(f"'{name}' must be an integer >= {minimum}, got {value!r}")
    return value


def _group(spec: Any, config: SolverConfig) -> FiniteUnitaryGroup:
    if not isinstance(spec, Mapping):
        raise SchemaError("a group spec must be a JSON object")
    return FiniteUnitaryGroup.from_dict(spec, order_cap=config.order_cap,
                                        tol=config.tolerances.group_equality)


def _max_unitarity_defect(G: FiniteUnitaryGroup) -> float:
    eye = np.eye(G.dimension)
    return float(max(np.abs(g @ g.conj().T - eye).max() for g in G))


def _closure(payload: Dict, config: SolverConfig) -> Tuple[Dict, str]:
    G = _group(payload, config)
    ref = reflection_subgroup(G)
    orders = Counter(G.element_order(g) for g in G)
    return {
        'group': G.to_dict(),
        'element_orders': {str(k): v for k, v in sorted(orders.items())},
        'max_unitarity_defect': _max_unitarity_defect(G),
        'reflection_subgroup': {
            'order': ref.order,
            'normal': is_normal(G, ref),
            'cosets': len(coset_decomposition(G, ref)),
        },
    }, 'ok'


def _invariants(payload: Dict, config: SolverConfig) -> Tuple[Dict, str]:
    G = _group(payload.get('group', payload), config)
    basis = basic_invariants(G, config.degree_cap, config.tolerances.rank, config.workers)
    checks = verify_chevalley(basis, G, config.trials, config.tolerances.identity, config.seed)
    result = basis.to_dict()
    result['generators_text'] = [g.to_string() for g in basis.generators]
    result['checks'] = checks
    return result, 'verified' if checks['passed'] else 'failed'


def _multiplicity(payload: Dict, config: SolverConfig) -> Tuple[Dict, str]:
    F = PolyMap.from_dict(payload['F'])
    domain = Pseudoellipsoid.from_dict(payload['pseudoellipsoid']) if 'pseudoellipsoid' in payload else None
    estimate = multiplicity_estimate(F, config.trials, config, domain=domain)
    result = estimate.to_dict()
    result['bezout_number'] = F.bezout_number()
    result['newton_starts'] = config.newton_starts(F.bezout_number())
    if domain is not None:
        result['boundary_identity_residual'] = boundary_identity_check(domain, 200, config.seed)
    return result, 'consistent' if estimate.consistent else 'inconsistent'


def _orbit_check(payload: Dict, config: SolverConfig) -> Tuple[Dict, str]:
    F = PolyMap.from_dict(payload['F'])
    E = Pseudoellipsoid.from_dict(payload['pseudoellipsoid'])
    G = _group(payload['group'], config)
    result = orbit_check(F, G, E, config.trials, config)
    if result['failed']:
        status = 'failed'
    elif result['inconclusive']:
        status = 'inconclusive'
    else:
        status = 'passed'
    return result, status


def _factorize(payload: Dict, config: SolverConfig) -> Tuple[Dict, str]:
    F = PolyMap.from_dict(payload['F'])
    E = Pseudoellipsoid.from_dict(payload['pseudoellipsoid'])
    G = _group(payload['group'], config)
    P, _ = invariant_map(G, config)
    report = solve_psi(F, G, E, config.psi_degree_cap, config)
    result = report.to_dict()
    result['invariant_map'] = P.to_string()
    return result, report.status


def _verify(payload: Dict, config: SolverConfig) -> Tuple[Dict, str]:
    psi = PolyMap.from_dict(payload['psi'])
    F = PolyMap.from_dict(payload['F'])
    E = Pseudoellipsoid.from_dict(payload['pseudoellipsoid'])
    G = _group(payload['group'], config)
    result = verify_factorization(psi, F, G, E, config.identity_samples, config)
    return result, 'passed' if result['passed'] else 'failed'


HANDLERS: Dict[str, Callable[[Dict, SolverConfig], Tuple[Dict, str]]] = {
    'closure': _closure,
    'invariants': _invariants,
    'multiplicity': _multiplicity,
    'orbit-check': _orbit_check,
    'factorize': _factorize,
    'verify': _verify,
}


def run(job: JobSpec, flags: Optional[Mapping[str, Any]] = None) -> Dict:
    """Validate a job, run it and return the report.

    The report echoes the job's payload together with the seed and
    tolerances actually used.
    """
    job.validate()
    config = job.config(flags)
    logger.debug("running %s with seed %d", job.command, config.seed)
    result, status = HANDLERS[job.command](job.payload, config)
    return {
        'command': job.command,
        'version': __version__,
        'status': status,
        'seed': config.seed,
        'tolerances': config.tolerances.to_dict(),
        'config': config.to_dict(),
        'input': job.payload,
        'result': result,
    }
