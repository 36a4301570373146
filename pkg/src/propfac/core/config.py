import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from .errors import SchemaError

DEFAULT_SEED = 20130917


@dataclass(frozen=True)
class Tolerances:
    zero: float = 1e-12            # coefficient pruning
    unitary: float = 1e-9          # U U* = I, entrywise
    group_equality: float = 1e-9   # element dedup in closure
    rank: float = 1e-8             # singular-value threshold
    identity: float = 1e-9         # randomized identity tests
    newton_residual: float = 1e-10
    root_dedup: float = 1e-6
    orbit: float = 1e-6
    rejection: float = 1e-6        # distance from Z_F and pi when sampling
    domain: float = 1e-8           # rho(x) <= domain counts as inside
    coefficient: float = 1e-10     # Psi coefficient grid
    fibre: float = 1e-8            # |F(x) - F(y)| for f-related points

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SolverConfig:
    seed: int = DEFAULT_SEED
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed_radius: float = 2.0
    max_newton_steps: int = 50
    starts: Optional[int] = None   # None: STARTS_PER_ROOT * min(bezout, MAX_BEZOUT)
    retries: int = 1
    workers: int = 1
    order_cap: int = 10_000
    degree_cap: int = 12
    psi_degree_cap: int = 8
    trials: int = 20
    identity_samples: int = 40

    STARTS_PER_ROOT = 64
    MAX_BEZOUT = 512

    def newton_starts(self, bezout: int) -> int:
        if self.starts is not None:
            return self.starts
        return self.STARTS_PER_ROOT * max(1, min(bezout, self.MAX_BEZOUT))

    def with_overrides(self, overrides: Optional[Mapping[str, Any]]) -> "SolverConfig":
        """Return a copy with top-level fields and a nested ``tolerances`` mapping replaced."""
        if not overrides:
            return self
        fields = {f.name for f in dataclasses.fields(self)}
        changes: Dict[str, Any] = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key == 'tolerances':
                changes['tolerances'] = _merge_tolerances(self.tolerances, value)
            elif key in fields:
                changes[key] = value
            else:
                raise SchemaError(f"unknown configuration key '{key}'")
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'seed_radius': self.seed_radius,
            'max_newton_steps': self.max_newton_steps,
            'starts': self.starts,
            'retries': self.retries,
            'order_cap': self.order_cap,
            'degree_cap': self.degree_cap,
            'psi_degree_cap': self.psi_degree_cap,
            'trials': self.trials,
            'identity_samples': self.identity_samples,
            'tolerances': self.tolerances.to_dict(),
        }


def _merge_tolerances(base: Tolerances, overrides: Any) -> Tolerances:
    if not isinstance(overrides, Mapping):
        raise SchemaError("'tolerances' must be an object of name -> value")
    names = {f.name for f in dataclasses.fields(base)}
    unknown = set(overrides) - names
    if unknown:
        raise SchemaError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
    try:
        values = {k: float(v) for k, v in overrides.items()}
    except (TypeError, ValueError):
        raise SchemaError("tolerance values must be numbers") from None
    if any(v <= 0 for v in values.values()):
        raise SchemaError("tolerance values must be positive")
    return dataclasses.replace(base, **values)
