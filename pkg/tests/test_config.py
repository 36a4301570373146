import pytest

from propfac.core.config import DEFAULT_SEED, SolverConfig, Tolerances
from propfac.core.errors import SchemaError


class TestSolverConfig:
    def test_defaults(self):
        config = SolverConfig()
        assert config.seed == DEFAULT_SEED
        assert config.tolerances == Tolerances()
        assert config.psi_degree_cap == 8

    @pytest.mark.parametrize("bezout,expected", [(1, 64), (4, 256), (10_000, 64 * 512)])
    def test_newton_starts(self, bezout, expected):
        assert SolverConfig().newton_starts(bezout) == expected

    def test_explicit_starts(self):
        assert SolverConfig(starts=10).newton_starts(8) == 10

    def test_overrides(self):
        config = SolverConfig().with_overrides({'seed': 3, 'trials': None,
                                                'tolerances': {'identity': 1e-6}})
        assert config.seed == 3
        assert config.trials == 20
        assert config.tolerances.identity == 1e-6
        assert config.tolerances.zero == 1e-12

    def test_no_overrides(self):
        config = SolverConfig()
        assert config.with_overrides(None) is config

    @pytest.mark.parametrize("overrides", [
        {'speed': 1},
        {'tolerances': {'speed': 1}},
        {'tolerances': {'identity': -1}},
        {'tolerances': {'identity': 'small'}},
        {'tolerances': [1e-6]},
    ])
    def test_rejects(self, overrides):
        with pytest.raises(SchemaError):
            SolverConfig().with_overrides(overrides)

    def test_to_dict(self):
        data = SolverConfig(seed=1).to_dict()
        assert data['seed'] == 1
        assert data['tolerances']['identity'] == 1e-9
        assert list(data)[0] == 'seed'

    def test_solver_thresholds_are_tolerances(self):
        data = SolverConfig().to_dict()['tolerances']
        assert data['coefficient'] == 1e-10
        assert data['fibre'] == 1e-8
        config = SolverConfig().with_overrides({'tolerances': {'coefficient': 1e-6}})
        assert config.tolerances.coefficient == 1e-6
