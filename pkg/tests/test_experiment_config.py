import math

import pytest

from config.experiment import ExperimentConfig, parse_angle
from core.exceptions import ConfigError


class TestParseAngle:
    """Angles written with pi."""

    @pytest.mark.parametrize('text, value', [
        ('2pi', 2 * math.pi),
        ('2*pi', 2 * math.pi),
        ('pi/2', 0.5 * math.pi),
        ('pi', math.pi),
        (' 1.5 ', 1.5),
        ('3pi/4', 0.75 * math.pi),
    ])
    def test_values(self, text, value):
        assert parse_angle(text) == pytest.approx(value, rel=1e-15)

    def test_garbage(self):
        with pytest.raises(ValueError):
            parse_angle('half')


class TestExperimentConfig:
    """Parsing, validation and round trips of experiment files."""

    def test_defaults_are_valid(self):
        config = ExperimentConfig().validate()
        assert config.k == 1
        assert config.mode == (1, 1)
        assert not config.hierarchical

    def test_round_trip(self):
        config = ExperimentConfig(
            omega=1.25, degree=3, regularity=1, schedule=(2, 4, 8), mu=0.35,
            mesh='hierarchical', hierarchical_basis='nurbs', n_ev=4, mode=(2, 1),
            rate_targets=(('h1', 1.0), ('l2', 2.0)),
            variants=((3, 2, 'auto'), (3, 0, 0.5)), output='out/run.csv',
        )
        assert ExperimentConfig.from_text(config.to_text()) == config

    def test_spectrum_mode_round_trip(self):
        config = ExperimentConfig(mode=None, n_ev=0)
        parsed = ExperimentConfig.from_text(config.to_text())
        assert parsed.mode is None
        assert parsed.n_ev == 0

    def test_from_text(self):
        config = ExperimentConfig.from_text("OMEGA=pi/2\nDEGREE=4\nSCHEDULE=3,6\nMU=mode\n# comment\n")
        assert config.omega == pytest.approx(0.5 * math.pi)
        assert config.degree == 4
        assert config.schedule == (3, 6)
        assert config.mu == 'mode'
        assert config.regularity is None

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_text("DEGRE=3\n")

    def test_unparsable_value(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_text("DEGREE=two\n")

    def test_load(self, tmp_path):
        path = tmp_path / 'experiment.env'
        path.write_text("DEGREE=3\nMODE=0,2\n")
        config = ExperimentConfig.load(str(path))
        assert config.degree == 3
        assert config.mode == (0, 2)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(str(tmp_path / 'missing.env'))

    @pytest.mark.parametrize('overrides', [
        {'schedule': (8, 4)},
        {'schedule': ()},
        {'degree': 1},
        {'regularity': 2},
        {'mu': 1.5},
        {'mu': 'steep'},
        {'mesh': 'triangles'},
        {'omega': 7.0},
        {'mode': (1, 0)},
        {'rate_targets': (('energy', 1.0),)},
        {'variants': ((2, 2, 'auto'),)},
        {'mesh': 'hierarchical', 'schedule': (4, 6)},
        {'mesh': 'hierarchical', 'schedule': (4, 8)},
        {'hierarchical_basis': 'truncated'},
    ])
    def test_validation(self, overrides):
        with pytest.raises(ConfigError):
            ExperimentConfig(**overrides).validate()

    def test_all_problems_reported(self):
        with pytest.raises(ConfigError, match='DEGREE.*MESH'):
            ExperimentConfig(degree=1, regularity=0, mesh='triangles').validate()

    def test_resolved_mu(self):
        assert ExperimentConfig().resolved_mu() == pytest.approx(0.225)
        assert ExperimentConfig().resolved_mu(degree=3) == pytest.approx(0.15)
        assert ExperimentConfig(mu='mode', mode=(2, 1)).resolved_mu() == 1.0
        assert ExperimentConfig(mu=0.4).resolved_mu() == 0.4

    def test_hierarchy_levels(self):
        config = ExperimentConfig(mesh='hierarchical', schedule=(2, 4, 8), angular_ratio=1).validate()
        assert [config.hierarchy_levels(J1) for J1 in config.schedule] == [1, 2, 3]
        assert ExperimentConfig(mesh='hierarchical', schedule=(8, 16)).validate().hierarchy_levels(8) == 5

    def test_with_overrides_skips_none(self):
        config = ExperimentConfig().with_overrides(degree=3, mu=None)
        assert config.degree == 3
        assert config.mu == 'auto'
