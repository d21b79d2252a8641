#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# tests/test_config_manager.py
# Version: 1.2.0
# Description: Tests for configuration management
# Changelog:
# 1.2.0 - Docstrings on every test
# 1.1.0 - Estimator, solver and run sections
# 1.0.0 - Initial test implementation

import pytest

from src.config_manager import ConfigManager
from src.settings import DEFAULT_SETTINGS


@pytest.fixture(autouse=True)
def isolated_environment(tmp_path, monkeypatch):
    """No config/config.ini, .env or KCENT_* variables leak into a test"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv('KCENT_CONFIG', raising=False)
    monkeypatch.delenv('KCENT_LOG_LEVEL', raising=False)


class TestConfigManager:
    @pytest.fixture
    def config_manager(self, tmp_path):
        """Create a temporary config file and manager for testing"""
        config_content = """
[run]
theta = 0.25
eps = 0.3
seed = 42

[estimators]
edge_trace_constant = 12
jl_constant = 6

[cholesky]
exact_threshold = 0

[logging]
level = debug
file_path =
"""
        config_file = tmp_path / "test_config.ini"
        config_file.write_text(config_content)
        return ConfigManager(str(config_file))

    def test_config_loading(self, config_manager):
        """Test configuration loading"""
        assert config_manager.get_config('run', 'theta') == '0.25'
        assert config_manager.get_config('solver', 'dense_cap') == '2000'

    def test_run_defaults(self, config_manager):
        """Test run defaults"""
        assert config_manager.run_defaults() == {'theta': 0.25, 'eps': 0.3, 'seed': 42, 'jobs': 1}

    def test_estimator_settings(self, config_manager):
        """Test estimator settings"""
        settings = config_manager.estimator_settings()
        assert settings.edge_trace_constant == 12.0
        assert settings.jl_constant == 6.0
        assert settings.exact_threshold == 0
        assert settings.sm_trace_constant == DEFAULT_SETTINGS.sm_trace_constant

    def test_logging_config(self, config_manager):
        """Test logging config"""
        log_config = config_manager.logging_config()
        assert log_config['level'] == 'DEBUG'
        assert log_config['file_path'] == ''

    def test_builtin_defaults(self):
        """Test builtin defaults"""
        manager = ConfigManager()
        assert manager.config_file is None
        assert manager.estimator_settings() == DEFAULT_SETTINGS
        assert manager.run_defaults()['theta'] == 0.1

    def test_default_file_picked_up(self, tmp_path):
        """Test default file picked up"""
        (tmp_path / 'config').mkdir()
        (tmp_path / 'config' / 'config.ini').write_text("[run]\nseed = 7\n")
        manager = ConfigManager()
        assert manager.config_file == 'config/config.ini'
        assert manager.run_defaults()['seed'] == 7

    def test_environment_overrides(self, tmp_path, monkeypatch):
        """Test environment overrides"""
        config_file = tmp_path / "env.ini"
        config_file.write_text("[run]\nseed = 3\n")
        monkeypatch.setenv('KCENT_CONFIG', str(config_file))
        monkeypatch.setenv('KCENT_LOG_LEVEL', 'warning')
        manager = ConfigManager()
        assert manager.run_defaults()['seed'] == 3
        assert manager.logging_config()['level'] == 'WARNING'

    def test_missing_config(self, tmp_path):
        """Test handling of missing configuration file"""
        with pytest.raises(FileNotFoundError):
            ConfigManager(str(tmp_path / "nonexistent.ini"))

    @pytest.mark.parametrize("content, message", [
        ("[run]\ntheta = 0.9\n", "run.theta"),
        ("[run]\neps = zero\n", "run.eps"),
        ("[solver]\ndense_cap = 0\n", "solver.dense_cap"),
        ("[cholesky]\nsample_factor = -1\n", "cholesky.sample_factor"),
        ("[logging]\nlevel = LOUD\n", "logging.level"),
    ])
    def test_invalid_config(self, tmp_path, content, message):
        """Test handling of invalid configuration"""
        config_file = tmp_path / "invalid_config.ini"
        config_file.write_text(content)

        with pytest.raises(ValueError, match=message):
            ConfigManager(str(config_file))

    def test_all_problems_reported(self, tmp_path):
        """Test all problems reported"""
        config_file = tmp_path / "invalid_config.ini"
        config_file.write_text("[run]\ntheta = 2\nseed = -1\n")
        with pytest.raises(ValueError) as excinfo:
            ConfigManager(str(config_file))
        assert 'run.theta' in str(excinfo.value)
        assert 'run.seed' in str(excinfo.value)

    def test_unknown_keys(self, config_manager):
        """Test unknown keys"""
        with pytest.raises(KeyError):
            config_manager.get_config('run', 'missing')
        with pytest.raises(KeyError):
            config_manager.get_section('graphs')
        assert config_manager.get_section('cholesky')['exact_threshold'] == '0'
