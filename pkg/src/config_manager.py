# src/config_manager.py
# Version: 1.1.0
# Description: Configuration management for the centrality toolkit
# Changelog:
# 1.1.0 - Built-in defaults, environment overrides and estimator settings
# 1.0.0 - Initial implementation with config validation

import configparser
import logging
import os
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from src.settings import EstimatorSettings

DEFAULT_CONFIG_FILE = 'config/config.ini'

DEFAULTS: Dict[str, Dict[str, str]] = {
    'run': {
        'theta': '0.1',
        'eps': '0.2',
        'seed': '0',
        'jobs': '1',
    },
    'estimators': {
        'edge_trace_constant': '192',
        'sm_trace_constant': '432',
        'hutchinson_constant': '48',
        'jl_constant': '24',
        'er_solver_constant': '48',
    },
    'cholesky': {
        'sample_factor': '1.0',
        'exact_threshold': '64',
    },
    'solver': {
        'dense_cap': '2000',
        'residual_floor': '1e-10',
        'max_iterations_factor': '20',
    },
    'logging': {
        'level': 'INFO',
        'file_path': 'logs/kcent.log',
        'max_size': '10485760',
        'backup_count': '5',
    },
}

POSITIVE_FLOATS = {
    'estimators': ['edge_trace_constant', 'sm_trace_constant', 'hutchinson_constant',
                   'jl_constant', 'er_solver_constant'],
    'cholesky': ['sample_factor'],
    'solver': ['residual_floor'],
}
NON_NEGATIVE_INTS = {
    'run': ['seed'],
    'cholesky': ['exact_threshold'],
    'logging': ['max_size', 'backup_count'],
}
POSITIVE_INTS = {
    'run': ['jobs'],
    'solver': ['dense_cap', 'max_iterations_factor'],
}


class ConfigManager:
    VERSION = "1.1.0"

    def __init__(self, config_file: Optional[str] = None):
        """Initialize configuration manager"""
        load_dotenv()
        self.logger = logging.getLogger(__name__)
        self.config_file = config_file or os.getenv('KCENT_CONFIG')
        self.config = self._load_config()
        self._apply_environment()
        self._validate_config()

        self.logger.info(
            f"ConfigManager v{self.VERSION} initialized with config file: "
            f"{self.config_file or 'built-in defaults'}"
        )

    def _load_config(self) -> configparser.ConfigParser:
        """Load built-in defaults, then the configuration file on top"""
        config = configparser.ConfigParser()
        config.read_dict(DEFAULTS)

        if self.config_file is None:
            if os.path.exists(DEFAULT_CONFIG_FILE):
                self.config_file = DEFAULT_CONFIG_FILE
            else:
                return config

        if not os.path.exists(self.config_file):
            raise FileNotFoundError(f"Configuration file not found: {self.config_file}")

        config.read(self.config_file)
        return config

    def _apply_environment(self) -> None:
        level = os.getenv('KCENT_LOG_LEVEL')
        if level:
            self.config['logging']['level'] = level.upper()

    def _validate_config(self) -> None:
        """Validate configuration settings"""
        problems: List[str] = []

        for key in ('theta', 'eps'):
            value = self._as_number(problems, 'run', key, float)
            if value is not None and not 0 < value <= 0.5:
                problems.append(f"run.{key} must lie in (0, 1/2], got {value}")

        for section, keys in POSITIVE_FLOATS.items():
            for key in keys:
                value = self._as_number(problems, section, key, float)
                if value is not None and not value > 0:
                    problems.append(f"{section}.{key} must be positive, got {value}")

        for section, keys in NON_NEGATIVE_INTS.items():
            for key in keys:
                value = self._as_number(problems, section, key, int)
                if value is not None and value < 0:
                    problems.append(f"{section}.{key} must be non-negative, got {value}")

        for section, keys in POSITIVE_INTS.items():
            for key in keys:
                value = self._as_number(problems, section, key, int)
                if value is not None and value < 1:
                    problems.append(f"{section}.{key} must be at least 1, got {value}")

        level = self.config['logging'].get('level', '').upper()
        if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            problems.append(f"logging.level is not a logging level: {level!r}")

        if problems:
            raise ValueError("Configuration validation failed:\n" + "\n".join(problems))

    def _as_number(self, problems: List[str], section: str, key: str, kind) -> Any:
        raw = self.config[section].get(key)
        if raw is None or raw.strip() == '':
            problems.append(f"Missing key in {section}: {key}")
            return None
        try:
            return kind(raw)
        except ValueError:
            problems.append(f"{section}.{key} is not a valid {kind.__name__}: {raw!r}")
            return None

    def get_config(self, section: str, key: str) -> str:
        """Get configuration value"""
        try:
            return self.config[section][key]
        except KeyError as e:
            self.logger.error(f"Configuration key not found: {section}.{key}")
            raise KeyError(f"Configuration not found: {section}.{key}") from e

    def get_section(self, section: str) -> Dict[str, Any]:
        """Get entire configuration section"""
        try:
            return dict(self.config[section])
        except KeyError as e:
            self.logger.error(f"Configuration section not found: {section}")
            raise KeyError(f"Section not found: {section}") from e

    def run_defaults(self) -> Dict[str, Any]:
        run = self.config['run']
        return {
            'theta': run.getfloat('theta'),
            'eps': run.getfloat('eps'),
            'seed': run.getint('seed'),
            'jobs': run.getint('jobs'),
        }

    def logging_config(self) -> Dict[str, Any]:
        section = self.config['logging']
        return {
            'level': section.get('level').upper(),
            'file_path': section.get('file_path'),
            'max_size': section.getint('max_size'),
            'backup_count': section.getint('backup_count'),
        }

    def estimator_settings(self) -> EstimatorSettings:
        estimators = self.config['estimators']
        cholesky = self.config['cholesky']
        solver = self.config['solver']
        return EstimatorSettings(
            edge_trace_constant=estimators.getfloat('edge_trace_constant'),
            sm_trace_constant=estimators.getfloat('sm_trace_constant'),
            hutchinson_constant=estimators.getfloat('hutchinson_constant'),
            jl_constant=estimators.getfloat('jl_constant'),
            er_solver_constant=estimators.getfloat('er_solver_constant'),
            sample_factor=cholesky.getfloat('sample_factor'),
            exact_threshold=cholesky.getint('exact_threshold'),
            dense_cap=solver.getint('dense_cap'),
            residual_floor=solver.getfloat('residual_floor'),
            max_iterations_factor=solver.getint('max_iterations_factor'),
            jobs=self.config['run'].getint('jobs'),
        )
