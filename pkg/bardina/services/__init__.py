"""Численные алгоритмы: спектральные операторы, истина, nudging и восстановление alpha."""

from bardina.services.config_service import ConfigService, parse_config
from bardina.services.snapshot_service import SnapshotService
from bardina.services.bardina import simulate_truth, iterate_truth
from bardina.services.nudging import iterate_nudged
from bardina.services.recovery import check_conditions, select_parameters, recovery_loop

__all__ = [
    'ConfigService',
    'parse_config',
    'SnapshotService',
    'simulate_truth',
    'iterate_truth',
    'iterate_nudged',
    'check_conditions',
    'select_parameters',
    'recovery_loop',
]
