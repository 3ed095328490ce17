"""Менеджеры сценариев эксперимента и артефактов."""

from bardina.managers.experiment_manager import ExperimentManager, ExperimentOutcome
from bardina.managers.report_manager import ReportManager

__all__ = [
    'ExperimentManager',
    'ExperimentOutcome',
    'ReportManager',
]
