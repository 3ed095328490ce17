"""Модели данных: сетка, спектральные поля, параметры и записи итераций."""

from bardina.models.grid import GridSpec, Lattice
from bardina.models.field import SpectralField
from bardina.models.physics import PhysicalParams, ObserverPhysics
from bardina.models.schedule import RecoveryMode, RecoverySchedule
from bardina.models.envelope import BoundsEnvelope
from bardina.models.observation import ObservationStream, NudgedState
from bardina.models.records import (
    IterationStatus,
    ConditionResult,
    ConditionReport,
    IterationRecord,
    RecoveryResult,
)
from bardina.models.experiment import ExperimentConfig, RunReport
from bardina.models.command import CliCommand

__all__ = [
    'GridSpec',
    'Lattice',
    'SpectralField',
    'PhysicalParams',
    'ObserverPhysics',
    'RecoveryMode',
    'RecoverySchedule',
    'BoundsEnvelope',
    'ObservationStream',
    'NudgedState',
    'IterationStatus',
    'ConditionResult',
    'ConditionReport',
    'IterationRecord',
    'RecoveryResult',
    'ExperimentConfig',
    'RunReport',
    'CliCommand',
]
