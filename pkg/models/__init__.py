from .config import BenchConfig, SplitView
from .experiment import (
    ExperimentSpec,
    cmd_augment,
    cmd_compare,
    cmd_preview,
    cmd_score,
    cmd_validate,
)

__all__ = [
    'BenchConfig',
    'SplitView',
    'ExperimentSpec',
    'cmd_augment',
    'cmd_compare',
    'cmd_preview',
    'cmd_score',
    'cmd_validate',
]
