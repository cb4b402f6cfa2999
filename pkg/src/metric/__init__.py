from .scores import MetricScore, msog, smig, detection_relabel, binary_entropy
from .correlation import pearson
from .report import (
    METRIC_COLUMNS,
    metric_row,
    metric_table,
    write_table,
    read_table,
    join_performance,
    performance_columns,
    correlation_table
)
from .chart_renderer import CorrelationChartRenderer

__all__ = [
    'MetricScore',
    'msog',
    'smig',
    'detection_relabel',
    'binary_entropy',
    'pearson',
    'METRIC_COLUMNS',
    'metric_row',
    'metric_table',
    'write_table',
    'read_table',
    'join_performance',
    'performance_columns',
    'correlation_table',
    'CorrelationChartRenderer'
]
