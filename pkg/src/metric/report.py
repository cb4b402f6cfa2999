import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import ConfigurationError, IngestError, UndefinedCorrelationError
from ..utils.io_utils import atomic_write
from .correlation import pearson

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ['name', 'mode', 'msog', 'smig', 'smig_per_voxel', 'n_covered',
                  'entropy_sum', 'h_total', 'delta_h']
SCORE_COLUMNS = ('msog', 'smig', 'smig_per_voxel')
CORRELATION_COLUMNS = ['metric', 'performance', 'pearson_r', 'n']


def metric_row(name, msog_score, smig_score):
    mode = msog_score.mode
    if msog_score.target:
        mode = f"{mode}:{msog_score.target}"
    return {
        'name': name,
        'mode': mode,
        'msog': msog_score.value,
        'smig': smig_score.value,
        'smig_per_voxel': smig_score.per_voxel,
        'n_covered': msog_score.n_covered,
        'entropy_sum': msog_score.entropy_sum,
        'h_total': msog_score.h_total,
        'delta_h': msog_score.delta_h,
    }


def metric_table(rows):
    return pd.DataFrame(list(rows), columns=METRIC_COLUMNS)


def write_table(table, path):
    """CSV with repr-precision floats, written atomically"""
    return atomic_write(path, lambda f: table.to_csv(f, index=False, lineterminator='\n'))


def read_table(path, required=('name',)):
    path = Path(path)
    try:
        table = pd.read_csv(path, float_precision='round_trip')
    except FileNotFoundError:
        raise IngestError(f"table not found: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IngestError(f"cannot parse table {path}: {e}") from e
    missing = [c for c in required if c not in table.columns]
    if missing:
        raise IngestError(f"{path} lacks columns: {', '.join(missing)}")
    return table


def join_performance(metrics, performance):
    """Inner join of metric rows and a performance table on `name`"""
    joined = metrics.merge(performance, on='name', how='inner', suffixes=('', '_perf'))
    dropped = set(metrics['name']) ^ set(performance['name'])
    if dropped:
        logger.warning("Rows without a partner in the other table: %s", ', '.join(sorted(dropped)))
    return joined


def performance_columns(performance):
    numeric = performance.drop(columns=['name']).select_dtypes(include=[np.number])
    if numeric.empty:
        raise ConfigurationError("performance table has no numeric columns")
    return list(numeric.columns)


def correlation_table(joined, perf_columns, metrics=SCORE_COLUMNS):
    """Pearson r of every metric column against every performance column"""
    rows = []
    for metric in metrics:
        for perf in perf_columns:
            pair = joined[[metric, perf]].dropna()
            try:
                r = pearson(pair[metric], pair[perf])
            except UndefinedCorrelationError as e:
                logger.warning("No correlation for %s vs %s: %s", metric, perf, e)
                r = float('nan')
            rows.append({'metric': metric, 'performance': perf, 'pearson_r': r, 'n': len(pair)})
    return pd.DataFrame(rows, columns=CORRELATION_COLUMNS)
