from .space import SearchSpace, ConstraintSpec, penalty
from .cma import CmaParameters, CmaState, Population, sample_population, update, repair_covariance
from .objective import PlacementObjective
from .optimize import OptimizeSettings, OptimizeResult, optimize
from .certificate import Certificate, certify, max_pairwise_slope

__all__ = [
    'SearchSpace',
    'ConstraintSpec',
    'penalty',
    'CmaParameters',
    'CmaState',
    'Population',
    'sample_population',
    'update',
    'repair_covariance',
    'PlacementObjective',
    'OptimizeSettings',
    'OptimizeResult',
    'optimize',
    'Certificate',
    'certify',
    'max_pairwise_slope'
]
