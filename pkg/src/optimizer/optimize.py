import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from ..config import Config
from ..errors import OptimizerStateError
from .cma import CmaParameters, CmaState, sample_population, update

logger = logging.getLogger(__name__)

LOG_COLUMNS = ['k', 'best_g', 'mean_g', 'sigma']
SIGMA0_SCALE = 0.3


@dataclass(frozen=True)
class OptimizeSettings:
    iterations: int = 100
    population: Optional[int] = None
    rng_seed: int = 0
    sigma0: Optional[float] = None
    mean0: Optional[tuple] = None
    whiten_sigma_path: bool = False
    literal_covariance_rate: bool = False
    workers: int = 1

    def __post_init__(self):
        if int(self.iterations) < 1:
            raise OptimizerStateError("iterations must be at least 1")

    @classmethod
    def from_config(cls, config=None, workers=1):
        section = (config or Config()).optimizer
        mean0 = section.get('mean0')
        return cls(iterations=int(section.get('iterations', 100)),
                   population=section.get('population'),
                   rng_seed=int(section.get('rng_seed', 0)),
                   sigma0=section.get('sigma0'),
                   mean0=None if mean0 is None else tuple(mean0),
                   whiten_sigma_path=bool(section.get('whiten_sigma_path', False)),
                   literal_covariance_rate=bool(section.get('literal_covariance_rate', False)),
                   workers=workers)


@dataclass
class OptimizeResult:
    best_u: np.ndarray
    best_g: float
    best_penalty: float
    feasible: bool
    status: str
    history: list
    log: pd.DataFrame
    evaluations: list = field(repr=False)
    state: CmaState = field(repr=False)


class _Tracker:
    """Best-ever bookkeeping over every evaluation"""

    def __init__(self):
        self.evaluations = []
        self.best = None
        self.best_feasible = None

    def record(self, u, g, pen):
        self.evaluations.append((u, g))
        entry = (g, pen, u)
        if self.best is None or g < self.best[0]:
            self.best = entry
        if pen == 0.0 and (self.best_feasible is None or g < self.best_feasible[0]):
            self.best_feasible = entry

    @property
    def best_g(self):
        return self.best[0] if self.best else float('inf')


def _score(objective, points, pool):
    scores = pool.map(objective, points) if pool else map(objective, points)
    return np.array([g if np.isfinite(g) else np.inf for g in map(float, scores)])


def optimize(objective, space, settings=None, penalty_fn=None, seed_placements=()):
    """Minimize objective(u) over the delta-grid of `space` with CMA-ES.

    `seed_placements` are full vectors scored as given before the first
    iteration; unless settings.mean0 is set, the search starts from the best
    of them. The result is the best feasible (penalty 0) candidate ever
    scored, or the best by objective when none was feasible.
    """
    settings = settings or OptimizeSettings.from_config()
    if penalty_fn is None:
        penalty_fn = getattr(objective, 'penalty', space.box_violation)

    params = CmaParameters.create(space.dim, settings.population,
                                  literal_covariance_rate=settings.literal_covariance_rate,
                                  whiten_sigma_path=settings.whiten_sigma_path)
    tracker = _Tracker()
    pool = ThreadPoolExecutor(max_workers=settings.workers) if settings.workers > 1 else None
    try:
        seeds = [np.asarray(u, dtype=np.float64) for u in seed_placements]
        if seeds:
            for u, g in zip(seeds, _score(objective, seeds, pool)):
                tracker.record(u, g, penalty_fn(u))
            logger.info("Scored %d seed placements, best G = %.6g", len(seeds), tracker.best_g)

        if settings.mean0 is not None:
            m0 = np.asarray(settings.mean0, dtype=np.float64)
            if len(m0) == space.full_dim:
                m0 = space.reduce(m0)
        elif seeds:
            start = tracker.best_feasible or tracker.best
            m0 = space.clamp(space.reduce(start[2]))
        else:
            m0 = space.center()
        sigma0 = settings.sigma0 or SIGMA0_SCALE * float(np.mean(space.widths))
        state = CmaState.initial(m0, sigma0, params)

        history, log_rows = [], []
        for k in range(int(settings.iterations)):
            population = sample_population(state, space, settings.rng_seed)
            full = [space.expand(x) for x in population.candidates]
            scores = _score(objective, full, pool)
            for u, g in zip(full, scores):
                tracker.record(u, g, penalty_fn(u))

            order = np.argsort(scores, kind='stable')
            finite = scores[np.isfinite(scores)]
            log_rows.append({'k': k, 'best_g': tracker.best_g,
                             'mean_g': float(finite.mean()) if len(finite) else float('nan'),
                             'sigma': state.sigma})
            history.append((k, tracker.best_g))
            logger.debug("k=%d best=%.6g sigma=%.4g", k, tracker.best_g, state.sigma)
            state = update(state, population.candidates[order])
    finally:
        if pool:
            pool.shutdown()

    if tracker.best_feasible is not None:
        best, status = tracker.best_feasible, 'ok'
    else:
        best, status = tracker.best, 'no_feasible'
        logger.warning("No feasible candidate was evaluated; returning the best by objective")
    g, pen, u = best
    logger.info("Optimization finished: G = %.6g, penalty = %.3g, status %s", g, pen, status)
    return OptimizeResult(np.asarray(u), float(g), float(pen), pen == 0.0, status, history,
                          pd.DataFrame(log_rows, columns=LOG_COLUMNS), tracker.evaluations, state)
