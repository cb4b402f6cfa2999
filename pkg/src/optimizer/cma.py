"""CMA-ES with a rank-one covariance update on a delta-grid.

Sampling draws u ~ N(m, sigma^2 C) and snaps each draw to the grid; the
update moves the mean to the weighted recombination of the best candidates,
then adapts the two evolution paths, C and sigma.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np

from ..errors import OptimizerStateError
from ..utils.rng import keyed_rng

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-12


@dataclass(frozen=True)
class CmaParameters:
    n: int
    population: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_c: float
    c_sigma: float
    d_sigma: float
    c_1: float
    chi_n: float
    whiten_sigma_path: bool = False

    @classmethod
    def create(cls, n, population=None, mu=None, literal_covariance_rate=False,
               whiten_sigma_path=False):
        if n < 1:
            raise OptimizerStateError("search dimension must be at least 1")
        population = int(population or 4 + int(np.floor(3 * np.log(n))))
        mu = int(mu or population // 2)
        if not 1 <= mu <= population:
            raise OptimizerStateError(f"need 1 <= mu <= population, got {mu}, {population}")
        raw = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        weights = raw / raw.sum()
        mu_eff = 1.0 / np.sum(weights ** 2)
        c_c = 4.0 / (n + 4.0)
        c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
        d_sigma = 1.0 + 2.0 * max(0.0, np.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma
        # rank-one rate; the path decay c_c as covariance rate collapses C towards rank 1
        c_1 = c_c if literal_covariance_rate else 2.0 / ((n + 1.3) ** 2 + mu_eff)
        chi_n = np.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
        weights.setflags(write=False)
        return cls(n, population, mu, weights, float(mu_eff), c_c, float(c_sigma),
                   float(d_sigma), float(c_1), float(chi_n), bool(whiten_sigma_path))


@dataclass(frozen=True)
class CmaState:
    m: np.ndarray
    sigma: float
    C: np.ndarray
    p_c: np.ndarray
    p_sigma: np.ndarray
    k: int
    params: CmaParameters

    @classmethod
    def initial(cls, m0, sigma0, params):
        m0 = np.asarray(m0, dtype=np.float64)
        if m0.shape != (params.n,) or not np.all(np.isfinite(m0)):
            raise OptimizerStateError(f"initial mean must be a finite {params.n}-vector")
        if not (np.isfinite(sigma0) and sigma0 > 0):
            raise OptimizerStateError(f"initial sigma must be positive, got {sigma0}")
        n = params.n
        return cls(m0.copy(), float(sigma0), np.eye(n), np.zeros(n), np.zeros(n), 0, params)


@dataclass(frozen=True)
class Population:
    """Snapped candidates plus the raw draws they came from"""

    candidates: np.ndarray
    raw: np.ndarray


def _eigen(C):
    eigvals, B = np.linalg.eigh(C)
    return np.maximum(eigvals, 0.0), B


def sample_population(state, space, seed, size=None):
    """Draw `size` (default population) candidates from N(m, sigma^2 C).

    Candidate i of iteration k uses the stream (seed, k, i).
    """
    n = state.params.n
    size = size or state.params.population
    eigvals, B = _eigen(state.C)
    scale = np.sqrt(eigvals)
    raw = np.empty((size, n))
    for i in range(size):
        z = keyed_rng(seed, state.k, i).standard_normal(n)
        raw[i] = state.m + state.sigma * (B @ (scale * z))
    return Population(space.snap(raw), raw)


def repair_covariance(C):
    """Symmetrize, then lift eigenvalues to EIGEN_FLOOR * trace / n if any fall below"""
    C = (C + C.T) / 2.0
    n = len(C)
    floor = EIGEN_FLOOR * np.trace(C) / n
    eigvals, B = np.linalg.eigh(C)
    if eigvals.min() < floor:
        C = (B * np.maximum(eigvals, floor)) @ B.T
        C = (C + C.T) / 2.0
    return C


def update(state, ranked):
    """One CMA-ES step from candidates sorted by ascending objective"""
    p = state.params
    ranked = np.asarray(ranked, dtype=np.float64)
    if ranked.ndim != 2 or len(ranked) < p.mu or ranked.shape[1] != p.n:
        raise OptimizerStateError(f"need at least {p.mu} ranked {p.n}-vectors")
    if not np.all(np.isfinite(ranked[:p.mu])):
        raise OptimizerStateError("non-finite candidates in the selected set")

    m_new = p.weights @ ranked[:p.mu]
    step = (m_new - state.m) / state.sigma

    p_c = (1.0 - p.c_c) * state.p_c + np.sqrt(p.c_c * (2.0 - p.c_c) * p.mu_eff) * step

    sigma_step = step
    if p.whiten_sigma_path:
        eigvals, B = _eigen(state.C)
        inv_sqrt = 1.0 / np.sqrt(np.maximum(eigvals, EIGEN_FLOOR * eigvals.max()))
        sigma_step = B @ (inv_sqrt * (B.T @ step))
    p_sigma = ((1.0 - p.c_sigma) * state.p_sigma
               + np.sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff) * sigma_step)

    C = (1.0 - p.c_1) * state.C + p.c_1 * np.outer(p_c, p_c)
    C = repair_covariance(C)

    sigma = state.sigma * np.exp((p.c_sigma / p.d_sigma) * (np.linalg.norm(p_sigma) / p.chi_n - 1.0))

    if not (np.all(np.isfinite(m_new)) and np.all(np.isfinite(C)) and np.isfinite(sigma)
            and sigma > 0):
        raise OptimizerStateError(f"CMA-ES state became non-finite at iteration {state.k}")
    return replace(state, m=m_new, sigma=float(sigma), C=C, p_c=p_c, p_sigma=p_sigma,
                   k=state.k + 1)
