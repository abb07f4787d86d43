"""
Rank dynamics measures

Per-rank measures computed from the occupancy matrix of a fixed-depth
ranking series (matrix[t, k-1] = code of the element at rank k, time t):

    d(k)  rank diversity       distinct occupants of rank k / T
    p(k)  change probability   fraction of consecutive snapshots where the occupant changes
    E(k)  rank entropy         normalized Shannon entropy of the occupants of rank k
    C(k)  rank complexity      4 E(k) (1 - E(k))
    Omega closure index        N / number of distinct elements ever in the top N

Diversity and change probability are fitted with the sigmoid
Phi((log10 k - mu) / sigma), the cumulative of a Gaussian in log10 rank.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy.special import ndtr
from scipy.stats import entropy as shannon_entropy

from config import FittingSettings, as_dict
from core_data import RankingSeries, truncate_top_n
from errors import DegenerateCurve, OutOfRange, OutOfRangeEntropy, TooFewSnapshots
from gof import r_squared
from multistart import MultiStartOptimizer

logger = logging.getLogger(__name__)

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
SIGMA_FLOOR = 1e-9


class OccupancyHistogram(BaseModel):
    """How often each element occupied one rank over the T snapshots"""
    rank: int
    counts: Dict[str, int]
    total: int


class SigmoidFit(BaseModel):
    mu: float
    sigma: float
    r_squared: float


class DynamicsProfile(BaseModel):
    """All per-rank measures of one series"""
    N: int
    T: int
    d: List[float]
    p_change: List[float]
    entropy: List[float]
    complexity: List[float]
    closure: float
    sigmoid: Optional[SigmoidFit] = None
    p_sigmoid: Optional[SigmoidFit] = None

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "T": self.T,
            "d": list(self.d),
            "p_change": list(self.p_change),
            "entropy": list(self.entropy),
            "complexity": list(self.complexity),
            "closure": self.closure,
            "sigmoid": as_dict(self.sigmoid) if self.sigmoid is not None else None,
            "p_sigmoid": as_dict(self.p_sigmoid) if self.p_sigmoid is not None else None,
        }

    def to_frame(self) -> pd.DataFrame:
        """Tidy table with columns k, d, p, E, C"""
        return pd.DataFrame({
            "k": np.arange(1, self.N + 1),
            "d": self.d,
            "p": self.p_change,
            "E": self.entropy,
            "C": self.complexity,
        })

    def to_csv_text(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")


# Matrix-level measures

def diversity_from_matrix(matrix: np.ndarray) -> np.ndarray:
    """d(k) for every rank of a T x N occupancy matrix"""
    matrix = np.asarray(matrix)
    T = matrix.shape[0]
    ordered = np.sort(matrix, axis=0)
    distinct = 1 + np.count_nonzero(np.diff(ordered, axis=0), axis=0)
    return distinct / float(T)


def change_from_matrix(matrix: np.ndarray) -> np.ndarray:
    """p(k) for every rank; needs T >= 2"""
    matrix = np.asarray(matrix)
    T = matrix.shape[0]
    if T < 2:
        raise TooFewSnapshots(T)
    changes = np.count_nonzero(matrix[1:] != matrix[:-1], axis=0)
    return changes / float(T - 1)


def _column_entropy(column: np.ndarray) -> float:
    _, counts = np.unique(column, return_counts=True)
    if counts.size == 1:
        return 0.0
    value = shannon_entropy(counts) / np.log(counts.size)
    return float(min(max(value, 0.0), 1.0))


def entropy_from_matrix(matrix: np.ndarray) -> np.ndarray:
    """E(k) for every rank; zero for ranks with a single occupant"""
    matrix = np.asarray(matrix)
    return np.array([_column_entropy(matrix[:, j]) for j in range(matrix.shape[1])])


def rank_complexity(entropy: float) -> float:
    """C = 4 E (1 - E)"""
    if not 0.0 <= entropy <= 1.0:
        raise OutOfRangeEntropy(entropy)
    return 4.0 * entropy * (1.0 - entropy)


# Series-level measures

def _column(series: RankingSeries, k: int) -> np.ndarray:
    N = series.require_uniform()
    if not 1 <= k <= N:
        raise OutOfRange("k", k, 1, N)
    return series.occupancy_matrix()[:, k - 1]


def occupancy_histogram(series: RankingSeries, k: int) -> OccupancyHistogram:
    column = _column(series, k)
    names = series.element_names
    codes, counts = np.unique(column, return_counts=True)
    return OccupancyHistogram(
        rank=k,
        counts={str(names[code]): int(n) for code, n in zip(codes, counts)},
        total=series.T,
    )


def rank_diversity(series: RankingSeries, k: int) -> float:
    column = _column(series, k)
    return len(np.unique(column)) / float(series.T)


def closure_index(series: RankingSeries, N: int) -> float:
    """
    Omega = N / Gamma, Gamma = distinct elements seen in ranks 1..N at any time

    Raises:
        InsufficientDepth: if a snapshot holds fewer than N entries
    """
    truncated = truncate_top_n(series, N)
    gamma = len(np.unique(truncated.occupancy_matrix()))
    return N / float(gamma)


def change_probability(series: RankingSeries, k: int) -> float:
    if series.T < 2:
        raise TooFewSnapshots(series.T)
    column = _column(series, k)
    return float(np.count_nonzero(column[1:] != column[:-1])) / (series.T - 1)


def rank_entropy(series: RankingSeries, k: int) -> float:
    return _column_entropy(_column(series, k))


# Sigmoid

def sigmoid_curve(ks, mu: float, sigma: float) -> np.ndarray:
    """Phi((log10 k - mu) / sigma)"""
    return ndtr((np.log10(np.asarray(ks, dtype=float)) - mu) / sigma)


def collapse_transform(k, fit: SigmoidFit):
    """z = (log10 k - mu) / sigma; works on scalars and arrays"""
    z = (np.log10(np.asarray(k, dtype=float)) - fit.mu) / fit.sigma
    return float(z) if np.ndim(z) == 0 else z


def _initial_mu(curve: np.ndarray, ks: np.ndarray) -> float:
    midrange = 0.5 * (curve.min() + curve.max())
    crossing = int(np.argmax(curve >= midrange))
    return float(np.log10(ks[crossing]))


def fit_sigmoid(
    curve: Sequence[float],
    ks: Optional[Sequence[int]] = None,
    settings: Optional[FittingSettings] = None,
) -> SigmoidFit:
    """
    Least squares fit of Phi((log10 k - mu) / sigma) to a per-rank curve

    Args:
        curve: Values in [0, 1] indexed by rank
        ks: Ranks of the curve values; 1..len(curve) when omitted
        settings: Tolerances shared with the distribution fits

    Raises:
        DegenerateCurve: fewer than 3 points or a constant curve
        FitDiverged: no optimizer start converged
    """
    settings = settings or FittingSettings()
    y = np.asarray(curve, dtype=float)
    k = np.arange(1, y.size + 1, dtype=float) if ks is None else np.asarray(ks, dtype=float)
    if y.size < 3:
        raise DegenerateCurve(f"Sigmoid fit needs at least 3 points, got {y.size}")
    if np.all(y == y[0]):
        raise DegenerateCurve(f"Curve is constant ({y[0]:g}); sigmoid is undetermined")
    logk = np.log10(k)

    def residuals(theta):
        mu, sigma = theta
        return ndtr((logk - mu) / sigma) - y

    def jacobian(theta):
        mu, sigma = theta
        z = (logk - mu) / sigma
        density = INV_SQRT_2PI * np.exp(-0.5 * z * z)
        return np.column_stack([-density / sigma, -density * z / sigma])

    mu0 = _initial_mu(y, k)
    optimizer = MultiStartOptimizer(
        residuals, jacobian,
        lower=[-np.inf, SIGMA_FLOOR],
        upper=[np.inf, np.inf],
        label="fit sigmoid",
        ftol=settings.ftol,
        max_iterations=settings.max_iterations,
    )
    best = optimizer.run([(mu0, 1.0), (mu0, 0.25)])
    mu, sigma = (float(v) for v in best.x)
    fit = SigmoidFit(mu=mu, sigma=sigma, r_squared=r_squared(y, ndtr((logk - mu) / sigma)))
    logger.debug(f"Sigmoid fit: mu={mu:.4f}, sigma={sigma:.4f}, R^2={fit.r_squared:.4f}")
    return fit


def _try_sigmoid(curve: np.ndarray, what: str, settings: Optional[FittingSettings]) -> Optional[SigmoidFit]:
    try:
        return fit_sigmoid(curve, settings=settings)
    except DegenerateCurve as e:
        logger.warning(f"Skipping sigmoid fit of {what}: {e}")
        return None


def compute_profile(series: RankingSeries, settings: Optional[FittingSettings] = None) -> DynamicsProfile:
    """
    Every per-rank measure of a fixed-depth series plus the closure index
    and sigmoid fits of d(k) and p(k)

    Raises:
        UnevenDepth: snapshots differ in depth
        TooFewSnapshots: T < 2
    """
    N = series.require_uniform()
    if series.T < 2:
        raise TooFewSnapshots(series.T)
    matrix = series.occupancy_matrix()

    d = diversity_from_matrix(matrix)
    p = change_from_matrix(matrix)
    E = entropy_from_matrix(matrix)
    C = [rank_complexity(e) for e in E.tolist()]
    closure = N / float(len(np.unique(matrix)))

    profile = DynamicsProfile(
        N=N,
        T=series.T,
        d=d.tolist(),
        p_change=p.tolist(),
        entropy=E.tolist(),
        complexity=C,
        closure=closure,
        sigmoid=_try_sigmoid(d, "d(k)", settings),
        p_sigmoid=_try_sigmoid(p, "p(k)", settings),
    )
    logger.info(f"Dynamics profile: N={N}, T={series.T}, closure={closure:.4f}")
    return profile
