"""
Random-walk ranking model

Every step perturbs each element's rank k with Gaussian noise whose
standard deviation is proportional to k,

    k~ = k + G(0, k * sigma_hat)

and then unfolds the provisional positions k~ back into a permutation of
1..N.  Calibration searches for the sigma_hat whose replicate-averaged
rank diversity curve best matches an empirical one.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from config import WalkerSettings
from core_data import RankingSeries
from dynamics import SigmoidFit, diversity_from_matrix, fit_sigmoid
from errors import (
    DegenerateCurve, EmptyCurve, InvalidParams, LengthMismatch, OutOfRange,
    TooFewSnapshots, ZeroVariance,
)
from gof import r_squared
from parallel import replicate_rng, run_replicates

logger = logging.getLogger(__name__)

INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class WalkConfig(BaseModel):
    N: int
    T: int
    sigma_hat: float
    replicates: int = 1
    seed: int = 0

    def check(self) -> None:
        if self.N < 1:
            raise OutOfRange("N", self.N, 1, "inf")
        if self.T < 1:
            raise OutOfRange("T", self.T, 1, "inf")
        if not self.sigma_hat >= 0 or not np.isfinite(self.sigma_hat):
            raise OutOfRange("sigma_hat", self.sigma_hat, 0, "inf")
        if self.replicates < 1:
            raise OutOfRange("replicates", self.replicates, 1, "inf")
        if self.seed < 0:
            raise OutOfRange("seed", self.seed, 0, "inf")


class CalibrationResult(BaseModel):
    sigma_hat_star: float
    r2_model_fit: Optional[float] = None
    r2_data_vs_model: Optional[float] = None
    mse: float
    model_sigmoid: Optional[SigmoidFit] = None
    model_diversity: List[float]
    evaluations: int
    N: int
    T: int
    replicates: int
    seed: int
    sigma_lower: float
    sigma_upper: float


def element_names(N: int) -> List[str]:
    return [f"e{i}" for i in range(1, N + 1)]


def walk_step(ranks: np.ndarray, sigma_hat: float, rng: np.random.Generator) -> np.ndarray:
    """
    One step of the walk

    Args:
        ranks: ranks[i] is the current rank of element i (a permutation of 1..N)
        sigma_hat: Noise amplitude; 0 freezes the ranking
        rng: Random stream

    Returns:
        New ranks per element.  Ties in k~ fall back to the previous rank,
        then to the element index.
    """
    ranks = np.asarray(ranks)
    N = ranks.size
    if not np.array_equal(np.sort(ranks), np.arange(1, N + 1)):
        raise InvalidParams("ranks must be a permutation of 1..N")
    if sigma_hat < 0:
        raise OutOfRange("sigma_hat", sigma_hat, 0, "inf")

    provisional = ranks + rng.standard_normal(N) * ranks * sigma_hat
    order = np.lexsort((np.arange(N), ranks, provisional))
    updated = np.empty(N, dtype=np.int64)
    updated[order] = np.arange(1, N + 1)
    return updated


def _walk_matrix(N: int, T: int, sigma_hat: float, rng: np.random.Generator) -> np.ndarray:
    """T x N occupancy matrix of element indices; snapshot 0 is e1..eN in order"""
    matrix = np.empty((T, N), dtype=np.int64)
    ranks = np.arange(1, N + 1)
    elements = np.arange(N)
    for t in range(T):
        if t > 0:
            ranks = walk_step(ranks, sigma_hat, rng)
        matrix[t, ranks - 1] = elements
    return matrix


def simulate(config: WalkConfig) -> RankingSeries:
    """
    Synthetic series of T snapshots of elements e1..eN

    Uses the replicate-0 stream of config.seed, so identical configs give
    identical series.
    """
    config.check()
    matrix = _walk_matrix(config.N, config.T, config.sigma_hat, replicate_rng(config.seed, 0))
    logger.info(f"Simulated walk: N={config.N}, T={config.T}, sigma_hat={config.sigma_hat:g}, seed={config.seed}")
    return RankingSeries.from_matrix(matrix, element_names(config.N))


def replicate_diversity(
    N: int,
    T: int,
    sigma_hat: float,
    replicates: int = 10,
    seed: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """Model diversity curve d(k) averaged over replicate walks"""
    WalkConfig(N=N, T=T, sigma_hat=sigma_hat, replicates=replicates, seed=seed).check()

    def replicate(index: int) -> np.ndarray:
        return diversity_from_matrix(_walk_matrix(N, T, sigma_hat, replicate_rng(seed, index)))

    curves = run_replicates(replicate, replicates, workers)
    return np.mean(np.vstack(curves), axis=0)


def _golden_section(objective: Callable[[float], float], lower: float, upper: float,
                    tolerance: float) -> float:
    """Minimize a unimodal objective on [lower, upper]; returns the best point probed"""
    a, b = lower, upper
    c = b - INV_GOLDEN * (b - a)
    d = a + INV_GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tolerance:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_GOLDEN * (b - a)
            fd = objective(d)
    return c if fc <= fd else d


def calibrate_sigma(
    empirical_d: Sequence[float],
    N: int,
    T: int,
    replicates: int = 10,
    seed: int = 0,
    settings: Optional[WalkerSettings] = None,
    workers: int = 1,
) -> CalibrationResult:
    """
    Fit sigma_hat so the model diversity curve matches an empirical one

    The objective is the mean squared difference between empirical_d and
    the replicate-averaged model curve.  Every sigma_hat is evaluated on
    the same replicate streams.  A log-spaced grid over the search interval
    locates the best bracket, golden-section search in log10(sigma_hat)
    refines it, and ties resolve to the smallest sigma_hat.

    Raises:
        EmptyCurve, LengthMismatch, TooFewSnapshots
    """
    settings = settings or WalkerSettings()
    target = np.asarray(empirical_d, dtype=float)
    if target.size == 0:
        raise EmptyCurve()
    if target.size != N:
        raise LengthMismatch(target.size, N)
    if T < 2:
        raise TooFewSnapshots(T)

    cache: Dict[float, float] = {}
    curves: Dict[float, np.ndarray] = {}

    def mse(log_sigma: float) -> float:
        if log_sigma not in cache:
            curve = replicate_diversity(N, T, 10.0 ** log_sigma, replicates, seed, workers)
            curves[log_sigma] = curve
            cache[log_sigma] = float(np.mean((curve - target) ** 2))
            logger.debug(f"sigma_hat={10.0 ** log_sigma:.5g}: mse={cache[log_sigma]:.6g}")
        return cache[log_sigma]

    log_lower, log_upper = np.log10(settings.sigma_lower), np.log10(settings.sigma_upper)
    grid = np.linspace(log_lower, log_upper, settings.grid_points)
    values = [mse(float(x)) for x in grid]
    i = int(np.argmin(values))
    bracket_lo = float(grid[max(i - 1, 0)])
    bracket_hi = float(grid[min(i + 1, len(grid) - 1)])
    refined = _golden_section(mse, bracket_lo, bracket_hi, settings.golden_tolerance)

    best = min(cache, key=lambda x: (cache[x], x))
    model_curve = curves[best]
    sigma_star = float(np.clip(10.0 ** best, settings.sigma_lower, settings.sigma_upper))

    try:
        model_sigmoid = fit_sigmoid(model_curve)
    except DegenerateCurve as e:
        logger.warning(f"Model diversity curve has no sigmoid fit: {e}")
        model_sigmoid = None
    try:
        r2_data = r_squared(target, model_curve)
    except ZeroVariance:
        r2_data = None

    logger.info(
        f"Calibrated sigma_hat*={sigma_star:.5g} (mse={cache[best]:.4g}, {len(cache)} evaluations, "
        f"golden-section point {10.0 ** refined:.5g})")

    return CalibrationResult(
        sigma_hat_star=sigma_star,
        r2_model_fit=model_sigmoid.r_squared if model_sigmoid is not None else None,
        r2_data_vs_model=r2_data,
        mse=cache[best],
        model_sigmoid=model_sigmoid,
        model_diversity=model_curve.tolist(),
        evaluations=len(cache),
        N=N,
        T=T,
        replicates=replicates,
        seed=seed,
        sigma_lower=settings.sigma_lower,
        sigma_upper=settings.sigma_upper,
    )
