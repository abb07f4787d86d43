"""
Goodness of fit for rank-distribution models

R^2 is computed on log10 scores.  The Kolmogorov-Smirnov index p is a
parametric bootstrap: synthetic samples are drawn from the fitted model
pmf, the model is refitted to each sample, and p is the fraction of
replicate KS statistics at least as large as the observed one.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from config import BootstrapSettings, FittingSettings, as_dict
from distributions import (
    DistributionFit, ModelId, ModelParams, fit_model, log10_model_curve,
    model_curve, pmf_array,
)
from errors import LengthMismatch, OutOfRange, RankAnalysisError, SupportMismatch, ZeroVariance
from parallel import replicate_rng, run_replicates

logger = logging.getLogger(__name__)

PMF_TOLERANCE = 1e-9
KS_TOLERANCE = 1e-12  # replicate statistics this close to the observed one count as exceeding it


class GofReport(BaseModel):
    r_squared: Optional[float] = None  # None when the scores are all equal
    ks_statistic: float
    ks_p: float
    n_bootstrap: int
    sample_size: int
    seed: int
    diverged_replicates: int = 0


def r_squared(observed: Sequence[float], predicted: Sequence[float]) -> float:
    """
    Coefficient of determination 1 - SS_res / SS_tot

    Negative when the prediction is worse than the mean of observed.
    """
    obs = np.asarray(observed, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    if obs.shape != pred.shape or obs.size == 0:
        raise LengthMismatch(obs.size, pred.size)
    # a constant vector can leave rounding residue in SS_tot
    if np.all(obs == obs[0]):
        raise ZeroVariance()
    ss_tot = float(np.sum((obs - obs.mean()) ** 2))
    ss_res = float(np.sum((obs - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def ks_statistic(p_emp: Sequence[float], p_model: Sequence[float]) -> float:
    """Largest absolute difference between the two CDFs over ranks 1..N"""
    emp = np.asarray(p_emp, dtype=float)
    mod = np.asarray(p_model, dtype=float)
    if emp.shape != mod.shape or emp.ndim != 1 or emp.size == 0:
        raise SupportMismatch(f"pmfs over different supports: {emp.size} vs {mod.size} ranks")
    for name, pmf in (("empirical", emp), ("model", mod)):
        if abs(pmf.sum() - 1.0) > PMF_TOLERANCE or np.any(pmf < 0):
            raise SupportMismatch(f"{name} pmf does not sum to 1 (sum={pmf.sum():.12g})")
    distance = float(np.max(np.abs(np.cumsum(emp) - np.cumsum(mod))))
    return min(max(distance, 0.0), 1.0)


def _split(data: Sequence[Tuple[int, float]]) -> Tuple[np.ndarray, np.ndarray]:
    pairs = sorted(data, key=lambda point: point[0])
    ks = np.asarray([int(k) for k, _ in pairs])
    scores = np.asarray([float(s) for _, s in pairs])
    return ks, scores


def ks_p_value(
    data: Sequence[Tuple[int, float]],
    model: ModelId,
    params: ModelParams,
    n_bootstrap: int = 200,
    sample_size: int = 1000,
    seed: int = 0,
    fitting: Optional[FittingSettings] = None,
    workers: int = 1,
) -> GofReport:
    """
    Bootstrap Kolmogorov-Smirnov index p of a fitted model

    Each replicate draws `sample_size` ranks from the model pmf (multinomial),
    refits the model to the rank frequencies, and recomputes the KS statistic
    between the sample pmf and the refitted model pmf.  A replicate whose
    refit fails counts as an exceedance.  Replicate streams depend only on
    (seed, replicate index), so p does not depend on `workers`.
    """
    if n_bootstrap < 1:
        raise OutOfRange("n_bootstrap", n_bootstrap, 1, "inf")
    if sample_size < 100:
        raise OutOfRange("sample_size", sample_size, 100, "inf")

    ks, scores = _split(data)
    p_emp = pmf_array(scores, ks)
    p_model = pmf_array(model_curve(model, params, ks), ks)
    observed = ks_statistic(p_emp, p_model)
    try:
        fit_r2: Optional[float] = r_squared(np.log10(scores), log10_model_curve(model, params, ks))
    except ZeroVariance:
        logger.warning(f"{model.value}: all scores are equal, R^2 is undefined")
        fit_r2 = None

    def replicate(index: int) -> Optional[float]:
        rng = replicate_rng(seed, index)
        counts = rng.multinomial(sample_size, p_model)
        present = counts > 0
        sample = list(zip(ks[present].tolist(), counts[present].astype(float).tolist()))
        try:
            refit = fit_model(model, sample, fitting, N=params.N)
            p_refit = pmf_array(model_curve(model, refit, ks), ks)
        except RankAnalysisError as e:
            logger.debug(f"Bootstrap replicate {index} refit failed: {e}")
            return None
        return ks_statistic(counts / float(sample_size), p_refit)

    statistics = run_replicates(replicate, n_bootstrap, workers)
    diverged = sum(1 for d in statistics if d is None)
    exceed = sum(1 for d in statistics if d is None or d + KS_TOLERANCE >= observed)
    p = exceed / float(n_bootstrap)

    if diverged:
        logger.warning(f"{model.value}: {diverged}/{n_bootstrap} bootstrap refits diverged (counted as exceedances)")
    r2_text = "n/a" if fit_r2 is None else f"{fit_r2:.4f}"
    logger.info(f"{model.value}: R^2={r2_text}, KS D={observed:.4g}, p={p:.3f} ({n_bootstrap} replicates)")

    return GofReport(
        r_squared=fit_r2,
        ks_statistic=observed,
        ks_p=p,
        n_bootstrap=n_bootstrap,
        sample_size=sample_size,
        seed=seed,
        diverged_replicates=diverged,
    )


def score_fit(
    data: Sequence[Tuple[int, float]],
    model: ModelId,
    params: Optional[ModelParams] = None,
    bootstrap: Optional[BootstrapSettings] = None,
    fitting: Optional[FittingSettings] = None,
    workers: int = 1,
    time_label: Optional[str] = None,
) -> DistributionFit:
    """Fit (unless params are given) and score one model on one snapshot"""
    bootstrap = bootstrap or BootstrapSettings()
    if params is None:
        params = fit_model(model, data, fitting)
    report = ks_p_value(
        data, model, params,
        n_bootstrap=bootstrap.n_bootstrap,
        sample_size=bootstrap.sample_size,
        seed=bootstrap.seed,
        fitting=fitting,
        workers=workers,
    )
    return DistributionFit(
        model=model,
        params=params,
        r_squared=report.r_squared,
        ks_p=report.ks_p,
        time_label=time_label,
        gof=as_dict(report),
    )


def summarize_fits(fits: Sequence[DistributionFit]) -> Dict[str, Dict[str, Any]]:
    """Mean and standard deviation of R^2 and KS p per model over time slices"""
    summary: Dict[str, Dict[str, Any]] = {}
    for model in ModelId:
        selected: List[DistributionFit] = [f for f in fits if f.model == model]
        if not selected:
            continue
        r2 = np.array([f.r_squared for f in selected if f.r_squared is not None])
        p = np.array([f.ks_p for f in selected])
        summary[model.value] = {
            "count": len(selected),
            "r_squared_mean": float(r2.mean()) if r2.size else None,
            "r_squared_std": float(r2.std()) if r2.size else None,
            "ks_p_mean": float(p.mean()),
            "ks_p_std": float(p.std()),
        }
    return summary
