"""
Rank-distribution models

Five generalizations of Zipf's law for score as a function of rank:

    m1(k) = N0 / k^a
    m2(k) = N0 exp(-b k) / k^a
    m3(k) = N0 (N + 1 - k)^q / k^a
    m4(k) = N0 (N + 1 - k)^q exp(-b k) / k^a
    m5(k) = N0 / k^a                        for k <= k_c
            N0 k_c^(a' - a) / k^a'          for k >  k_c

Parameters are reported as log10 N0 and log10 k_c.  Fits minimize squared
residuals of log10(score) against log10(model).
"""

import itertools
import logging
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from config import FittingSettings
from errors import (
    AllZero, InsufficientData, InvalidParams, NegativeValue, NonPositiveScore,
    OutOfRange, UnknownModel,
)
from multistart import MultiStartOptimizer

logger = logging.getLogger(__name__)

LOG10_E = np.log10(np.e)
KC_MARGIN = 1e-6  # keeps log10 k_c strictly inside (0, log10 N)


class ModelId(Enum):
    """The five rank-distribution models"""
    M1 = "m1"
    M2 = "m2"
    M3 = "m3"
    M4 = "m4"
    M5 = "m5"

    @classmethod
    def parse(cls, name: str) -> "ModelId":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise UnknownModel(name)


# shape parameters fitted besides log_norm
FREE_PARAMETERS: Dict[ModelId, Tuple[str, ...]] = {
    ModelId.M1: ("a",),
    ModelId.M2: ("a", "b"),
    ModelId.M3: ("a", "q"),
    ModelId.M4: ("a", "b", "q"),
    ModelId.M5: ("a", "a_prime", "log_kc"),
}

OPTIONAL_FIELDS = ("b", "q", "a_prime", "log_kc")


def free_parameters(model: ModelId) -> Tuple[str, ...]:
    return ("log_norm",) + FREE_PARAMETERS[model]


class ModelParams(BaseModel):
    """Parameters of one model; fields a model does not use stay None"""
    log_norm: float
    a: float
    b: Optional[float] = None
    q: Optional[float] = None
    a_prime: Optional[float] = None
    log_kc: Optional[float] = None
    N: int


class DistributionFit(BaseModel):
    """A fitted model with its goodness of fit"""
    model: ModelId
    params: ModelParams
    r_squared: Optional[float]
    ks_p: float
    time_label: Optional[str] = None
    gof: Optional[Dict[str, Any]] = None

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.value,
            "time_label": self.time_label,
            "log_norm": self.params.log_norm,
            "a": self.params.a,
            "b": self.params.b,
            "q": self.params.q,
            "a_prime": self.params.a_prime,
            "log_kc": self.params.log_kc,
            "N": self.params.N,
            "r_squared": self.r_squared,
            "ks_p": self.ks_p,
            "gof": self.gof,
        }


def validate_params(model: ModelId, params: ModelParams) -> None:
    """
    Raises:
        InvalidParams: missing/extra fields, negative exponents, k_c outside (1, N)
    """
    used = set(FREE_PARAMETERS[model])
    for name in OPTIONAL_FIELDS:
        value = getattr(params, name)
        if name in used and value is None:
            raise InvalidParams(f"{model.value} requires parameter '{name}'", model=model.value)
        if name not in used and value is not None:
            raise InvalidParams(f"{model.value} does not use parameter '{name}'", model=model.value)
    if params.N < 1:
        raise InvalidParams(f"N must be positive, got {params.N}", model=model.value)
    for name in ("a", "b", "q", "a_prime"):
        value = getattr(params, name)
        if value is not None and (value < 0 or not np.isfinite(value)):
            raise InvalidParams(f"{name}={value} must be a finite non-negative number", model=model.value)
    if model == ModelId.M5:
        kc = 10.0 ** params.log_kc
        if not 1.0 < kc < params.N:
            raise InvalidParams(f"k_c={kc:g} outside (1, {params.N})", model=model.value)


def _log10_shape(model: ModelId, theta: Sequence[float], k: np.ndarray, N: int) -> np.ndarray:
    """log10(model) - log_norm for shape parameters theta (FREE_PARAMETERS order)"""
    logk = np.log10(k)
    if model == ModelId.M1:
        (a,) = theta
        return -a * logk
    if model == ModelId.M2:
        a, b = theta
        return -a * logk - b * k * LOG10_E
    if model == ModelId.M3:
        a, q = theta
        return -a * logk + q * np.log10(N + 1 - k)
    if model == ModelId.M4:
        a, b, q = theta
        return -a * logk - b * k * LOG10_E + q * np.log10(N + 1 - k)
    a, a_prime, log_kc = theta
    return np.where(logk <= log_kc, -a * logk, (a_prime - a) * log_kc - a_prime * logk)


def _log10_shape_jacobian(model: ModelId, theta: Sequence[float], k: np.ndarray, N: int) -> np.ndarray:
    logk = np.log10(k)
    if model == ModelId.M1:
        return (-logk)[:, None]
    if model == ModelId.M2:
        return np.column_stack([-logk, -k * LOG10_E])
    if model == ModelId.M3:
        return np.column_stack([-logk, np.log10(N + 1 - k)])
    if model == ModelId.M4:
        return np.column_stack([-logk, -k * LOG10_E, np.log10(N + 1 - k)])
    a, a_prime, log_kc = theta
    upper = logk > log_kc
    return np.column_stack([
        np.where(upper, -log_kc, -logk),
        np.where(upper, log_kc - logk, 0.0),
        np.where(upper, a_prime - a, 0.0),
    ])


def _theta(model: ModelId, params: ModelParams) -> List[float]:
    return [getattr(params, name) for name in FREE_PARAMETERS[model]]


def log10_model_curve(model: ModelId, params: ModelParams, ks) -> np.ndarray:
    """Vectorized log10 of the model over ranks ks"""
    validate_params(model, params)
    k = np.asarray(ks, dtype=float)
    if k.size and (k.min() < 1 or k.max() > params.N):
        bad = k.min() if k.min() < 1 else k.max()
        raise OutOfRange("k", bad, 1, params.N)
    return params.log_norm + _log10_shape(model, _theta(model, params), k, params.N)


def model_curve(model: ModelId, params: ModelParams, ks) -> np.ndarray:
    return 10.0 ** log10_model_curve(model, params, ks)


def eval_model(model: ModelId, params: ModelParams, k: float) -> float:
    """Model value at rank k (1 <= k <= N)"""
    return float(model_curve(model, params, [k])[0])


def m5_branches(params: ModelParams, k: float) -> Tuple[float, float]:
    """Both branches of m5 evaluated at k, regardless of which side of k_c it lies"""
    validate_params(ModelId.M5, params)
    logk = np.log10(k)
    lower = params.log_norm - params.a * logk
    upper = params.log_norm + (params.a_prime - params.a) * params.log_kc - params.a_prime * logk
    return float(10.0 ** lower), float(10.0 ** upper)


def to_pmf(data: Sequence[Tuple[int, float]]) -> List[Tuple[int, float]]:
    """Normalize (k, value) pairs so the values sum to one"""
    ks = [k for k, _ in data]
    return list(zip(ks, pmf_array([v for _, v in data], ks).tolist()))


def pmf_array(values, ks: Optional[Sequence[int]] = None) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    negative = np.flatnonzero(array < 0)
    if negative.size:
        i = int(negative[0])
        raise NegativeValue(ks[i] if ks is not None else i + 1, float(array[i]))
    total = array.sum()
    if not total > 0:
        raise AllZero()
    return array / total


def _starts(model: ModelId, settings: FittingSettings, k: np.ndarray) -> List[Tuple[float, ...]]:
    """Deterministic multi-start schedule over the shape parameters"""
    if model == ModelId.M1:
        return [(a,) for a in settings.a_starts]
    if model == ModelId.M2:
        return list(itertools.product(settings.a_starts, settings.b_starts))
    if model == ModelId.M3:
        return list(itertools.product(settings.a_starts, settings.q_starts))
    if model == ModelId.M4:
        return list(itertools.product(settings.a_starts, settings.b_starts, settings.q_starts))
    kmin, kmax = float(k.min()), float(k.max())
    log_kcs = [np.log10(kmin + f * (kmax - kmin)) for f in settings.kc_quantiles]
    return list(itertools.product(settings.a_starts, settings.a_prime_starts, log_kcs))


def _bounds(model: ModelId, N: int) -> Tuple[List[float], List[float]]:
    names = FREE_PARAMETERS[model]
    lower = [0.0] * len(names)
    upper = [np.inf] * len(names)
    if model == ModelId.M5:
        lower[2] = KC_MARGIN
        upper[2] = np.log10(N) - KC_MARGIN
    return lower, upper


def _check_data(model: ModelId, data: Sequence[Tuple[int, float]]) -> Tuple[np.ndarray, np.ndarray]:
    if not data:
        raise InsufficientData(f"{model.value}: no data points", model=model.value)
    k = np.asarray([float(point[0]) for point in data])
    scores = np.asarray([float(point[1]) for point in data])
    if np.any(k < 1) or np.any(k != np.round(k)):
        raise InvalidParams(f"{model.value}: ranks must be positive integers", model=model.value)
    if len(np.unique(k)) != len(k):
        raise InsufficientData(f"{model.value}: rank values must be distinct", model=model.value)
    for rank, score in zip(k, scores):
        if not score > 0:
            raise NonPositiveScore(int(rank), float(score))
    required = len(free_parameters(model)) + 1
    if len(k) < required:
        raise InsufficientData(
            f"{model.value}: {len(k)} data points, at least {required} needed",
            model=model.value, points=len(k), required=required)
    if model == ModelId.M5 and k.max() < 3:
        raise InsufficientData("m5: k_c in (1, N) needs N >= 3", model=model.value)
    return k, scores


def fit_model(
    model: ModelId,
    data: Sequence[Tuple[int, float]],
    settings: Optional[FittingSettings] = None,
    N: Optional[int] = None,
) -> ModelParams:
    """
    Least squares fit of log10(score) against log10(model)

    log_norm is profiled out analytically (it is the mean log residual of
    the shape), so only shape parameters go through the optimizer.

    Args:
        model: Which model to fit
        data: (rank, score) pairs with distinct ranks and positive scores
        settings: Multi-start schedule and tolerances
        N: List depth; defaults to the largest rank in the data

    Returns:
        Fitted parameters

    Raises:
        InsufficientData, NonPositiveScore, FitDiverged
    """
    settings = settings or FittingSettings()
    k, scores = _check_data(model, data)
    if N is None:
        N = int(k.max())
    elif N < k.max():
        raise InvalidParams(f"N={N} is smaller than the largest rank {int(k.max())}", model=model.value)
    y = np.log10(scores)

    def residuals(theta):
        centered = y - _log10_shape(model, theta, k, N)
        return centered - centered.mean()

    def jacobian(theta):
        jac = _log10_shape_jacobian(model, theta, k, N)
        return -(jac - jac.mean(axis=0))

    lower, upper = _bounds(model, N)
    optimizer = MultiStartOptimizer(
        residuals, jacobian, lower, upper,
        label=f"fit {model.value}",
        ftol=settings.ftol,
        max_iterations=settings.max_iterations,
    )
    best = optimizer.run(_starts(model, settings, k))

    theta = best.x
    log_norm = float(np.mean(y - _log10_shape(model, theta, k, N)))
    values = dict(zip(FREE_PARAMETERS[model], (float(v) for v in theta)))
    params = ModelParams(log_norm=log_norm, N=N, **values)
    logger.debug(f"Fitted {model.value}: {values}, log_norm={log_norm:.4f}, cost={best.cost:.3e}")
    return params
