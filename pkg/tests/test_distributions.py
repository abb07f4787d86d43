"""
Tests for the rank-distribution models and their least squares fits
"""

import math

import numpy as np
import pytest

from distributions import (
    DistributionFit, ModelId, ModelParams, eval_model, fit_model, free_parameters,
    m5_branches, model_curve, to_pmf,
)
from errors import (
    AllZero, InsufficientData, InvalidParams, NegativeValue, NonPositiveScore, OutOfRange,
    UnknownModel,
)

K = np.arange(1, 501)


def params(model: ModelId, N: int = 500, **values) -> ModelParams:
    return ModelParams(N=N, **values)


def noisy(curve: np.ndarray, seed: int = 3, level: float = 0.01) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return curve * np.exp(level * rng.standard_normal(curve.size))


def pairs(ks, scores):
    return list(zip(np.asarray(ks).tolist(), np.asarray(scores).tolist()))


def test_model_ids():
    assert [m.value for m in ModelId] == ["m1", "m2", "m3", "m4", "m5"]
    assert ModelId.parse(" M3 ") is ModelId.M3
    with pytest.raises(UnknownModel):
        ModelId.parse("m6")


def test_free_parameters():
    assert free_parameters(ModelId.M1) == ("log_norm", "a")
    assert free_parameters(ModelId.M4) == ("log_norm", "a", "b", "q")
    assert free_parameters(ModelId.M5) == ("log_norm", "a", "a_prime", "log_kc")


def test_m1_at_rank_one_is_normalization():
    p = params(ModelId.M1, log_norm=2.5, a=1.3)
    assert eval_model(ModelId.M1, p, 1) == pytest.approx(10 ** 2.5, rel=1e-12)


def test_m2_hand_value():
    p = params(ModelId.M2, N=10, log_norm=0.0, a=1.0, b=math.log(2))
    assert eval_model(ModelId.M2, p, 2) == pytest.approx(1 / 8, rel=1e-12)


def test_m5_continuity_at_kc():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        N = int(rng.integers(3, 2000))
        p = params(ModelId.M5, N=N, log_norm=rng.uniform(-2, 5), a=rng.uniform(0, 3),
                   a_prime=rng.uniform(0, 3), log_kc=rng.uniform(1e-3, math.log10(N) - 1e-3))
        lower, upper = m5_branches(p, 10 ** p.log_kc)
        assert lower == pytest.approx(upper, rel=1e-12)


def test_m5_branches_use_their_exponents():
    p = params(ModelId.M5, N=1000, log_norm=3.0, a=0.5, a_prime=2.0, log_kc=2.0)
    assert eval_model(ModelId.M5, p, 10) == pytest.approx(10 ** (3.0 - 0.5), rel=1e-12)
    # k = 1000: 10^3 * 100^(1.5) / 1000^2
    assert eval_model(ModelId.M5, p, 1000) == pytest.approx(10 ** (3.0 + 3.0 - 6.0), rel=1e-12)


def test_nesting():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        N = int(rng.integers(2, 1000))
        ks = np.arange(1, N + 1)
        log_norm, a, b, q = rng.uniform(-1, 4), rng.uniform(0, 3), rng.uniform(0, 0.05), rng.uniform(0, 3)
        m4 = lambda **v: model_curve(ModelId.M4, params(ModelId.M4, N=N, log_norm=log_norm, a=a, **v), ks)
        m1 = model_curve(ModelId.M1, params(ModelId.M1, N=N, log_norm=log_norm, a=a), ks)
        m2 = model_curve(ModelId.M2, params(ModelId.M2, N=N, log_norm=log_norm, a=a, b=b), ks)
        m3 = model_curve(ModelId.M3, params(ModelId.M3, N=N, log_norm=log_norm, a=a, q=q), ks)
        np.testing.assert_allclose(m4(b=b, q=0.0), m2, rtol=1e-12)
        np.testing.assert_allclose(m4(b=0.0, q=q), m3, rtol=1e-12)
        np.testing.assert_allclose(m4(b=0.0, q=0.0), m1, rtol=1e-12)


def test_monotone_decreasing():
    m1 = model_curve(ModelId.M1, params(ModelId.M1, log_norm=1.0, a=0.3), K)
    m2 = model_curve(ModelId.M2, params(ModelId.M2, log_norm=1.0, a=0.0, b=0.001), K)
    assert np.all(np.diff(m1) < 0)
    assert np.all(np.diff(m2) < 0)


def test_invalid_params():
    with pytest.raises(InvalidParams):
        eval_model(ModelId.M5, params(ModelId.M5, N=100, log_norm=0, a=1, a_prime=1, log_kc=0.0), 5)
    with pytest.raises(InvalidParams):
        eval_model(ModelId.M1, params(ModelId.M1, log_norm=0, a=1, b=0.1), 5)
    with pytest.raises(InvalidParams):
        eval_model(ModelId.M2, params(ModelId.M2, log_norm=0, a=1), 5)
    with pytest.raises(InvalidParams):
        eval_model(ModelId.M1, params(ModelId.M1, log_norm=0, a=-0.5), 5)
    with pytest.raises(OutOfRange):
        eval_model(ModelId.M1, params(ModelId.M1, N=10, log_norm=0, a=1), 11)


def test_to_pmf():
    assert to_pmf([(1, 3.0), (2, 1.0)]) == [(1, 0.75), (2, 0.25)]
    normalized = [(1, 0.25), (2, 0.25), (3, 0.5)]
    assert to_pmf(normalized) == normalized
    with pytest.raises(AllZero):
        to_pmf([(1, 0.0), (2, 0.0)])
    with pytest.raises(NegativeValue):
        to_pmf([(1, 1.0), (2, -1.0)])


def test_fit_m1_exact():
    scores = model_curve(ModelId.M1, params(ModelId.M1, N=100, log_norm=3.0, a=1.0), np.arange(1, 101))
    fitted = fit_model(ModelId.M1, pairs(np.arange(1, 101), scores))
    assert fitted.a == pytest.approx(1.0, abs=1e-6)
    assert fitted.log_norm == pytest.approx(3.0, abs=1e-6)
    assert fitted.N == 100
    assert fitted.b is None and fitted.q is None


def _grid_oracle(ks, scores, shape, first_grid, second_grid):
    """Brute-force least squares over two shape parameters with log_norm profiled out"""
    y = np.log10(scores)
    best = (np.inf, None, None)
    for first in first_grid:
        for second in second_grid:
            r = y - shape(first, second)
            cost = float(np.sum((r - r.mean()) ** 2))
            if cost < best[0]:
                best = (cost, first, second)
    return best


def _fitted_cost(model, fitted, scores):
    r = np.log10(scores) - np.log10(model_curve(model, fitted, K)) + fitted.log_norm
    return float(np.sum((r - r.mean()) ** 2))


def test_fit_m2_noisy_matches_grid_oracle():
    truth = params(ModelId.M2, log_norm=3.2, a=0.2, b=0.01)
    scores = noisy(model_curve(ModelId.M2, truth, K))
    fitted = fit_model(ModelId.M2, pairs(K, scores))
    assert fitted.a == pytest.approx(0.2, rel=0.05)
    assert fitted.b == pytest.approx(0.01, rel=0.05)

    ks = K.astype(float)
    a_grid = np.linspace(0.0, 0.5, 51)
    b_grid = np.linspace(0.0, 0.02, 41)
    oracle_cost, oracle_a, oracle_b = _grid_oracle(
        ks, scores, lambda a, b: -a * np.log10(ks) - b * ks * np.log10(np.e), a_grid, b_grid)
    assert _fitted_cost(ModelId.M2, fitted, scores) <= oracle_cost * (1 + 1e-6)
    assert abs(fitted.a - oracle_a) <= 2 * (a_grid[1] - a_grid[0])
    assert abs(fitted.b - oracle_b) <= 2 * (b_grid[1] - b_grid[0])


def test_fit_m3_noisy_matches_grid_oracle():
    truth = params(ModelId.M3, log_norm=2.0, a=0.5, q=0.8)
    scores = noisy(model_curve(ModelId.M3, truth, K))
    fitted = fit_model(ModelId.M3, pairs(K, scores))

    ks = K.astype(float)
    a_grid = np.linspace(0.3, 0.7, 41)
    q_grid = np.linspace(0.6, 1.0, 41)
    oracle_cost, oracle_a, oracle_q = _grid_oracle(
        ks, scores, lambda a, q: -a * np.log10(ks) + q * np.log10(501 - ks), a_grid, q_grid)
    assert _fitted_cost(ModelId.M3, fitted, scores) <= oracle_cost * (1 + 1e-6)
    assert abs(fitted.a - oracle_a) <= 2 * (a_grid[1] - a_grid[0])
    assert abs(fitted.q - oracle_q) <= 2 * (q_grid[1] - q_grid[0])


@pytest.mark.parametrize("model,truth", [
    (ModelId.M1, dict(log_norm=4.511, a=1.042)),
    (ModelId.M3, dict(log_norm=2.0, a=0.5, q=0.8)),
    (ModelId.M4, dict(log_norm=3.0, a=0.3, b=0.004, q=0.6)),
    (ModelId.M5, dict(log_norm=3.0, a=0.5, a_prime=1.5, log_kc=2.0)),
])
def test_fit_recovery_with_noise(model, truth):
    scores = noisy(model_curve(model, params(model, **truth), K), seed=17)
    fitted = fit_model(model, pairs(K, scores))
    for name, value in truth.items():
        if name == "log_norm":
            continue
        assert getattr(fitted, name) == pytest.approx(value, rel=0.05), name


def test_refit_scaled_data_shifts_log_norm_only():
    scores = noisy(model_curve(ModelId.M4, params(ModelId.M4, log_norm=3.0, a=0.3, b=0.004, q=0.6), K))
    base = fit_model(ModelId.M4, pairs(K, scores))
    scaled = fit_model(ModelId.M4, pairs(K, scores * 100.0))
    assert scaled.log_norm == pytest.approx(base.log_norm + 2.0, abs=1e-6)
    for name in ("a", "b", "q"):
        assert getattr(scaled, name) == pytest.approx(getattr(base, name), abs=1e-6)


def test_fit_is_deterministic():
    scores = noisy(model_curve(ModelId.M5, params(ModelId.M5, log_norm=3.0, a=0.5, a_prime=1.5, log_kc=2.0), K))
    first = fit_model(ModelId.M5, pairs(K, scores))
    second = fit_model(ModelId.M5, pairs(K, scores))
    assert first == second


def test_fit_with_explicit_depth():
    ks = np.arange(1, 21)
    scores = model_curve(ModelId.M3, params(ModelId.M3, N=40, log_norm=1.0, a=0.5, q=1.0), ks)
    fitted = fit_model(ModelId.M3, pairs(ks, scores), N=40)
    assert fitted.N == 40
    assert fitted.q == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(InvalidParams):
        fit_model(ModelId.M3, pairs(ks, scores), N=10)


def test_fit_preconditions():
    with pytest.raises(InsufficientData):
        fit_model(ModelId.M4, [(1, 5.0), (2, 4.0), (3, 3.0), (4, 2.0)])
    with pytest.raises(InsufficientData):
        fit_model(ModelId.M1, [(1, 5.0), (1, 4.0), (2, 3.0)])
    with pytest.raises(NonPositiveScore):
        fit_model(ModelId.M1, [(1, 5.0), (2, 0.0), (3, 1.0)])


def test_distribution_fit_json_keys():
    fit = DistributionFit(model=ModelId.M2, params=params(ModelId.M2, log_norm=1.0, a=0.5, b=0.01),
                          r_squared=0.99, ks_p=0.4, time_label="2014-01-06")
    data = fit.to_json_dict()
    for key in ("model", "log_norm", "a", "b", "q", "a_prime", "log_kc", "r_squared", "ks_p"):
        assert key in data
    assert data["model"] == "m2"
    assert data["q"] is None and data["a_prime"] is None
