"""
Static SVG figures

Figures are drawn with matplotlib's object API on the Agg backend (no
pyplot state, safe to call from worker threads).  Output is
byte-deterministic: the SVG hash salt is fixed and no date is embedded.
Each plotted series carries a gid of the form "series-<name>".
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import matplotlib
matplotlib.use("Agg")
from matplotlib import rc_context
from matplotlib.figure import Figure

import numpy as np
from scipy.special import ndtr

from config import PlotSettings
from core_data import RankingSeries
from distributions import DistributionFit, model_curve
from dynamics import DynamicsProfile, SigmoidFit, collapse_transform, sigmoid_curve
from walker import CalibrationResult

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DYNAMICS_FIGURES = (
    "diversity.svg",
    "change_probability.svg",
    "p_vs_d.svg",
    "entropy_complexity.svg",
    "collapse.svg",
)


def _figure(settings: PlotSettings) -> Tuple[Figure, object]:
    fig = Figure(figsize=(settings.width_inches, settings.height_inches))
    ax = fig.add_subplot(1, 1, 1)
    return fig, ax


def _save(fig: Figure, path: PathLike, settings: PlotSettings) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    with rc_context({"svg.hashsalt": settings.svg_hashsalt, "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info(f"Wrote {path}")
    return path


def _rank_axis(ax, N: int) -> np.ndarray:
    ks = np.arange(1, N + 1)
    ax.set_xscale("log")
    ax.set_xlabel("k")
    return ks


def _sigmoid_line(ax, ks: np.ndarray, fit: Optional[SigmoidFit], name: str, label: str):
    if fit is None:
        return
    ax.plot(ks, sigmoid_curve(ks, fit.mu, fit.sigma), "-", color="black", linewidth=1,
            gid=f"series-{name}",
            label=f"{label} (mu={fit.mu:.3f}, sigma={fit.sigma:.3f}, R2={fit.r_squared:.3f})")


def plot_rank_distribution(
    data: Sequence[Tuple[int, float]],
    fits: Sequence[DistributionFit],
    path: PathLike,
    settings: Optional[PlotSettings] = None,
    title: Optional[str] = None,
) -> Path:
    """Score against rank on log-log axes with every fitted model"""
    settings = settings or PlotSettings()
    fig, ax = _figure(settings)
    ks = np.asarray([k for k, _ in data], dtype=float)
    scores = np.asarray([s for _, s in data], dtype=float)
    ax.plot(ks, scores, "o", markersize=3, color="gray", gid="series-data", label="data")
    for fit in fits:
        curve = model_curve(fit.model, fit.params, ks)
        r2 = "n/a" if fit.r_squared is None else f"{fit.r_squared:.3f}"
        ax.plot(ks, curve, "-", linewidth=1, gid=f"series-{fit.model.value}",
                label=f"{fit.model.value} (R2={r2}, p={fit.ks_p:.2f})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel("score")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7)
    return _save(fig, path, settings)


def plot_diversity(profile: DynamicsProfile, path: PathLike, settings: Optional[PlotSettings] = None) -> Path:
    settings = settings or PlotSettings()
    fig, ax = _figure(settings)
    ks = _rank_axis(ax, profile.N)
    ax.plot(ks, profile.d, "o", markersize=2, gid="series-d", label="d(k)")
    _sigmoid_line(ax, ks, profile.sigmoid, "d-sigmoid", "Phi")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("d(k)")
    ax.legend(fontsize=7)
    return _save(fig, path, settings)


def plot_change_probability(profile: DynamicsProfile, path: PathLike,
                            settings: Optional[PlotSettings] = None) -> Path:
    settings = settings or PlotSettings()
    fig, ax = _figure(settings)
    ks = _rank_axis(ax, profile.N)
    ax.plot(ks, profile.p_change, "o", markersize=2, gid="series-p", label="p(k)")
    _sigmoid_line(ax, ks, profile.p_sigmoid, "p-sigmoid", "Phi")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("p(k)")
    ax.legend(fontsize=7)
    return _save(fig, path, settings)


def plot_p_vs_d(profile: DynamicsProfile, path: PathLike, settings: Optional[PlotSettings] = None) -> Path:
    settings = settings or PlotSettings()
    fig, ax = _figure(settings)
    ax.plot(profile.d, profile.p_change, "o", markersize=2, gid="series-p-vs-d", label="p(k) vs d(k)")
    ax.plot([0, 1], [0, 1], ":", color="gray", linewidth=1, gid="series-identity", label="p = d")
    ax.set_xlim(0, 1.05)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("d(k)")
    ax.set_ylabel("p(k)")
    ax.legend(fontsize=7)
    return _save(fig, path, settings)


def plot_entropy_complexity(profile: DynamicsProfile, path: PathLike,
                            settings: Optional[PlotSettings] = None) -> Path:
    settings = settings or PlotSettings()
    fig, ax = _figure(settings)
    ks = _rank_axis(ax, profile.N)
    ax.plot(ks, profile.entropy, "o", markersize=2, gid="series-entropy", label="E(k)")
    ax.plot(ks, profile.complexity, "s", markersize=2, gid="series-complexity", label="C(k)")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    return _save(fig, path, settings)


def plot_collapse(profile: DynamicsProfile, path: PathLike, settings: Optional[PlotSettings] = None) -> Path:
    """d(k) against z = (log10 k - mu) / sigma over the unit normal CDF"""
    settings = settings or PlotSettings()
    fig, ax = _figure(settings)
    if profile.sigmoid is not None:
        z = collapse_transform(np.arange(1, profile.N + 1), profile.sigmoid)
        ax.plot(z, profile.d, "o", markersize=2, gid="series-collapsed-d", label="d(k)")
        lo, hi = float(np.min(z)), float(np.max(z))
    else:
        logger.warning("No sigmoid fit for d(k); collapse plot shows the reference curve only")
        lo, hi = -3.0, 3.0
    grid = np.linspace(min(lo, -3.0), max(hi, 3.0), 200)
    ax.plot(grid, ndtr(grid), "-", color="black", linewidth=1, gid="series-unit-normal-cdf", label="Phi(z)")
    ax.set_xlabel("(log10 k - mu) / sigma")
    ax.set_ylabel("d(k)")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    return _save(fig, path, settings)


def plot_spaghetti(series: RankingSeries, top: int, path: PathLike,
                   settings: Optional[PlotSettings] = None) -> Path:
    """Rank trajectories of every element that was ever in the top `top`"""
    settings = settings or PlotSettings()
    matrix = series.occupancy_matrix()
    N = matrix.shape[1]
    top = min(top, N)
    codes = np.unique(matrix[:, :top])
    names = series.element_names

    fig, ax = _figure(settings)
    times = np.arange(series.T)
    for code in codes:
        trajectory = np.full(series.T, np.nan)
        t_idx, k_idx = np.nonzero(matrix == code)
        trajectory[t_idx] = k_idx + 1
        ax.plot(times, trajectory, "-", linewidth=0.8, gid=f"series-{names[code]}")
    ax.set_ylim(top + 0.5, 0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("k")
    return _save(fig, path, settings)


def plot_calibration(empirical_d: Sequence[float], result: CalibrationResult,
                     empirical_sigmoid: Optional[SigmoidFit], path: PathLike,
                     settings: Optional[PlotSettings] = None) -> Path:
    """Empirical and calibrated model diversity with their sigmoid fits"""
    settings = settings or PlotSettings()
    fig, ax = _figure(settings)
    ks = _rank_axis(ax, len(empirical_d))
    ax.plot(ks, empirical_d, "o", markersize=2, gid="series-data-d", label="data d(k)")
    ax.plot(ks, result.model_diversity, "s", markersize=2, gid="series-model-d",
            label=f"model d(k), sigma_hat={result.sigma_hat_star:.4g}")
    _sigmoid_line(ax, ks, empirical_sigmoid, "data-sigmoid", "data Phi")
    _sigmoid_line(ax, ks, result.model_sigmoid, "model-sigmoid", "model Phi")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("d(k)")
    ax.legend(fontsize=7)
    return _save(fig, path, settings)


def write_dynamics_figures(profile: DynamicsProfile, directory: PathLike,
                           settings: Optional[PlotSettings] = None) -> List[Path]:
    directory = Path(directory)
    writers = (plot_diversity, plot_change_probability, plot_p_vs_d, plot_entropy_complexity, plot_collapse)
    return [writer(profile, directory / name, settings) for writer, name in zip(writers, DYNAMICS_FIGURES)]
