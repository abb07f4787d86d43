"""
Multi-start least squares

Runs scipy's bounded trust-region least squares from every start of a
fixed schedule and keeps the lowest-cost solution.  A failing start is
logged and skipped; the fit only fails when no start produces a finite
cost.
"""

import logging
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from errors import FitDiverged

logger = logging.getLogger(__name__)


class StartStatus(Enum):
    """Outcome of a single optimizer start"""
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    FAILED = "failed"


class StartResult:
    """Result of one optimizer start"""

    def __init__(self, index: int, x0: np.ndarray, x: Optional[np.ndarray], cost: float,
                 status: StartStatus, nfev: int = 0, message: str = ""):
        self.index = index
        self.x0 = x0
        self.x = x
        self.cost = cost
        self.status = status
        self.nfev = nfev
        self.message = message

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "x0": self.x0.tolist(),
            "x": None if self.x is None else self.x.tolist(),
            "cost": self.cost,
            "status": self.status.value,
            "nfev": self.nfev,
            "message": self.message,
        }


class MultiStartOptimizer:
    """
    Bounded least squares from a deterministic list of starting points

    Selection keeps the lowest cost; ties go to the earliest start.
    """

    def __init__(
        self,
        residuals: Callable[[np.ndarray], np.ndarray],
        jacobian: Optional[Callable[[np.ndarray], np.ndarray]],
        lower: Sequence[float],
        upper: Sequence[float],
        label: str = "fit",
        ftol: float = 1e-10,
        max_iterations: int = 500,
    ):
        self.residuals = residuals
        self.jacobian = jacobian
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.label = label
        self.ftol = ftol
        self.max_iterations = max_iterations
        self.results: List[StartResult] = []
        self.stats = {
            "total_starts": 0,
            "converged": 0,
            "max_iterations": 0,
            "failed": 0,
        }

    def _run_start(self, index: int, x0: Sequence[float]) -> StartResult:
        start = np.clip(np.asarray(x0, dtype=float), self.lower, self.upper)
        try:
            solution = least_squares(
                self.residuals,
                start,
                jac=self.jacobian if self.jacobian is not None else "2-point",
                bounds=(self.lower, self.upper),
                method="trf",
                x_scale="jac",
                ftol=self.ftol,
                xtol=1e-12,
                gtol=1e-12,
                max_nfev=self.max_iterations,
            )
        except (ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
            return StartResult(index, start, None, np.inf, StartStatus.FAILED, message=str(e))

        cost = float(solution.cost)
        if not np.isfinite(cost) or not np.all(np.isfinite(solution.x)):
            return StartResult(index, start, None, np.inf, StartStatus.FAILED,
                               nfev=solution.nfev, message="non-finite cost")
        status = StartStatus.MAX_ITERATIONS if solution.status == 0 else StartStatus.CONVERGED
        return StartResult(index, start, solution.x, cost, status,
                           nfev=solution.nfev, message=solution.message)

    def run(self, starts: Sequence[Sequence[float]]) -> StartResult:
        """
        Run every start and return the best result

        Raises:
            FitDiverged: if no start yields a finite cost
        """
        best: Optional[StartResult] = None
        for index, x0 in enumerate(starts):
            result = self._run_start(index, x0)
            self.results.append(result)
            self.stats["total_starts"] += 1
            self.stats[result.status.value] += 1

            if result.status == StartStatus.FAILED:
                logger.debug(f"{self.label}: start {index} failed: {result.message}")
                continue
            if best is None or result.cost < best.cost:
                best = result

        if best is None:
            raise FitDiverged(f"{self.label}: optimizer failed from all {len(starts)} starts",
                              label=self.label, starts=len(starts))

        if self.stats["failed"]:
            logger.warning(f"{self.label}: {self.stats['failed']} of {len(starts)} starts failed")
        logger.debug(f"{self.label}: best start {best.index} with cost {best.cost:.3e}")
        return best

    def get_statistics(self) -> Dict[str, Any]:
        return {**self.stats, "label": self.label}
