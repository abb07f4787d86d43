"""
Analysis configuration

Settings are read from config/analysis_config.json when present; any
missing section falls back to the defaults declared on the models below.
Command line flags override individual values after loading.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "analysis_config.json"


class FittingSettings(BaseModel):
    """Multi-start schedule and convergence limits for curve fits"""
    a_starts: List[float] = [0.01, 0.1, 0.5, 1.0, 2.0]
    b_starts: List[float] = [0.0, 1e-4, 1e-2]
    q_starts: List[float] = [0.0, 0.5, 1.0, 2.0]
    a_prime_starts: List[float] = [0.01, 0.1, 0.5, 1.0, 2.0]
    kc_quantiles: List[float] = [0.25, 0.5, 0.75]
    ftol: float = Field(1e-10, gt=0)
    max_iterations: int = Field(500, gt=0)


class BootstrapSettings(BaseModel):
    n_bootstrap: int = Field(200, gt=0)
    sample_size: int = Field(1000, ge=100)
    seed: int = Field(0, ge=0)


class WalkerSettings(BaseModel):
    replicates: int = Field(10, gt=0)
    sigma_lower: float = Field(1e-4, gt=0)
    sigma_upper: float = Field(10.0, gt=0)
    grid_points: int = Field(21, ge=3)
    golden_tolerance: float = Field(1e-3, gt=0)  # in decades of sigma_hat


class ExecutionSettings(BaseModel):
    workers: int = Field(1, ge=1)


class LoggingSettings(BaseModel):
    level: str = "INFO"
    log_to_file: bool = False
    log_dir: str = "logs"


class PlotSettings(BaseModel):
    width_inches: float = 6.0
    height_inches: float = 4.0
    svg_hashsalt: str = "rank-dynamics"


class AnalysisConfig(BaseModel):
    fitting: FittingSettings = Field(default_factory=FittingSettings)
    bootstrap: BootstrapSettings = Field(default_factory=BootstrapSettings)
    walker: WalkerSettings = Field(default_factory=WalkerSettings)
    execution: ExecutionSettings = Field(default_factory=ExecutionSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    plots: PlotSettings = Field(default_factory=PlotSettings)


def as_dict(model: BaseModel) -> Dict[str, Any]:
    """Dump a pydantic model to plain Python types (pydantic 1 and 2)"""
    dump = getattr(model, "model_dump", None)
    if dump is not None:
        return dump()
    return model.dict()


def load_config(config_path: Optional[Union[str, Path]] = None) -> AnalysisConfig:
    """Load configuration from JSON, falling back to defaults"""
    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    if not path.exists():
        if config_path:
            logger.warning(f"Config file not found: {path} - using defaults")
        return AnalysisConfig()

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Config file is not valid JSON ({path}): {e} - using defaults")
        return AnalysisConfig()

    logger.debug(f"Loaded config from {path}")
    return AnalysisConfig(**data)
