"""
Report bundles

Every JSON document the command line writes is a ReportBundle.  Bundles
are validated against config/schemas/report_bundle.schema.json before
they leave the process.
"""

import json
import logging
import math
import sys
from pathlib import Path
from typing import IO, Any, Dict, List, Optional, Sequence, Union

from jsonschema import Draft7Validator
from pydantic import BaseModel

from config import as_dict
from distributions import DistributionFit
from dynamics import DynamicsProfile
from walker import CalibrationResult

logger = logging.getLogger(__name__)

TOOL_NAME = "rank-dynamics"
TOOL_VERSION = "1.0.0"
SCHEMA_PATH = Path(__file__).resolve().parent.parent / "config" / "schemas" / "report_bundle.schema.json"

_validator: Optional[Draft7Validator] = None


class ReportValidationError(Exception):
    """A bundle does not match the published schema"""


class ReportBundle(BaseModel):
    metadata: Dict[str, Any]
    fits: List[Dict[str, Any]] = []
    fit_summary: Optional[Dict[str, Any]] = None
    dynamics: Optional[Dict[str, Any]] = None
    calibration: Optional[Dict[str, Any]] = None

    @classmethod
    def build(
        cls,
        metadata: Dict[str, Any],
        fits: Sequence[DistributionFit] = (),
        fit_summary: Optional[Dict[str, Any]] = None,
        dynamics: Optional[DynamicsProfile] = None,
        calibration: Optional[CalibrationResult] = None,
    ) -> "ReportBundle":
        return cls(
            metadata={"tool": TOOL_NAME, "version": TOOL_VERSION, **metadata},
            fits=[fit.to_json_dict() for fit in fits],
            fit_summary=fit_summary,
            dynamics=dynamics.to_json_dict() if dynamics is not None else None,
            calibration=as_dict(calibration) if calibration is not None else None,
        )

    def to_json_dict(self) -> Dict[str, Any]:
        return _finite(as_dict(self))

    def to_json_text(self) -> str:
        data = self.to_json_dict()
        validate_bundle(data)
        return json.dumps(data, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _finite(value: Any) -> Any:
    """Replace NaN and infinities with None so the document is strict JSON"""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def load_schema(path: Union[str, Path] = SCHEMA_PATH) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def validate_bundle(data: Dict[str, Any]) -> None:
    """
    Raises:
        ReportValidationError: listing every schema violation
    """
    global _validator
    if _validator is None:
        _validator = Draft7Validator(load_schema())
    errors = sorted(_validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        details = "; ".join(f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in errors)
        logger.error(f"Report bundle failed schema validation: {details}")
        raise ReportValidationError(details)


def write_text(text: str, destination: Union[str, Path, IO[str], None]) -> None:
    """Write UTF-8 text to a path, an open stream, or stdout when destination is None"""
    if destination is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote {path}")


def write_bundle(bundle: ReportBundle, destination: Union[str, Path, IO[str], None]) -> None:
    write_text(bundle.to_json_text(), destination)
