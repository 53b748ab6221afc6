"""
Run Configuration
Validated description of one CLI run, loaded from JSON and overridden by flags
"""

from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Union
import json
import logging

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import config
from utils.validators import validate_preset_name

# Setup logging
logger = logging.getLogger(__name__)

Command = Literal["norm", "synth", "sim", "demo"]


class RunConfig(BaseModel):
    """One norm / synth / sim / demo run."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    preset: Optional[str] = None
    system: Optional[str] = None

    # Solver options
    method: Literal["gramian", "schur"] = "schur"
    degree: int = Field(default_factory=lambda: config.DEGREE, ge=1)
    max_degree: Optional[int] = Field(default_factory=lambda: config.MAX_DEGREE, ge=1)
    eps: float = Field(default_factory=lambda: config.EPS, gt=0)
    solver_tol: float = Field(default=1e-6, gt=0)
    backend: str = Field(default_factory=lambda: config.SOLVER)
    export_sdpa: Optional[str] = None
    inversion_degree: int = Field(default_factory=lambda: config.INVERSION_DEGREE, ge=1)
    inversion_tol: float = Field(default_factory=lambda: config.INVERSION_TOL, gt=0)

    # Simulation options
    order: int = Field(default_factory=lambda: config.SIM_ORDER, ge=1)
    dt: Optional[float] = Field(default=None, gt=0)
    t_final: Optional[float] = Field(default=None, gt=0)
    ic: Optional[str] = None
    disturbance: Optional[str] = None
    gain: Optional[str] = None

    # Outputs
    out: str = Field(default_factory=lambda: config.OUTPUT_DIR)
    log_level: str = Field(default_factory=lambda: config.LOG_LEVEL)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level '{value}'")
        return value

    @model_validator(mode="after")
    def _check_source(self) -> "RunConfig":
        if self.command == "demo":
            if self.system is not None:
                raise ValueError("demo runs take a preset, not a system file")
            is_valid, error = validate_preset_name(self.preset or "", demo=True)
        else:
            if (self.preset is None) == (self.system is None):
                raise ValueError("Give exactly one of preset or system")
            is_valid, error = (True, None) if self.preset is None else validate_preset_name(self.preset)
        if not is_valid:
            raise ValueError(error)
        if self.max_degree is not None and self.max_degree < self.degree:
            raise ValueError(f"max_degree {self.max_degree} is below degree {self.degree}")
        return self

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


def load_run_config(
    command: str,
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Build a RunConfig from an optional JSON file and flag overrides.

    Flags that were not given (None) leave the file value in place.

    Raises:
        FileNotFoundError: If the config file is missing
        ValueError: If the file is not a JSON object
        pydantic.ValidationError: On invalid options
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"No such config file: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ValueError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ValueError(f"Config file {path} must hold a JSON object")
        logger.info(f"Loaded run config from {path}")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    data["command"] = command
    return RunConfig.model_validate(data)
