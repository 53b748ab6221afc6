"""
Application Configuration
Loads environment variables and provides solver, simulation and output settings
"""

import os
from dotenv import load_dotenv
from typing import Optional

# Load environment variables
load_dotenv()


class Config:
    """Application configuration class"""

    # Application Info
    APP_NAME: str = os.getenv("PITOOLS_APP_NAME", "PI Estimator Toolkit")
    APP_VERSION: str = "0.3.0"

    # Logging
    LOG_LEVEL: str = os.getenv("PITOOLS_LOG_LEVEL", "INFO")
    LOG_FILE: Optional[str] = os.getenv("PITOOLS_LOG_FILE") or None

    # Outputs
    OUTPUT_DIR: str = os.getenv("PITOOLS_OUTPUT_DIR", "output")

    # Solver Configuration
    SOLVER: str = os.getenv("PITOOLS_SOLVER", "CLARABEL")
    EPS: float = float(os.getenv("PITOOLS_EPS", "1e-4"))
    DEGREE: int = int(os.getenv("PITOOLS_DEGREE", "2"))
    MAX_DEGREE: int = int(os.getenv("PITOOLS_MAX_DEGREE", "4"))

    # Gain Reconstruction
    INVERSION_DEGREE: int = int(os.getenv("PITOOLS_INVERSION_DEGREE", "8"))
    INVERSION_TOL: float = float(os.getenv("PITOOLS_INVERSION_TOL", "1e-4"))

    # Simulation
    SIM_ORDER: int = int(os.getenv("PITOOLS_SIM_ORDER", "8"))
    QUADRATURE_NODES: int = int(os.getenv("PITOOLS_QUADRATURE_NODES", "64"))


# Create singleton instance
config = Config()
