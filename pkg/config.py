"""
Configuration management for the censoring scheme search
"""
import logging
import os
from pathlib import Path
from typing import Dict, Optional

from dotenv import dotenv_values, load_dotenv

# Load environment variables
load_dotenv()

# Project paths
BASE_DIR = Path(__file__).parent
LOGS_DIR = Path(os.getenv("CENSEARCH_LOGS_DIR", str(BASE_DIR / "logs")))

# Ensure directories exist
LOGS_DIR.mkdir(parents=True, exist_ok=True)

# Logging configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Search defaults
DEFAULT_SEED = 12345
DEFAULT_ITERATIONS = 10000
ORACLE_BUDGET = 10**7

# Numerical limits
CONDITION_LIMIT = 1e12  # Kamps-Cramer alternating sums above this go to mpmath
EXTENDED_PRECISION_DPS = 60
MIN_BETA = 0.05

# Maximum likelihood fitting
MLE_MAX_ITERATIONS = 200
MLE_TOLERANCE = 1e-10
MAX_NONCONVERGENCE_RATE = 0.01

# Report files
REPORT_SCHEMA_VERSION = 1


def env_seed() -> Optional[int]:
    """Seed fallback from CENSEARCH_SEED (read at call time)"""
    raw = os.getenv("CENSEARCH_SEED", "").strip()
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"CENSEARCH_SEED must be an integer, got {raw!r}")


def load_config_file(path: Path) -> Dict[str, str]:
    """
    Load a flat key=value configuration file

    Args:
        path: File with one `key=value` per line; keys may be written as
            CLI flags (`--iters`) or plain names (`iters`)

    Returns:
        Mapping of normalized option names (dashes become underscores) to raw values
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")

    settings = {}
    for key, value in dotenv_values(path).items():
        name = key.strip().lstrip("-").replace("-", "_").lower()
        if name:
            settings[name] = "" if value is None else value.strip()
    return settings


def validate_config() -> bool:
    """Validate that the logging setup is usable"""
    errors = []

    if not isinstance(logging.getLevelName(LOG_LEVEL.upper()), int):
        errors.append(f"Unknown LOG_LEVEL: {LOG_LEVEL}")

    # Check if the log directory is writable
    try:
        marker = LOGS_DIR / ".write_check"
        marker.touch(exist_ok=True)
        marker.unlink()
    except OSError as e:
        errors.append(f"Cannot write to logs directory: {e}")

    if errors:
        for error in errors:
            logging.getLogger(__name__).error(f"Configuration error: {error}")
        return False

    return True
