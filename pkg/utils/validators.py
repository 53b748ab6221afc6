"""
Data Validators
Functions to validate run options and input/output files
"""

from pathlib import Path
from typing import Optional, Tuple
import json

from pie.examples import PRESETS

DEMO_PRESETS = ("reaction-diffusion", "beam")


def validate_preset_name(name: str, demo: bool = False) -> Tuple[bool, Optional[str]]:
    """
    Check a preset name against the registry

    Args:
        name: Preset name
        demo: Restrict to the presets with an end-to-end demo

    Returns:
        Tuple[bool, str]: (is_valid, error_message)
    """
    allowed = DEMO_PRESETS if demo else tuple(sorted(PRESETS))
    if name not in allowed:
        return False, f"Unknown preset '{name}'. Available: {', '.join(allowed)}"
    return True, None


def validate_operator_file(file_path: str, kind: Optional[str] = None) -> Tuple[bool, Optional[str]]:
    """
    Check that a file holds a saved operator bundle, optionally of a given kind

    Args:
        file_path: Path to a JSON bundle
        kind: Expected meta kind ("pie_system", "observer_gain", ...)

    Returns:
        Tuple[bool, str]: (is_valid, error_message)
    """
    path = Path(file_path)
    if not path.is_file():
        return False, f"File not found: {file_path}"
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        return False, f"Error reading {file_path}: {str(e)}"
    if not isinstance(payload, dict) or "items" not in payload:
        return False, f"{file_path} is not an operator bundle"
    if kind and payload.get("meta", {}).get("kind") != kind:
        return False, f"{file_path} does not contain a {kind}"
    return True, None


def validate_output_dir(directory: str) -> Tuple[bool, Optional[str]]:
    """
    Check that an output directory exists or can be created

    Returns:
        Tuple[bool, str]: (is_valid, error_message)
    """
    path = Path(directory)
    if path.exists() and not path.is_dir():
        return False, f"Output path {directory} exists and is not a directory"
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return False, f"Cannot create output directory {directory}: {str(e)}"
    return True, None
