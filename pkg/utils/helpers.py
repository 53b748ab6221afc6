"""
Helper Functions
Formatting and small numeric utilities used by the CLI and reports
"""

import re
from typing import Optional, Sequence

import numpy as np


def fmt_float(value: float, digits: int = 4) -> str:
    """
    Format a float with a fixed number of significant digits

    Args:
        value: Numeric value
        digits: Significant digits

    Returns:
        str: Formatted number ("inf" and "nan" pass through)
    """
    try:
        return f"{float(value):.{digits}g}"
    except (TypeError, ValueError):
        return str(value)


def fmt_percentage(value: float, decimals: int = 1) -> str:
    """
    Format a ratio as percentage

    Args:
        value: Numeric value (0.15 = 15%)
        decimals: Number of decimal places

    Returns:
        str: Formatted percentage string
    """
    try:
        return f"{value * 100:.{decimals}f}%"
    except (TypeError, ValueError):
        return str(value)


def create_slug(text: str) -> str:
    """
    Create a file-name-safe slug from text

    Args:
        text: Input text

    Returns:
        str: Slug of lowercase letters, digits, '-' and '_'
    """
    slug = text.lower()
    slug = re.sub(r'[^a-z0-9_-]+', '_', slug)
    slug = slug.strip('_')
    slug = re.sub(r'_+', '_', slug)
    return slug or "system"


def safe_divide(numerator: float, denominator: float, default: float = 0.0) -> float:
    """
    Safely divide two numbers, returning default if division by zero

    Args:
        numerator: Numerator
        denominator: Denominator
        default: Default value if division by zero

    Returns:
        float: Result or default
    """
    try:
        if denominator == 0:
            return default
        return numerator / denominator
    except (TypeError, ValueError):
        return default


def final_to_peak(values: Sequence[float], default: float = 0.0) -> float:
    """
    Ratio of the last magnitude of a signal to its peak magnitude

    Example:
        >>> final_to_peak([0.0, 2.0, 0.5])
        0.25
    """
    arr = np.abs(np.asarray(values, dtype=float).reshape(-1))
    if arr.size == 0:
        return default
    return safe_divide(float(arr[-1]), float(arr.max()), default)


def relative_drift(values: Sequence[float]) -> Optional[float]:
    """Largest relative deviation of a signal from its initial value."""
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size == 0 or arr[0] == 0:
        return None
    return float(np.max(np.abs(arr - arr[0])) / abs(arr[0]))
