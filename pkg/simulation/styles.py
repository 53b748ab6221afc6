"""
Plot Styling Configuration
Colors, line styles and figure settings for simulation plots
"""

import matplotlib.colors as mcolors
from typing import Dict, List
import logging

# Setup logging
logger = logging.getLogger(__name__)


# =============================================================================
# COLOR SCHEMES
# =============================================================================

class ColorScheme:
    """
    Manages colors for station curves and heatmaps using matplotlib colormaps.
    """

    DEFAULT_COLORMAP = "viridis"
    HEATMAP_COLORMAP = "RdBu_r"

    @staticmethod
    def station_colors(count: int, colormap: str = DEFAULT_COLORMAP) -> List[str]:
        """
        One hex color per spatial station, sampled evenly from a colormap.

        Example:
            >>> ColorScheme.station_colors(3)
            ['#440154', '#21918c', '#fde725']
        """
        try:
            from matplotlib import colormaps as mpl_cmaps
            cmap = mpl_cmaps.get_cmap(colormap)
        except Exception as e:
            logger.error(f"Failed to get colormap: {e}")
            return ColorScheme._fallback_colors(count)
        if count == 1:
            return [mcolors.rgb2hex(cmap(0.5))]
        return [mcolors.rgb2hex(cmap(i / (count - 1))) for i in range(count)]

    @staticmethod
    def _fallback_colors(count: int) -> List[str]:
        basic_colors = [
            "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
            "#a65628", "#f781bf", "#999999", "#66c2a5"
        ]
        return [basic_colors[i % len(basic_colors)] for i in range(count)]


# =============================================================================
# LINE STYLES
# =============================================================================

class LineStyles:
    """
    Defines line styles for output overlays.
    """

    TRUE_OUTPUT = {"color": "#1f77b4", "linewidth": 1.6, "label": "z"}
    ESTIMATE = {"color": "#d62728", "linewidth": 1.2, "linestyle": "--", "label": "z estimate"}
    ERROR = {"color": "#2ca02c", "linewidth": 1.2, "label": "error e_z"}

    @staticmethod
    def get(name: str) -> Dict:
        """
        Copy of a named style.

        Raises:
            KeyError: For unknown names
        """
        styles = {"z": LineStyles.TRUE_OUTPUT, "z_hat": LineStyles.ESTIMATE, "e_z": LineStyles.ERROR}
        return dict(styles[name])


# =============================================================================
# FIGURE SETTINGS
# =============================================================================

FIGURE_SIZE = (7.0, 4.0)
FIGURE_FORMAT = "svg"
DPI = 120
# Reproducible SVG output
SVG_HASH_SALT = "pitools"
FIGURE_METADATA = {"Date": None}
