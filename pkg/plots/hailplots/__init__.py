"""Static diagnostic figures from hailsim experiment artifacts.

Reads the runner's CSV/JSONL outputs and renders deterministic images; it
never recomputes model statistics (only axis transforms), and it refuses
input files that are not covered by a valid run manifest.
"""

from .render import FigureSpec, ManifestError, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "ManifestError", "render", "__version__"]
