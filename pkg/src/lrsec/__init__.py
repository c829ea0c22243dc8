"""Design and analysis of left-right syndrome extraction circuits for CSS codes."""

from .codes import CssCode, builtin_code, new_css

__version__ = "0.1.0"

__all__ = ["CssCode", "builtin_code", "new_css", "__version__"]
