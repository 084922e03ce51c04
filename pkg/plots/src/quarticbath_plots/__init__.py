"""Read-only figure rendering over quarticbath CSV artifacts."""

from .figures import FIGURES, FigureSpec, render

__all__ = ["FIGURES", "FigureSpec", "render"]
__version__ = "0.1.0"
