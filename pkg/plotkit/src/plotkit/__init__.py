"""Figures from benchmark summary documents (CLI: ``plotkit``)."""

from .render import FigureSpec, MissingCells, SchemaMismatch, load_summary, render

__all__ = ["FigureSpec", "MissingCells", "SchemaMismatch", "load_summary", "render"]

__version__ = "0.1.0"
