"""czfigures: static figure rendering for czpulse CSV artifacts."""

from .recipes import RECIPES, PlotRecipe, SchemaError, render

__version__ = "0.1.0"
