"""Turn qprob CLI artifacts (CSV tables/sweeps, JSON envelopes) into figures.

The renderer is strictly read-only: it never recomputes any physics. Legend
sums are recomputed from the loaded file and cross-checked against whatever
normalization metadata the artifact carries.
"""

from .data import Dataset, MissingColumn, load_dataset
from .recipe import FigureRecipe, PanelSpec, RecipeError, SeriesSpec, load_recipe
from .plot import render

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FigureRecipe",
    "MissingColumn",
    "PanelSpec",
    "RecipeError",
    "SeriesSpec",
    "load_dataset",
    "load_recipe",
    "render",
]
