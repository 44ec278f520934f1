"""Recipe schema: a figure is a grid of panels, each panel draws one input
file as lines, a signed histogram, or a contour map."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class RecipeError(ValueError):
    """Structurally invalid recipe document."""


_PANEL_KINDS = ("line", "histogram", "contour")


@dataclass(frozen=True)
class SeriesSpec:
    column: str
    label: str = None
    style: dict = field(default_factory=dict)
    expected_sum: float = None       # legend cross-check, optional

    @classmethod
    def parse(cls, obj) -> "SeriesSpec":
        if isinstance(obj, str):
            return cls(column=obj)
        if not isinstance(obj, dict) or "column" not in obj:
            raise RecipeError(f"series needs a 'column': {obj!r}")
        return cls(column=obj["column"], label=obj.get("label"),
                   style=obj.get("style", {}),
                   expected_sum=obj.get("expected_sum"))


@dataclass(frozen=True)
class PanelSpec:
    input: str
    kind: str = "line"
    x: str = None                    # abscissa column (line); x axis (contour)
    y: str = None                    # ordinate column (contour only)
    z: str = None                    # level column (contour only)
    series: tuple = ()
    title: str = None
    xlabel: str = None
    ylabel: str = None
    xlim: tuple = None
    ylim: tuple = None
    bin_width: float = None          # histogram only; default span/40
    legend_sums: bool = True

    @classmethod
    def parse(cls, obj) -> "PanelSpec":
        if not isinstance(obj, dict) or "input" not in obj:
            raise RecipeError(f"panel needs an 'input': {obj!r}")
        kind = obj.get("kind", "line")
        if kind not in _PANEL_KINDS:
            raise RecipeError(f"unknown panel kind {kind!r}")
        if kind == "line" and not obj.get("series"):
            raise RecipeError("line panel needs a non-empty 'series' list")
        if kind == "contour" and not all(obj.get(k) for k in ("x", "y", "z")):
            raise RecipeError("contour panel needs 'x', 'y' and 'z' columns")
        lim = lambda key: tuple(obj[key]) if obj.get(key) else None
        return cls(
            input=obj["input"],
            kind=kind,
            x=obj.get("x"),
            y=obj.get("y"),
            z=obj.get("z"),
            series=tuple(SeriesSpec.parse(s) for s in obj.get("series", ())),
            title=obj.get("title"),
            xlabel=obj.get("xlabel"),
            ylabel=obj.get("ylabel"),
            xlim=lim("xlim"),
            ylim=lim("ylim"),
            bin_width=obj.get("bin_width"),
            legend_sums=bool(obj.get("legend_sums", True)),
        )


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    output: str
    panels: tuple
    ncols: int = None
    figsize: tuple = None
    suptitle: str = None

    @classmethod
    def parse(cls, obj) -> "FigureRecipe":
        if not isinstance(obj, dict):
            raise RecipeError("recipe root must be an object")
        for key in ("figure_id", "output", "panels"):
            if key not in obj:
                raise RecipeError(f"recipe is missing {key!r}")
        panels = obj["panels"]
        if not isinstance(panels, list) or not panels:
            raise RecipeError("'panels' must be a non-empty list")
        return cls(
            figure_id=str(obj["figure_id"]),
            output=str(obj["output"]),
            panels=tuple(PanelSpec.parse(p) for p in panels),
            ncols=obj.get("ncols"),
            figsize=tuple(obj["figsize"]) if obj.get("figsize") else None,
            suptitle=obj.get("suptitle"),
        )


def load_recipe(path) -> FigureRecipe:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise RecipeError(f"{path}: not valid JSON: {exc}") from exc
    return FigureRecipe.parse(doc)
