"""Entry point: render <recipe.json> [more recipes...] [--data-dir D] [--out-dir D]."""

from __future__ import annotations

import argparse
import sys

from .data import MissingColumn
from .plot import render
from .recipe import RecipeError, load_recipe


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="render qprob CSV/JSON artifacts into figures")
    parser.add_argument("recipes", nargs="+", metavar="recipe.json")
    parser.add_argument("--data-dir", default=".",
                        help="directory the recipe's input paths resolve in")
    parser.add_argument("--out-dir", default=None,
                        help="where images are written (default: data dir)")
    args = parser.parse_args(argv)

    for path in args.recipes:
        try:
            recipe = load_recipe(path)
        except (RecipeError, OSError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 1
        try:
            out = render(recipe, base_dir=args.data_dir, out_dir=args.out_dir)
        except MissingColumn as exc:
            print(f"error: {recipe.figure_id}: {exc}", file=sys.stderr)
            return 2
        except (ValueError, OSError) as exc:
            print(f"error: {recipe.figure_id}: {exc}", file=sys.stderr)
            return 1
        print(f"{recipe.figure_id} -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
