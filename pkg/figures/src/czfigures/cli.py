"""figures command line: render recipes from CSV directories."""

import sys

import click

from . import __version__
from .recipes import RECIPES, SchemaError, render


@click.group()
@click.version_option(__version__)
def main():
    """Render static figures from czpulse CSV outputs."""


@main.command("render")
@click.option("--recipe", "name", required=True,
              help=f"Recipe name; one of {', '.join(sorted(RECIPES))}.")
@click.option("--in", "indir", required=True, type=click.Path(),
              help="Directory holding the input CSV tables.")
@click.option("--out", "outdir", required=True, type=click.Path(),
              help="Output directory for the image.")
def render_cmd(name, indir, outdir):
    """Render one figure; fails loudly on schema mismatch."""
    try:
        path = render(name, indir, outdir)
    except SchemaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(path)


if __name__ == "__main__":
    main()
