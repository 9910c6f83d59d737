"""Command line for batch figure rendering."""

import sys

import click

from .render import PlotError, render_spec

EXIT_VALIDATION = 2
EXIT_IO = 4


@click.group()
@click.version_option()
def main():
    """Render figures from run-artifact CSV/JSON files."""


@main.command("render")
@click.option("--spec", "spec_path", required=True,
              help="JSON file listing the figures to render.")
def render_cmd(spec_path):
    """Render every figure in the spec; prints one line per written image."""
    try:
        written = render_spec(spec_path)
    except PlotError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    for path in written:
        click.echo(path)


if __name__ == "__main__":
    main()
