"""
Command-line interface for the Urysohn toolkit.

Every subcommand reads and writes the canonical text formats. Domain
errors are printed on stderr in the ``render_error`` form and exit with
status 1; usage errors are left to click (status 2).
"""
from fractions import Fraction
from pathlib import Path
from typing import Optional

import click

import config
from amalgam import (
    AmalgamSpec,
    amalgamated_union,
    format_pairs,
    load_katetov,
    load_pairs,
    maximal_extension,
    one_point_extension,
    tight_extension,
)
from builder import (
    EXTENDING,
    STRICT,
    Approximant,
    back_and_forth,
    embed_via_homogeneity,
    embed_via_injectivity,
    load_approximant,
    missing_realizations,
    saturate,
    save_approximant,
)
from core import FiniteMetricSpace, format_rational, format_space, load_space
from dap_harness import dap_construct, dap_verify, demo_instance, load_instance, random_dap_instance
from generator import DistanceGrid, describe_grid, enumerate_spaces, random_space
from utils.error_handler import MetricToolkitError, render_error
from utils.logger import setup_logger

logger = setup_logger(__name__)

INPUT = click.Path(exists=True, dir_okay=False, path_type=Path)
OUTPUT = click.Path(dir_okay=False, writable=True, path_type=Path)


class ToolkitGroup(click.Group):
    """Renders toolkit errors on stderr and exits with their status code."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except MetricToolkitError as error:
            logger.debug("command failed: %s", error.message)
            click.echo(render_error(error), err=True)
            ctx.exit(error.status_code)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        output.write_text(text, encoding="utf-8")
        logger.info("wrote %s", output)


def grid_options(func):
    func = click.option('--grid-max', type=click.IntRange(min=1), default=config.DEFAULT_GRID_MAX,
                        show_default=True, help='Largest numerator B of the grid k/q.')(func)
    func = click.option('--grid-q', type=click.IntRange(min=1), default=config.DEFAULT_GRID_Q,
                        show_default=True, help='Grid denominator q.')(func)
    return func


def output_option(func):
    return click.option('--output', '-o', type=OUTPUT, default=None, help='Write the result here instead of stdout.')(func)


@click.group(cls=ToolkitGroup)
@click.version_option("0.1.0", prog_name="urysohn-toolkit")
def cli():
    """Exact finite constructions around the rational Urysohn space."""


@cli.command()
@click.argument('space', type=INPUT)
def validate(space: Path):
    """Check that SPACE is a finite metric space."""
    loaded = load_space(space)
    diameter = format_rational(loaded.diameter()) if len(loaded) else "0/1"
    click.echo(f"OK points={len(loaded)} diameter={diameter}")


@cli.command()
@click.argument('m1', type=INPUT)
@click.argument('m2', type=INPUT)
@click.argument('pairs', type=INPUT)
@output_option
def amalgamate(m1: Path, m2: Path, pairs: Path, output: Optional[Path]):
    """Glue M1 and M2 along the isometric PAIRS (lines "m1-label m2-label")."""
    result = amalgamated_union(AmalgamSpec(load_space(m1), load_space(m2), load_pairs(pairs)))
    _emit(format_space(result.space), output)


@cli.command('extend-point')
@click.argument('space', type=INPUT)
@click.argument('katetov', type=INPUT)
@click.option('--label', required=True, help='Label of the new point.')
@click.option('--complete', 'completion', type=click.Choice(['none', 'maximal', 'tight']), default='none',
              show_default=True, help='How to fill values missing from KATETOV.')
@output_option
def extend_point(space: Path, katetov: Path, label: str, completion: str, output: Optional[Path]):
    """Add one point at the distances given by the Katetov function KATETOV."""
    base = load_space(space)
    f = load_katetov(katetov, base)
    if completion == 'maximal':
        f = maximal_extension(f)
    elif completion == 'tight':
        f = tight_extension(f)
    _emit(format_space(one_point_extension(base, f, label)), output)


@cli.command()
@click.argument('small', type=INPUT)
@click.argument('ambient', type=INPUT)
@click.option('--anchor', type=INPUT, default=None, help='Pairs file "small-label ambient-label".')
@click.option('--mode', type=click.Choice([STRICT, EXTENDING]), default=STRICT, show_default=True)
@click.option('--via', type=click.Choice(['injectivity', 'homogeneity']), default='injectivity', show_default=True)
@click.option('--rounds', type=click.IntRange(min=1), default=config.DEFAULT_ROUNDS, show_default=True)
@output_option
def embed(small: Path, ambient: Path, anchor: Optional[Path], mode: str, via: str, rounds: int,
          output: Optional[Path]):
    """Embed SMALL into AMBIENT, extending the anchor; prints the map.

    With --output the (possibly grown) ambient is written there.
    """
    source = load_space(small)
    approximant = load_approximant(ambient)
    pairs = dict(load_pairs(anchor)) if anchor else {}
    if via == 'homogeneity':
        isometry, grown = embed_via_homogeneity(approximant, source, pairs, rounds)
    else:
        isometry, grown = embed_via_injectivity(approximant, source, pairs, mode=mode)
    click.echo(format_pairs(isometry.pairs), nl=False)
    if output is not None:
        save_approximant(grown, output)


@cli.command('build-approximant')
@click.option('--start', type=INPUT, default=None, help='Starting space (default: one point p0).')
@grid_options
@click.option('--stages', type=click.IntRange(min=0), default=1, show_default=True)
@click.option('--arity', type=click.IntRange(min=1), default=2, show_default=True)
@click.option('--budget', type=click.IntRange(min=1), default=config.POINT_BUDGET, show_default=True)
@output_option
def build_approximant(start: Optional[Path], grid_q: int, grid_max: int, stages: int, arity: int, budget: int,
                      output: Optional[Path]):
    """Grow an approximant by saturation rounds.

    With --output the realization index is written next to it (".index").
    """
    space = load_space(start) if start else FiniteMetricSpace(("p0",), ((Fraction(0),),))
    approximant = Approximant.from_space(space, DistanceGrid(grid_q, grid_max), budget)
    approximant = saturate(approximant, arity, stages)
    missing = missing_realizations(approximant)
    if missing:
        logger.warning("build-approximant: %d realization(s) missing", len(missing))
    if output is None:
        click.echo(format_space(approximant.space), nl=False)
    else:
        save_approximant(approximant, output)
        click.echo(f"points={len(approximant.space)} stage={approximant.stage} "
                   f"sizes={','.join(str(size) for size in approximant.stage_sizes)}")


@cli.command('random-space')
@click.argument('n', type=click.IntRange(min=1))
@click.option('--seed', type=click.IntRange(min=0, max=2 ** 64 - 1), default=config.DEFAULT_SEED, show_default=True)
@grid_options
@output_option
def random_space_command(n: int, seed: int, grid_q: int, grid_max: int, output: Optional[Path]):
    """Generate a random N-point space on the grid."""
    grid = DistanceGrid(grid_q, grid_max)
    space = random_space(n, grid, seed)
    _emit(format_space(space, [f"random n={n} seed={seed} grid={describe_grid(grid)}"]), output)


@cli.command('enumerate')
@click.argument('n', type=click.IntRange(min=1))
@grid_options
@click.option('--limit', type=click.IntRange(min=1), default=None)
@output_option
def enumerate_command(n: int, grid_q: int, grid_max: int, limit: Optional[int], output: Optional[Path]):
    """List every N-point metric with distances on the grid."""
    spaces = enumerate_spaces(n, DistanceGrid(grid_q, grid_max), limit)
    text = "".join(format_space(space, [f"space {i}"]) for i, space in enumerate(spaces, start=1))
    _emit(text + f"# total {len(spaces)}\n", output)


@cli.command('back-and-forth')
@click.argument('space', type=INPUT)
@click.argument('pairs', type=INPUT)
@click.option('--rounds', type=click.IntRange(min=1), default=config.DEFAULT_ROUNDS, show_default=True)
@output_option
def back_and_forth_command(space: Path, pairs: Path, rounds: int, output: Optional[Path]):
    """Extend the partial isometry PAIRS of SPACE to a self-isometry."""
    isometry, grown = back_and_forth(load_approximant(space), dict(load_pairs(pairs)), rounds)
    click.echo(format_pairs(isometry.pairs), nl=False)
    if output is not None:
        save_approximant(grown, output)


@cli.command('dap-demo')
@click.option('--ambient', type=INPUT, default=None)
@click.option('--families', type=INPUT, default=None, help='One family per line: space-separated labels.')
@click.option('--h', 'h_file', type=INPUT, default=None, help='Lines "label p/q".')
@click.option('--seed', type=click.IntRange(min=0, max=2 ** 64 - 1), default=None,
              help='Run a random instance instead.')
@click.option('--format', 'report_format', type=click.Choice(['text', 'lines']), default='text', show_default=True)
@output_option
def dap_demo(ambient: Optional[Path], families: Optional[Path], h_file: Optional[Path], seed: Optional[int],
             report_format: str, output: Optional[Path]):
    """Run the family construction and verify its distance identities."""
    given = [ambient, families, h_file]
    if any(given) and not all(given):
        raise click.UsageError("--ambient, --families and --h go together")
    if all(given):
        instance = load_instance(ambient, families, h_file)
    elif seed is not None:
        instance = random_dap_instance(seed)
    else:
        instance = demo_instance()
    report = dap_verify(dap_construct(instance))
    _emit(report.to_lines() if report_format == 'lines' else report.to_text(), output)
    if not report.ok:
        raise click.exceptions.Exit(1)
