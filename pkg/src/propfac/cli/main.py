import json
import logging
import sys
from typing import Any, Dict, Optional, TextIO

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from .._version import __version__
from ..core.errors import PropfacError, SchemaError
from ..core.utils import dumps_report, render_histogram, sparkline
from .jobs import JobSpec, run

console = Console()
err_console = Console(stderr=True)


def print_banner():
    """Display the propfac banner"""
    banner = """
[bold cyan]
  ┌─┐┬─┐┌─┐┌─┐┌─┐┌─┐┌─┐
  ├─┘├┬┘│ │├─┘├┤ ├─┤│
  ┴  ┴└─└─┘┴  └  ┴ ┴└─┘
[/bold cyan]
[yellow]Proper maps, reflection groups and their factorizations[/yellow]
    """
    console.print(banner)


def configure_logging(verbose: bool):
    """Route library logs through rich on stderr."""
    root = logging.getLogger('propfac')
    root.handlers = [RichHandler(console=err_console, show_path=False)]
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    root.propagate = False


def job_options(func):
    """Flags shared by every computing command; a flag wins over the payload."""
    options = [
        click.option('--seed', type=click.IntRange(min=0), default=None, help='Random seed'),
        click.option('--tol', type=click.FloatRange(min=0, min_open=True), default=None,
                     help='Tolerance of randomized identity tests'),
        click.option('--degree-cap', type=click.IntRange(min=1), default=None,
                     help='Degree cap (invariant search, or Psi for factorize)'),
        click.option('--trials', type=click.IntRange(min=1), default=None,
                     help='Number of random trials'),
        click.option('--order-cap', type=click.IntRange(min=1), default=None,
                     help='Largest group order accepted by closure'),
        click.option('--output', '-o', type=click.Path(dir_okay=False), default=None,
                     help='Also write the JSON report to this file'),
        click.option('--verbose', '-v', is_flag=True, help='Log progress to stderr'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load(source: TextIO) -> Any:
    try:
        return json.load(source)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON in {getattr(source, 'name', 'input')}: {e}") from None


def _summary_rows(report: Dict):
    result = report['result']
    command = report['command']
    if command == 'closure':
        yield 'Order', str(result['group']['order'])
        yield 'Reflections', str(result['group']['reflection_count'])
        yield 'Reflection subgroup', (f"order {result['reflection_subgroup']['order']}, "
                                      f"{result['reflection_subgroup']['cosets']} coset(s)")
    elif command == 'invariants':
        yield 'Degrees', str(result['degrees'])
        for text in result['generators_text']:
            yield 'Generator', text
        for name in ('invariance', 'degree_product', 'reflection_count', 'jacobian'):
            yield name, '✓' if result['checks'][name]['passed'] else '✗'
    elif command == 'multiplicity':
        yield 'Multiplicity', str(result['multiplicity'])
        for line in render_histogram({int(k): v for k, v in result['histogram'].items()}):
            yield 'Fibre sizes', line
    elif command == 'orbit-check':
        yield 'Trials', str(result['trials'])
        yield 'Passed / failed / inconclusive', (f"{result['passed']} / {result['failed']} / "
                                                 f"{result['inconclusive']}")
        yield 'Max fibre residual', f"{result['max_fibre_residual']:.3g}"
    elif command == 'factorize':
        yield 'Target', result['target_text']
        yield 'Psi', result['psi_text'] or '-'
        if result['status'] == 'found':
            yield 'Residual', f"{result['residual']:.3g}"
            ledger = result['multiplicities']
            if ledger:
                yield 'm_F · m_Psi = m_target', (f"{ledger['m_F']} · {ledger['m_psi']} = "
                                                 f"{ledger['m_target']}")
    elif command == 'verify':
        identity = result['identity']
        yield 'Identity residual', f"{identity['max_residual']:.3g}"
        if identity['first_failure'] is not None:
            yield 'First failure', f"sample {identity['first_failure']}"
        ledger = result['multiplicities']
        yield 'm_F · m_Psi = m_target', f"{ledger['m_F']} · {ledger['m_psi']} = {ledger['m_target']}"
        for ray in result['properness']['rays']:
            yield '|target| toward ∂E', sparkline(ray['target_norms'], width=len(ray['t']), peak=1.0)


def print_summary(report: Dict):
    table = Table(title=f"propfac {report['command']}")
    table.add_column("Item", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Status", report['status'])
    table.add_row("Seed", str(report['seed']))
    for item, value in _summary_rows(report):
        table.add_row(item, value)
    err_console.print(table)


def execute(source: TextIO, command: Optional[str], options: Dict[str, Any]):
    """Run one job from ``source`` and emit its report; exits with the error's code on failure."""
    output = options.pop('output', None)
    configure_logging(options.pop('verbose', False))
    try:
        data = _load(source)
        if command is None:
            job = JobSpec.from_dict(data)
        else:
            if not isinstance(data, dict):
                raise SchemaError(f"the {command} payload must be a JSON object")
            job = JobSpec(command, data)
        report = run(job, options)
    except PropfacError as e:
        err_console.print(Panel(
            f"[red]{e}[/red]",
            title=f"⚠️ {type(e).__name__}",
            border_style="red"
        ))
        sys.exit(e.exit_code)
    except KeyboardInterrupt:
        err_console.print("\n[yellow]Stopped by user[/yellow]")
        sys.exit(130)

    text = dumps_report(report)
    click.echo(text, nl=False)
    if output:
        with open(output, 'w', encoding='utf-8') as f:
            f.write(text)
    print_summary(report)


@click.group()
@click.version_option(version=__version__)
def cli():
    """🧮 propfac - proper maps, reflection groups and their factorizations"""


@cli.command()
@click.argument('payload', type=click.File('r'), default='-')
@job_options
def closure(payload: TextIO, **options):
    """🔁 Close generators into a finite unitary group"""
    execute(payload, 'closure', options)


@cli.command()
@click.argument('payload', type=click.File('r'), default='-')
@job_options
def invariants(payload: TextIO, **options):
    """🧩 Basic invariants of a reflection group, with checks"""
    execute(payload, 'invariants', options)


@cli.command()
@click.argument('payload', type=click.File('r'), default='-')
@job_options
def multiplicity(payload: TextIO, **options):
    """🔢 Estimate the generic fibre size of a polynomial map"""
    execute(payload, 'multiplicity', options)


@cli.command(name='orbit-check')
@click.argument('payload', type=click.File('r'), default='-')
@job_options
def orbit_check(payload: TextIO, **options):
    """🌀 Compare fibre images with group orbits"""
    execute(payload, 'orbit-check', options)


@cli.command()
@click.argument('payload', type=click.File('r'), default='-')
@job_options
def factorize(payload: TextIO, **options):
    """🧷 Search Psi with Psi o F = P_Gamma o phi^(p)"""
    execute(payload, 'factorize', options)


@cli.command()
@click.argument('payload', type=click.File('r'), default='-')
@job_options
def verify(payload: TextIO, **options):
    """✅ Verify a given factorization"""
    execute(payload, 'verify', options)


@cli.command(name='run')
@click.argument('job', type=click.File('r'), default='-')
@job_options
def run_job(job: TextIO, **options):
    """▶️  Run a job file {"command", "payload", "seed", "tolerances"}"""
    execute(job, None, options)


@cli.command(name='list')
def list_features():
    """📋 List all available commands"""
    table = Table(title="propfac Commands")
    table.add_column("Command", style="cyan")
    table.add_column("Description", style="green")
    table.add_column("Payload", style="yellow")

    commands = {
        "closure": ("🔁 Finite unitary group closure", "group spec"),
        "invariants": ("🧩 Chevalley basis and checks", "group spec or {group}"),
        "multiplicity": ("🔢 Generic fibre size", "{F, pseudoellipsoid?}"),
        "orbit-check": ("🌀 Fibres vs. orbits", "{F, group, pseudoellipsoid}"),
        "factorize": ("🧷 Solve for Psi", "{F, group, pseudoellipsoid, degree_cap?}"),
        "verify": ("✅ Check a factorization", "{psi, F, group, pseudoellipsoid}"),
        "run": ("▶️  Run a job file", "{command, payload, seed?, tolerances?}"),
        "about": ("ℹ️  About propfac", "None"),
        "list": ("📋 List all commands", "None")
    }

    for cmd, (desc, payload) in commands.items():
        table.add_row(cmd, desc, payload)

    console.print(table)


@cli.command(name='about')
def about():
    """ℹ️  Display information about propfac"""
    print_banner()
    about_text = f"""[bold cyan]propfac - proper maps, reflection groups and their factorizations[/bold cyan]

[green]Version:[/green] {__version__}
[green]License:[/green] MIT

🛠️  Computes finite unitary reflection groups and their basic invariants,
builds proper polynomial maps out of pseudoellipsoids, and finds and checks
factorizations Psi o F = P_Gamma o phi^(p).

[yellow]Key Features:[/yellow]
• 🔁 Group closure and reflection subgroups
• 🧩 Chevalley bases with degree and Jacobian checks
• 🔢 Multiplicities from multistart Newton fibres
• 🧷 Polynomial factor search with a multiplicity ledger
• 📄 Deterministic JSON reports for a given seed"""

    console.print(Panel(about_text, title="About propfac", border_style="blue"))


if __name__ == '__main__':
    cli()
