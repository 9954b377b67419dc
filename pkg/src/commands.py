import click

from barriers.commands import verify_barriers_command
from lab.commands import calibrate_command, diagnose_command, selftest_command, simulate_command, sweep_command
from settings import settings


@click.group(name=settings.APP_NAME)
def cli():
    """Boundary gradient blow-up laboratory for u_t = Δ_p u + |∇u|^q."""


cli.add_command(simulate_command)
cli.add_command(verify_barriers_command)
cli.add_command(diagnose_command)
cli.add_command(calibrate_command)
cli.add_command(sweep_command)
cli.add_command(selftest_command)
