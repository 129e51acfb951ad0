"""
Run one experiment from a config file.

The config is a JSON object naming a protocol, where to write the report and
in which format, e.g.:

\b
    {"protocol": {"kind": "symmetric_n", "n": 3},
     "output_path": "symmetric.json",
     "format": "json"}

Prints a one-line summary (protocol, n, entropy in ebits and coincidence
weight) to stdout.  Exits 1 if the config is invalid and 2 if the
post-selection never succeeds or a momentum grid is under-resolved.
"""
import click
import logging
from ebitsim.cli import cli
from ebitsim.cli.io import LocalOrRemoteFile
from ebitsim.exceptions import ConfigError
from . import emit, load_config, run_plan, with_exit_codes


LOG = logging.getLogger(__name__)


@cli.command("run", help = __doc__)
@click.argument("config_file",
    metavar = "<config.json>",
    type = LocalOrRemoteFile("rb"))

@with_exit_codes
def run(config_file):
    config = load_config(config_file)

    if config.sweep is not None:
        raise ConfigError("run takes a single experiment; use «ebitsim sweep» for configs with a sweep", "$.sweep")

    emit(config, run_plan([config.protocol]))
