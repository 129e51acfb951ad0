"""
Run an experiment once per value of a swept parameter.

The config is as for «ebitsim run» plus a sweep, e.g.:

\b
    {"protocol": {"kind": "saturating_n", "n": 2},
     "output_path": "saturating.csv",
     "format": "csv",
     "sweep": {"parameter": "n", "values": [2, 3, 4, 5, 6, 7, 8]}}

An «etpd» protocol may sweep «ratio», the source width over the acceptance
width (σ/δ), on a grid held fixed across rows.

Rows run in parallel on EBITSIM_THREADS worker threads (0, the default, is
serial) and are written in the order of the sweep values.  CSV reports have
the columns protocol, n, sigma, delta, entropy_ebits, coincidence_weight,
oracle_entropy_ebits and rel_err, blank where not applicable.
"""
import click
import logging
from ebitsim.cli import cli
from ebitsim.cli.io import LocalOrRemoteFile
from ebitsim.etpd import warn_unless_increasing
from ebitsim.exceptions import ConfigError
from ..config import plan
from . import emit, load_config, run_plan, with_exit_codes


LOG = logging.getLogger(__name__)


@cli.command("sweep", help = __doc__)
@click.argument("config_file",
    metavar = "<config.json>",
    type = LocalOrRemoteFile("rb"))

@with_exit_codes
def sweep(config_file):
    config = load_config(config_file)

    if config.sweep is None:
        raise ConfigError("missing key «sweep»")

    specs = plan(config)

    LOG.info(f"Sweeping «{config.sweep.parameter}» over {len(specs)} values")

    results = run_plan(specs)

    if config.sweep.parameter in {"ratio", "sigma"}:
        warn_unless_increasing(config.sweep.values, [result.entropy_ebits for result in results])

    emit(config, results)
