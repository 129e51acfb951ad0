"""
Decompose a unitary into a beam-splitter mesh.

Reads an N×N unitary from a JSON file, either as {"re": [[…]], "im": [[…]]}
or as a nested array of real numbers, and prints the equivalent netlist of
phase shifters and beam splitters (as a JSON array of element records) to
stdout.  Exits 1 if the input is not a unitary matrix.
"""
import click
import json
import logging
import numpy as np
from ebitsim.cli import cli
from ebitsim.cli.io import LocalOrRemoteFile
from ebitsim.exceptions import ConfigError
from ebitsim.optics import PortBasis, compose, reck_decompose
from ebitsim.serialize import as_json, load_unitary, netlist_to_records
from . import with_exit_codes


LOG = logging.getLogger(__name__)


@cli.command("decompose", help = __doc__)
@click.argument("unitary_file",
    metavar = "<unitary.json>",
    type = LocalOrRemoteFile("rb"))

@with_exit_codes
def decompose(unitary_file):
    try:
        document = json.loads(unitary_file.read().decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as error:
        raise ConfigError(f"unitary is not valid JSON: {error}") from None

    unitary = load_unitary(document)
    elements = reck_decompose(unitary)

    error = np.max(np.abs(compose(elements, PortBasis.of(unitary.shape[0])).transfer - unitary))

    LOG.info(f"Decomposed {unitary.shape[0]}×{unitary.shape[0]} unitary into {len(elements)} elements (reconstruction error {error:.3g})")

    click.echo(as_json(netlist_to_records(elements)))
