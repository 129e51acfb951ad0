"""
Oracle suites for the numerical engines.
"""
import click
import logging
import numpy as np
import scipy.stats
from typing import Callable, List, NamedTuple
from ebitsim.cli import cli
from ebitsim.etpd import default_grid, width_sweep_row
from ebitsim.exceptions import NumericalFailure
from ebitsim.optics import PortBasis, compose, reck_decompose
from ebitsim.postselect import (
    PhotonEnsemble,
    coincidence_project,
    coincidence_project_bruteforce,
    permanent,
    permanent_bruteforce,
)
from ebitsim.protocols import ProtocolSpec, random_network, run_protocol
from ebitsim.utils import format_doc
from . import with_exit_codes


LOG = logging.getLogger(__name__)

SEED = 20260101


class Suite(NamedTuple):
    name: str
    description: str
    check: Callable[[], float]
    tolerance: float


def random_complex(random: np.random.Generator, n: int) -> np.ndarray:
    return random.normal(size = (n, n)) + 1j * random.normal(size = (n, n))


def check_permanent() -> float:
    random = np.random.default_rng(SEED)
    worst = 0.0

    for n in range(2, 9):
        matrix = random_complex(random, n)
        expected = permanent_bruteforce(matrix)
        worst = max(worst, abs(permanent(matrix) - expected) / abs(expected))

    return worst


def check_projection() -> float:
    random = np.random.default_rng(SEED)
    worst = 0.0

    for n in range(2, 7):
        ensemble = PhotonEnsemble(random_complex(random, n))
        network = random_network(n, SEED + n)

        for net in (None, network):
            fast = coincidence_project(ensemble, net).matrix
            slow = coincidence_project_bruteforce(ensemble, net).matrix
            worst = max(worst, np.linalg.norm(fast - slow) / np.linalg.norm(slow))

    return worst


def check_reck() -> float:
    worst = 0.0

    for n in range(2, 9):
        unitary = scipy.stats.unitary_group.rvs(n, random_state = SEED + n)
        rebuilt = compose(reck_decompose(unitary), PortBasis.of(n)).transfer
        worst = max(worst, float(np.max(np.abs(rebuilt - unitary))))

    return worst


def check_gaussian_oracle() -> float:
    grid = default_grid(1.0)
    return max(width_sweep_row(ratio, grid).rel_err for ratio in (0.3, 1.0, 3.0))


def check_saturation() -> float:
    return max(
        abs(run_protocol(ProtocolSpec("saturating_n", n = n)).entropy_ebits - np.log2(n))
            for n in range(2, 9))


def check_symmetric() -> float:
    # Spectrum {2/3, 1/6, 1/6}
    expected = -(2/3) * np.log2(2/3) - (1/3) * np.log2(1/6)
    return abs(run_protocol(ProtocolSpec("symmetric_n", n = 3)).entropy_ebits - expected)


SUITES = [
    Suite("permanent",  "Ryser vs. permutation sum, n = 2…8",               check_permanent,       1e-12),
    Suite("projection", "fast vs. brute-force coincidence projection",     check_projection,      1e-12),
    Suite("reck",       "mesh round trip of Haar-random unitaries, N = 2…8", check_reck,          1e-10),
    Suite("gaussian",   "ETPD kernel vs. analytic Schmidt spectrum",        check_gaussian_oracle, 1e-2),
    Suite("saturation", "filtered symmetric protocol reaches log₂N",        check_saturation,      1e-9),
    Suite("symmetric",  "three-photon symmetric protocol entropy",          check_symmetric,       1e-9),
]


@cli.command("selftest")
@click.option("--only", "only",
    metavar = "<suite>",
    help = "Run only the named suite (may be repeated)",
    type = click.Choice([suite.name for suite in SUITES]),
    multiple = True)

@with_exit_codes
@format_doc(SEED = SEED)
def selftest(only):
    """
    Check the numerical engines against their independent references.

    Runs each oracle suite in-process and prints one line per suite with the
    worst error found and the tolerance it was held to.  Random inputs are
    drawn from seed {SEED}.  Exits 2 if any suite fails.
    """
    failed: List[str] = []

    for suite in SUITES:
        if only and suite.name not in only:
            continue

        LOG.debug(f"Running suite «{suite.name}»")

        worst = suite.check()
        passed = worst <= suite.tolerance

        click.echo(f"{'ok' if passed else 'FAIL':4} {suite.name:10} worst error {worst:.3g} (tolerance {suite.tolerance:g}): {suite.description}")

        if not passed:
            failed.append(suite.name)

    if failed:
        raise NumericalFailure(f"selftest failed: {', '.join(failed)}")
