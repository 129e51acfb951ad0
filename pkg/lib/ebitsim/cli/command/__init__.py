"""
Commands for the simulator CLI.
"""
import click
import logging
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from typing import List, Sequence
from ...exceptions import ConfigError, DomainError, NumericalFailure
from ...protocols import ProtocolResult, ProtocolSpec, run_protocol
from ...serialize import as_json, result_to_json
from ..config import ExperimentConfig, from_environ, parse_config, plan
from ..io import write_artifact
from ..io.pandas import dump_csv, results_frame


__all__ = [
    "run",
    "sweep",
    "decompose",
    "selftest",
]


LOG = logging.getLogger(__name__)

#: Exit status for configs and inputs that fail validation.
EXIT_CONFIG_ERROR = 1

#: Exit status for runs whose numerics fail (zero success amplitude,
#: under-resolved grid).
EXIT_NUMERICAL_FAILURE = 2


def with_exit_codes(command):
    """
    Decorator to map errors raised by a command onto exit statuses.

    :class:`~ebitsim.exceptions.ConfigError` and
    :class:`~ebitsim.exceptions.DomainError` exit with status 1 and
    :class:`~ebitsim.exceptions.NumericalFailure` with status 2, after logging
    the error.  Anything else is a bug and propagates with its traceback.
    """
    @wraps(command)
    def decorated(*args, **kwargs):
        try:
            return command(*args, **kwargs)

        except (ConfigError, DomainError) as error:
            LOG.error(f"Aborting with error: {error}")
            click.get_current_context().exit(EXIT_CONFIG_ERROR)

        except NumericalFailure as error:
            LOG.error(f"Aborting with error: {error}")
            click.get_current_context().exit(EXIT_NUMERICAL_FAILURE)

    return decorated


def load_config(config_file) -> ExperimentConfig:
    """
    Read and parse the experiment config in the open binary *config_file*.
    """
    LOG.debug(f"Loading config from «{getattr(config_file, 'path', config_file.name)}»")

    return parse_config(config_file.read())


def run_plan(specs: Sequence[ProtocolSpec]) -> List[ProtocolResult]:
    """
    Run every protocol in *specs*, on ``EBITSIM_THREADS`` worker threads when
    set.  Results are in the order of *specs* regardless of completion order.
    """
    threads = from_environ()["THREADS"]

    if threads > 0 and len(specs) > 1:
        LOG.debug(f"Running {len(specs)} protocols on {threads} threads")

        with ThreadPoolExecutor(max_workers = threads) as pool:
            return list(pool.map(run_protocol, specs))

    return [run_protocol(spec) for spec in specs]


def summary_line(result: ProtocolResult) -> str:
    """
    One line per result for stdout.

    >>> summary_line(run_protocol(ProtocolSpec("symmetric_n", n = 2)))
    'symmetric_n, n=2, entropy_ebits=1, coincidence_weight=0.5'
    """
    n = result.spec.n if result.spec.n is not None else "-"

    return (
        f"{result.spec.kind}, n={n}, "
        f"entropy_ebits={result.entropy_ebits:.12g}, "
        f"coincidence_weight={result.coincidence_weight:.12g}")


def emit(config: ExperimentConfig, results: Sequence[ProtocolResult]) -> None:
    """
    Write *results* to the config's output in its format and print a summary
    line for each to stdout (unless the artifact itself goes to stdout).
    """
    if config.format == "csv":
        text = dump_csv(results_frame(results))

    elif config.sweep is None:
        text = as_json(result_to_json(results[0])) + "\n"

    else:
        text = as_json({
            "sweep": {"parameter": config.sweep.parameter, "values": config.sweep.values},
            "results": [result_to_json(result) for result in results],
        }) + "\n"

    write_artifact(config.output_path, text)

    if config.output_path != "-":
        for result in results:
            click.echo(summary_line(result))
