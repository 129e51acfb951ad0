"""
Experiment configs and process settings for the CLI.

An experiment config is a JSON object such as::

    {
        "protocol": {"kind": "saturating_n", "n": 4},
        "output_path": "saturating.csv",
        "format": "csv",
        "sweep": {"parameter": "n", "values": [2, 3, 4, 5]}
    }

Unknown keys anywhere are rejected.  Errors are reported as
:class:`~ebitsim.exceptions.ConfigError` carrying the JSON path of the
offending field.
"""
import json
import logging
from os import environ
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional
from ..etpd import MomentumGrid, default_grid, widths_for_ratio
from ..exceptions import ConfigError, DomainError
from ..optics import LinearNetwork
from ..protocols import ACCEPTANCE_KINDS, PROTOCOL_KINDS, ProtocolSpec, validate_spec
from ..serialize import network_from_records
from ..utils import prose_list


LOG = logging.getLogger(__name__)

variables = [
    ("THREADS", int, 0),
]

FORMATS = ("json", "csv")

TOP_LEVEL_KEYS = ("protocol", "output_path", "format", "sweep")

#: Protocol keys accepted for each kind, besides ``kind`` itself.
PROTOCOL_KEYS = {
    "single_detection":        ("n", "seed"),
    "two_photon_two_detector": ("n", "network", "seed"),
    "symmetric_n":             ("n",),
    "saturating_n":            ("n", "filter_amplitude"),
    "etpd":                    ("sigma", "delta", "grid", "acceptance"),
}

#: Parameters a sweep may vary for each kind.  ``ratio`` is σ/δ at fixed grid.
SWEEP_PARAMETERS = {
    "single_detection":        ("n", "seed"),
    "two_photon_two_detector": ("seed",),
    "symmetric_n":             ("n",),
    "saturating_n":            ("n", "filter_amplitude"),
    "etpd":                    ("sigma", "delta", "ratio"),
}


def from_environ() -> dict:
    """
    Get config values from the environment, or fall back to defaults.

    >>> from_environ()["THREADS"] >= 0
    True
    """
    config = {}

    for key, typecast, default in variables:
        name = f"EBITSIM_{key}"

        try:
            value = typecast(environ.get(name, default))
        except ValueError:
            raise ConfigError(f"not a valid {typecast.__name__}: {environ[name]!r}", name) from None

        if value < 0:
            raise ConfigError(f"must be ≥ 0, not {value}", name)

        config[key] = value

    return config


class Sweep(NamedTuple):
    parameter: str
    values: List[Any]


class ExperimentConfig(NamedTuple):
    protocol: ProtocolSpec
    output_path: str
    format: str = "json"
    sweep: Optional[Sweep] = None


def parse_config(text: bytes) -> ExperimentConfig:
    """
    Parse and validate an experiment config.

    >>> parse_config(b'{"protocol": {"kind": "symmetric_n", "n": 3}, "output_path": "out.json", "format": "json"}').protocol
    ProtocolSpec(kind='symmetric_n', n=3, network=None, sigma=None, delta=None, grid=None, acceptance='sum_gaussian', filter_amplitude=None, seed=None)

    >>> parse_config(b'{"protocol": {"kind": "saturating_n", "n": 1}, "output_path": "out.json"}')
    Traceback (most recent call last):
        ...
    ebitsim.exceptions.ConfigError: $.protocol.n: n out of range [2,12]: 1
    """
    try:
        document = json.loads(text.decode("utf-8"))
    except UnicodeDecodeError as error:
        raise ConfigError(f"config is not UTF-8: {error}") from None
    except json.JSONDecodeError as error:
        raise ConfigError(f"config is not valid JSON: {error}") from None

    require_object(document, "$")
    reject_unknown(document, TOP_LEVEL_KEYS, "$")

    for key in ("protocol", "output_path"):
        if key not in document:
            raise ConfigError(f"missing key «{key}»")

    output_path = document["output_path"]

    if not isinstance(output_path, str) or not output_path:
        raise ConfigError("output_path must be a non-empty string", "$.output_path")

    output_format = document.get("format", "json")

    if output_format not in FORMATS:
        raise ConfigError(f"format must be {prose_list(FORMATS)}, not {output_format!r}", "$.format")

    protocol = parse_protocol(document["protocol"], "$.protocol")

    if "sweep" in document:
        sweep = parse_sweep(document["sweep"], protocol, "$.sweep")

        # Every row is checked up front so a bad value fails before any work
        # is done.
        for i in range(len(sweep.values)):
            sweep_row(protocol, sweep, i)

    else:
        sweep = None
        checked_spec(protocol, "$.protocol")

    return ExperimentConfig(protocol, output_path, output_format, sweep)


def parse_protocol(document: Any, path: str) -> ProtocolSpec:
    """
    Parse the ``protocol`` object into an unvalidated
    :class:`~ebitsim.protocols.ProtocolSpec`; fields a sweep provides may
    still be missing.
    """
    require_object(document, path)

    kind = document.get("kind")

    if kind not in PROTOCOL_KINDS:
        raise ConfigError(f"kind must be {prose_list(PROTOCOL_KINDS)}, not {kind!r}", f"{path}.kind")

    reject_unknown(document, ("kind", *PROTOCOL_KEYS[kind]), path)

    fields = {
        key: FIELD_PARSERS[key](value, f"{path}.{key}")
            for key, value in document.items()
             if key != "kind"
    }

    return ProtocolSpec(kind, **fields)


def parse_sweep(document: Any, protocol: ProtocolSpec, path: str) -> Sweep:
    require_object(document, path)
    reject_unknown(document, ("parameter", "values"), path)

    parameter = document.get("parameter")
    allowed = SWEEP_PARAMETERS[protocol.kind]

    if parameter not in allowed:
        raise ConfigError(f"{protocol.kind} can sweep {prose_list(allowed)}, not {parameter!r}", f"{path}.parameter")

    values = document.get("values")

    if not isinstance(values, list) or not values:
        raise ConfigError("sweep values must be a non-empty array", f"{path}.values")

    parse = positive_number if parameter == "ratio" else FIELD_PARSERS[parameter]

    return Sweep(parameter, [parse(value, f"{path}.values[{i}]") for i, value in enumerate(values)])


def sweep_row(protocol: ProtocolSpec, sweep: Sweep, index: int) -> ProtocolSpec:
    """
    The validated protocol for row *index* of *sweep*.

    Sweeping ``ratio`` sets σ and δ from σ/δ on a grid fixed across the sweep
    (the protocol's grid, or the default grid for unit widths), so the wider
    width always spans the grid.
    """
    value = sweep.values[index]

    if sweep.parameter == "ratio":
        grid = protocol.grid or default_grid(1.0)
        sigma, delta = widths_for_ratio(value, grid)
        row = protocol._replace(sigma = sigma, delta = delta, grid = grid)
        swept = {"sigma", "delta"}
    else:
        row = protocol._replace(**{sweep.parameter: value})
        swept = {sweep.parameter}

    try:
        return validate_spec(row)
    except DomainError as error:
        if error.field in swept:
            path = f"$.sweep.values[{index}]"
        else:
            path = f"$.protocol.{error.field}" if error.field else "$.protocol"
        raise ConfigError(str(error), path) from None


def plan(config: ExperimentConfig) -> List[ProtocolSpec]:
    """
    The protocols to run for *config*, in output order.

    >>> config = parse_config(b'{"protocol": {"kind": "saturating_n", "n": 2}, "output_path": "-", "sweep": {"parameter": "n", "values": [2, 3, 4, 5]}}')
    >>> [spec.n for spec in plan(config)]
    [2, 3, 4, 5]
    """
    if config.sweep is None:
        return [config.protocol]

    return [sweep_row(config.protocol, config.sweep, i) for i in range(len(config.sweep.values))]


def checked_spec(spec: ProtocolSpec, path: str) -> ProtocolSpec:
    """
    Run :func:`~ebitsim.protocols.validate_spec`, turning its errors into
    config errors at the offending field beneath *path*.
    """
    try:
        return validate_spec(spec)
    except DomainError as error:
        raise ConfigError(str(error), f"{path}.{error.field}" if error.field else path) from None


def require_object(document: Any, path: str) -> None:
    if not isinstance(document, Mapping):
        raise ConfigError(f"expected an object, not {type(document).__name__}", path)


def reject_unknown(document: Mapping[str, Any], allowed, path: str) -> None:
    unknown = [key for key in document if key not in allowed]

    if unknown:
        raise ConfigError(f"unknown key(s) {prose_list(unknown, 'and')}; expected {prose_list(allowed)}", path)


def integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, not {value!r}", path)
    return value


def number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, not {value!r}", path)
    return float(value)


def positive_number(value: Any, path: str) -> float:
    value = number(value, path)

    if not value > 0:
        raise ConfigError(f"must be positive, not {value}", path)

    return value


def parse_acceptance(value: Any, path: str) -> str:
    if value not in ACCEPTANCE_KINDS:
        raise ConfigError(f"acceptance must be {prose_list(ACCEPTANCE_KINDS, 'or')}, not {value!r}", path)
    return value


def parse_grid(value: Any, path: str) -> MomentumGrid:
    require_object(value, path)
    reject_unknown(value, ("points", "extent"), path)

    for key in ("points", "extent"):
        if key not in value:
            raise ConfigError(f"missing key «{key}»", path)

    points = integer(value["points"], f"{path}.points")
    extent = positive_number(value["extent"], f"{path}.extent")

    try:
        return MomentumGrid.of(points, extent)
    except DomainError as error:
        raise ConfigError(str(error), path) from None


def parse_network(value: Any, path: str) -> LinearNetwork:
    return network_from_records(value, ports = 2, path = path)


FIELD_PARSERS: Dict[str, Callable[[Any, str], Any]] = {
    "n":                integer,
    "seed":             integer,
    "sigma":            number,
    "delta":            number,
    "filter_amplitude": number,
    "acceptance":       parse_acceptance,
    "grid":             parse_grid,
    "network":          parse_network,
}
