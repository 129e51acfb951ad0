"""
JSON encodings of networks, amplitudes and Schmidt reports.

Output is deterministic: keys are written in a fixed order and floats with
17 significant digits, so the same inputs always produce byte-identical files.
"""
import json
import math
import numpy as np
from typing import Any, Dict, List, Mapping, Optional, Sequence
from .entanglement import SchmidtReport
from .exceptions import ConfigError, DomainError
from .optics import Attenuator, BeamSplitter, LinearNetwork, NetworkElement, PhaseShifter, PortBasis, compose
from .postselect import BipartiteAmplitude
from .protocols import ProtocolResult, ProtocolSpec


#: Significant digits for floats in reports; enough to round-trip any double.
FLOAT_DIGITS = 17


def as_json(value: Any, indent: Optional[int] = 2) -> str:
    """
    Converts *value* to a JSON string using our custom :class:`JsonEncoder`.

    NaN and infinities are refused, since they have no standard JSON form.

    >>> as_json({"lambda": np.array([0.5, 0.5]), "rank": np.int64(2)}, indent = None)
    '{"lambda": [0.5, 0.5], "rank": 2}'
    """
    return json.dumps(value, allow_nan = False, cls = JsonEncoder, indent = indent)


def float_text(value: float) -> str:
    """
    JSON text for a finite float, always with a decimal point or exponent.

    >>> float_text(0.1)
    '0.10000000000000001'
    >>> float_text(2.0)
    '2.0'
    >>> float_text(float("inf"))
    Traceback (most recent call last):
        ...
    ValueError: Out of range float values are not JSON compliant: inf
    """
    if not math.isfinite(value):
        raise ValueError(f"Out of range float values are not JSON compliant: {value!r}")

    text = format(value, f".{FLOAT_DIGITS}g")

    return text if "." in text or "e" in text else text + ".0"


class JsonEncoder(json.JSONEncoder):
    """
    Encodes Python values into JSON for non-standard objects, writing floats
    with :func:`float_text`.
    """

    def iterencode(self, value, _one_shot = False):
        # The C encoder always uses float.__repr__, so encode in Python with
        # our own float formatting.
        encode_string = json.encoder.encode_basestring_ascii if self.ensure_ascii else json.encoder.encode_basestring

        return json.encoder._make_iterencode(  # type: ignore
            {} if self.check_circular else None,
            self.default,
            encode_string,
            self.indent,
            float_text,
            self.key_separator,
            self.item_separator,
            self.sort_keys,
            self.skipkeys,
            _one_shot)(value, 0)

    def default(self, value):
        """
        Returns *value* as JSON or raises a TypeError.

        Serializes:

        * :class:`numpy.ndarray` as (nested) lists
        * numpy scalars as the equivalent Python number
        """
        if isinstance(value, np.ndarray):
            return value.tolist()
        elif isinstance(value, np.integer):
            return int(value)
        elif isinstance(value, np.floating):
            return float(value)
        else:
            # Let the base class raise the TypeError
            return super().default(value)


def element_to_record(element: NetworkElement) -> Dict[str, Any]:
    """
    >>> element_to_record(BeamSplitter(0, 1, 0.25, 0.0))
    {'kind': 'beam_splitter', 'ports': [0, 1], 'theta': 0.25, 'phi': 0.0}
    >>> element_to_record(Attenuator(2, 0.5))
    {'kind': 'attenuator', 'port': 2, 't': 0.5}
    """
    if isinstance(element, BeamSplitter):
        return {"kind": element.kind, "ports": [element.port_a, element.port_b], "theta": element.theta, "phi": element.phi}
    elif isinstance(element, PhaseShifter):
        return {"kind": element.kind, "port": element.port, "phi": element.phi}
    else:
        return {"kind": element.kind, "port": element.port, "t": element.t}


ELEMENT_KEYS = {
    "beam_splitter": {"kind", "ports", "theta", "phi"},
    "phase_shifter": {"kind", "port", "phi"},
    "attenuator":    {"kind", "port", "t"},
}


def element_from_record(record: Mapping[str, Any], path: str = "$") -> NetworkElement:
    """
    Parse one netlist record, raising :class:`ConfigError` with the record's
    JSON *path* if it is malformed.

    >>> element_from_record({"kind": "phase_shifter", "port": 0, "phi": 1.0})
    PhaseShifter(port=0, phi=1.0)
    >>> element_from_record({"kind": "phase_shifter", "port": 0, "phase": 1.0}, "$[3]")
    Traceback (most recent call last):
        ...
    ebitsim.exceptions.ConfigError: $[3]: unknown key(s) phase for phase_shifter
    """
    if not isinstance(record, Mapping):
        raise ConfigError("network element must be an object", path)

    kind = record.get("kind")

    if kind not in ELEMENT_KEYS:
        raise ConfigError(f"unknown element kind {kind!r}", f"{path}.kind")

    expected = ELEMENT_KEYS[kind]
    unknown = set(record) - expected
    missing = expected - set(record)

    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(sorted(unknown))} for {kind}", path)

    if missing:
        raise ConfigError(f"missing key(s) {', '.join(sorted(missing))} for {kind}", path)

    try:
        if kind == "beam_splitter":
            ports = record["ports"]

            if not (isinstance(ports, list) and len(ports) == 2):
                raise ConfigError("beam splitter ports must be a list of two port indices", f"{path}.ports")

            return BeamSplitter(port_index(ports[0], f"{path}.ports[0]"),
                                port_index(ports[1], f"{path}.ports[1]"),
                                real(record["theta"], f"{path}.theta"),
                                real(record["phi"], f"{path}.phi"))

        elif kind == "phase_shifter":
            return PhaseShifter(port_index(record["port"], f"{path}.port"), real(record["phi"], f"{path}.phi"))

        else:
            t = real(record["t"], f"{path}.t")

            if not 0 <= t <= 1:
                raise ConfigError(f"attenuator amplitude factor must be in [0, 1], not {t}", f"{path}.t")

            return Attenuator(port_index(record["port"], f"{path}.port"), t)

    except (TypeError, ValueError) as error:
        if isinstance(error, ConfigError):
            raise
        raise ConfigError(str(error), path) from None


def port_index(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ConfigError(f"port must be a non-negative integer, not {value!r}", path)
    return value


def real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, not {value!r}", path)
    return float(value)


def netlist_to_records(elements: Sequence[NetworkElement]) -> List[Dict[str, Any]]:
    return [element_to_record(element) for element in elements]


def network_from_records(records: Any, ports: Optional[int] = None, path: str = "$") -> LinearNetwork:
    """
    Build a :class:`~ebitsim.optics.LinearNetwork` from a netlist (a JSON
    array of element records).  The port count defaults to one more than the
    highest port mentioned.
    """
    if not isinstance(records, list):
        raise ConfigError("network must be an array of element records", path)

    elements = [element_from_record(record, f"{path}[{i}]") for i, record in enumerate(records)]

    highest = max((port for element in elements for port in element.ports), default = 0)
    count = ports if ports is not None else highest + 1

    try:
        return compose(elements, PortBasis.of(count))
    except DomainError as error:
        raise ConfigError(str(error), path) from None


def load_unitary(document: Any, path: str = "$") -> np.ndarray:
    """
    Parse a complex matrix given either as ``{"re": [[…]], "im": [[…]]}`` or as
    a plain nested list of real numbers.

    >>> load_unitary({"re": [[0, 1], [1, 0]], "im": [[0, 0], [0, 0]]}).real
    array([[0., 1.],
           [1., 0.]])
    """
    try:
        if isinstance(document, Mapping):
            unknown = set(document) - {"re", "im"}

            if unknown:
                raise ConfigError(f"unknown key(s) {', '.join(sorted(unknown))}", path)

            re = np.array(document["re"], dtype = float)
            im = np.array(document.get("im", np.zeros_like(re)), dtype = float)

            if re.shape != im.shape:
                raise ConfigError(f"real part has shape {re.shape} but imaginary part {im.shape}", path)

            matrix = re + 1j * im
        else:
            matrix = np.array(document, dtype = complex)

    except KeyError:
        raise ConfigError("matrix object needs an «re» key", path) from None
    except (TypeError, ValueError) as error:
        if isinstance(error, ConfigError):
            raise
        raise ConfigError(f"not a numeric matrix: {error}", path) from None

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ConfigError(f"expected a square matrix, not shape {matrix.shape}", path)

    return matrix


def amplitude_to_json(amplitude: BipartiteAmplitude) -> Dict[str, Any]:
    """
    >>> amplitude_to_json(BipartiteAmplitude([[0, 1], [0, 0]]))
    {'n': 2, 'normalized': False, 're': [[0.0, 1.0], [0.0, 0.0]], 'im': [[0.0, 0.0], [0.0, 0.0]]}
    """
    return {
        "n": amplitude.shape[0],
        "normalized": amplitude.normalized,
        "re": amplitude.matrix.real.tolist(),
        "im": amplitude.matrix.imag.tolist(),
    }


def schmidt_report_to_json(report: SchmidtReport) -> Dict[str, Any]:
    return {
        "singular_values": [float(s) for s in report.singular_values],
        "lambda": [float(l) for l in report.schmidt_coefficients],
        "entropy_ebits": float(report.entropy_ebits),
        "rank": int(report.numerical_rank),
    }


def protocol_to_json(spec: ProtocolSpec) -> Dict[str, Any]:
    """
    The config form of *spec*, omitting fields left unset.

    >>> protocol_to_json(ProtocolSpec("symmetric_n", n = 3))
    {'kind': 'symmetric_n', 'n': 3}
    """
    document: Dict[str, Any] = {"kind": spec.kind}

    for field in ("n", "seed", "sigma", "delta", "filter_amplitude"):
        value = getattr(spec, field)

        if value is not None:
            document[field] = value

    if spec.kind == "etpd":
        document["acceptance"] = spec.acceptance

    if spec.grid is not None:
        document["grid"] = {"points": spec.grid.points, "extent": spec.grid.extent}

    if spec.network is not None:
        document["network"] = netlist_to_records(spec.network.elements)

    return document


def result_to_json(result: ProtocolResult) -> Dict[str, Any]:
    """
    Full report of one protocol run, in a fixed field order.
    """
    return {
        "protocol": protocol_to_json(result.spec),
        "entropy_ebits": float(result.entropy_ebits),
        "coincidence_weight": float(result.coincidence_weight),
        "schmidt": schmidt_report_to_json(result.report),
        "oracle": schmidt_report_to_json(result.oracle) if result.oracle is not None else None,
        "rel_err": result.rel_err,
        "amplitude": amplitude_to_json(result.amplitude),
    }
