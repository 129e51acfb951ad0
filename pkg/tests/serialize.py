import json
import numpy as np
import pytest
from ebitsim.exceptions import ConfigError
from ebitsim.optics import Attenuator, BeamSplitter, PhaseShifter
from ebitsim.protocols import ProtocolSpec, run_protocol
from ebitsim.serialize import (
    as_json,
    element_from_record,
    load_unitary,
    netlist_to_records,
    network_from_records,
    result_to_json,
    schmidt_report_to_json,
)


NETLIST = [
    {"kind": "beam_splitter", "ports": [0, 1], "theta": 0.7853981633974483, "phi": 0.0},
    {"kind": "phase_shifter", "port": 0, "phi": 1.0},
    {"kind": "attenuator", "port": 0, "t": 0.7071067811865476},
]


def test_netlist_records():
    network = network_from_records(NETLIST)

    assert network.count == 2
    assert network.elements == (
        BeamSplitter(0, 1, 0.7853981633974483, 0.0),
        PhaseShifter(0, 1.0),
        Attenuator(0, 0.7071067811865476))

    assert netlist_to_records(network.elements) == NETLIST


def test_netlist_port_count():
    assert network_from_records([], ports = 3).count == 3
    assert network_from_records([{"kind": "phase_shifter", "port": 4, "phi": 0}]).count == 5

    with pytest.raises(ConfigError, match = "port out of range"):
        network_from_records([{"kind": "phase_shifter", "port": 4, "phi": 0}], ports = 2)


@pytest.mark.parametrize("record, path", [
    ({"kind": "mirror"},                                                   "$[0].kind"),
    ({"kind": "phase_shifter", "port": 0},                                 "$[0]"),
    ({"kind": "phase_shifter", "port": 0, "phi": 0, "extra": 1},           "$[0]"),
    ({"kind": "phase_shifter", "port": -1, "phi": 0},                      "$[0].port"),
    ({"kind": "phase_shifter", "port": 0, "phi": "1"},                     "$[0].phi"),
    ({"kind": "beam_splitter", "ports": [0], "theta": 0, "phi": 0},        "$[0].ports"),
    ({"kind": "beam_splitter", "ports": [0, True], "theta": 0, "phi": 0},  "$[0].ports[1]"),
    ({"kind": "attenuator", "port": 0, "t": 2},                            "$[0].t"),
    ([],                                                                   "$[0]"),
])
def test_bad_records(record, path):
    with pytest.raises(ConfigError) as error:
        network_from_records([record])

    assert error.value.path == path


def test_network_must_be_an_array():
    with pytest.raises(ConfigError):
        network_from_records({"kind": "phase_shifter"})


def test_element_from_record():
    assert element_from_record({"kind": "attenuator", "port": 1, "t": 1}) == Attenuator(1, 1.0)


def test_load_unitary_forms():
    hadamard = [[2 ** -0.5, 2 ** -0.5], [2 ** -0.5, -2 ** -0.5]]

    assert np.allclose(load_unitary(hadamard), hadamard)
    assert np.allclose(load_unitary({"re": [[0, 0], [0, 0]], "im": [[1, 0], [0, 1]]}), 1j * np.eye(2))
    assert np.allclose(load_unitary({"re": [[1, 0], [0, 1]]}), np.eye(2))


@pytest.mark.parametrize("document", [
    [[1, 0, 0], [0, 1, 0]],
    [1, 2],
    {"re": [[1]], "im": [[1, 0]]},
    {"im": [[1]]},
    {"re": [[1]], "imag": [[0]]},
    [["a"]],
])
def test_load_unitary_rejects(document):
    with pytest.raises(ConfigError):
        load_unitary(document)


def test_as_json_refuses_nan():
    with pytest.raises(ValueError):
        as_json({"entropy_ebits": float("nan")})


def test_as_json_encodes_numpy():
    document = json.loads(as_json({"values": np.arange(3), "weight": np.float64(0.5)}))

    assert document == {"values": [0, 1, 2], "weight": 0.5}


def test_report_encoding():
    report = run_protocol(ProtocolSpec("symmetric_n", n = 3)).report
    document = schmidt_report_to_json(report)

    assert list(document) == ["singular_values", "lambda", "entropy_ebits", "rank"]
    assert document["rank"] == 3
    assert document["lambda"] == pytest.approx([2/3, 1/6, 1/6], abs = 1e-12)


def test_result_encoding_is_deterministic():
    spec = ProtocolSpec("two_photon_two_detector", seed = 7)
    first = as_json(result_to_json(run_protocol(spec)))
    second = as_json(result_to_json(run_protocol(spec)))

    assert first == second

    document = json.loads(first)

    assert list(document) == ["protocol", "entropy_ebits", "coincidence_weight", "schmidt", "oracle", "rel_err", "amplitude"]
    assert document["protocol"]["seed"] == 7

    # The drawn network is reported and rebuilds the same transfer matrix.
    rebuilt = network_from_records(document["protocol"]["network"], ports = 2)
    assert np.allclose(rebuilt.transfer, run_protocol(spec).spec.network.transfer, atol = 1e-15)


def test_floats_written_with_seventeen_digits():
    assert as_json({"x": 0.1}, indent = None) == '{"x": 0.10000000000000001}'
    assert as_json({"x": 2.0, "y": np.float64(1 / 3)}, indent = None) == '{"x": 2.0, "y": 0.33333333333333331}'


@pytest.mark.parametrize("value", [1 / 3, 0.1, 2.0, 1e-300, -6.02214076e23, np.pi])
def test_floats_round_trip_exactly(value):
    assert json.loads(as_json([value]))[0] == value


def test_result_floats_use_seventeen_digits():
    text = as_json(result_to_json(run_protocol(ProtocolSpec("symmetric_n", n = 3))))
    entropy = json.loads(text)["entropy_ebits"]

    assert f'"entropy_ebits": {entropy:.17g},' in text
