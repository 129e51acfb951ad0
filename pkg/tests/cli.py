import json
import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner
from ebitsim.cli import cli
from ebitsim.cli.io.pandas import CSV_COLUMNS
from ebitsim.serialize import network_from_records


def invoke(*args, files = {}, env = None):
    """
    Run the CLI with *args* in a scratch directory holding *files* (name →
    JSON document), returning the result and the text of every file left
    behind.
    """
    runner = CliRunner()

    with runner.isolated_filesystem():
        for name, document in files.items():
            with open(name, "w", encoding = "utf-8") as file:
                json.dump(document, file)

        result = runner.invoke(cli, list(args), env = env)

        outputs = {}

        for name in ("out.json", "out.csv"):
            try:
                with open(name, encoding = "utf-8") as file:
                    outputs[name] = file.read()
            except FileNotFoundError:
                pass

    return result, outputs


def experiment(protocol, output_path = "out.json", **extra):
    return {"config.json": {"protocol": protocol, "output_path": output_path, **extra}}


def test_run_symmetric_protocol():
    result, outputs = invoke("run", "config.json", files = experiment({"kind": "symmetric_n", "n": 3}, format = "json"))

    assert result.exit_code == 0, result.output
    assert result.output.startswith("symmetric_n, n=3, entropy_ebits=1.2516")

    report = json.loads(outputs["out.json"])

    assert abs(report["entropy_ebits"] - 1.2516) < 1e-3
    assert report["protocol"] == {"kind": "symmetric_n", "n": 3}
    assert report["schmidt"]["rank"] == 3


def test_run_output_is_byte_identical():
    files = experiment({"kind": "two_photon_two_detector", "seed": 12})

    _, first = invoke("run", "config.json", files = files)
    _, second = invoke("run", "config.json", files = files)

    assert first["out.json"] == second["out.json"]


def test_run_csv_report():
    result, outputs = invoke("run", "config.json", files = experiment({"kind": "saturating_n", "n": 4}, "out.csv", format = "csv"))

    assert result.exit_code == 0, result.output

    lines = outputs["out.csv"].splitlines()

    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("saturating_n,4,,,")


def test_run_to_stdout():
    result, outputs = invoke("run", "config.json", files = experiment({"kind": "symmetric_n", "n": 3}, "-"))

    assert result.exit_code == 0
    assert not outputs
    assert json.loads(result.output)["protocol"]["kind"] == "symmetric_n"


@pytest.mark.parametrize("protocol, extra", [
    ({"kind": "saturating_n", "n": 1}, {}),
    ({"kind": "saturating_n", "n": 3, "colour": "blue"}, {}),
    ({"kind": "saturating_n", "n": 3}, {"sweep": {"parameter": "n", "values": [2, 3]}}),
])
def test_run_config_errors(protocol, extra):
    result, outputs = invoke("run", "config.json", files = experiment(protocol, **extra))

    assert result.exit_code == 1
    assert not outputs


def test_run_invalid_json():
    runner = CliRunner()

    with runner.isolated_filesystem():
        with open("config.json", "w") as file:
            file.write("{not json")

        assert runner.invoke(cli, ["run", "config.json"]).exit_code == 1


def test_run_bad_environment():
    result, _ = invoke("run", "config.json", files = experiment({"kind": "symmetric_n", "n": 3}), env = {"EBITSIM_THREADS": "lots"})
    assert result.exit_code == 1


def test_run_under_resolved_grid():
    protocol = {"kind": "etpd", "sigma": 1, "delta": 0.1, "grid": {"points": 9, "extent": 8}}
    result, outputs = invoke("run", "config.json", files = experiment(protocol))

    assert result.exit_code == 2
    assert not outputs


def test_sweep_saturating():
    files = experiment({"kind": "saturating_n", "n": 2}, "out.csv", format = "csv", sweep = {"parameter": "n", "values": list(range(2, 9))})
    result, outputs = invoke("sweep", "config.json", files = files)

    assert result.exit_code == 0, result.output
    assert len(result.output.splitlines()) == 7

    with open_csv(outputs["out.csv"]) as report:
        assert list(report.columns) == CSV_COLUMNS
        assert list(report["n"]) == list(range(2, 9))
        assert np.allclose(report["entropy_ebits"], np.log2(report["n"]), rtol = 0, atol = 1e-9)
        assert report["rel_err"].isna().all()


def test_sweep_rows_keep_input_order_when_threaded():
    files = experiment({"kind": "saturating_n", "n": 2}, "out.csv", format = "csv", sweep = {"parameter": "n", "values": [8, 2, 5, 3]})

    _, serial = invoke("sweep", "config.json", files = files)
    _, threaded = invoke("sweep", "config.json", files = files, env = {"EBITSIM_THREADS": "3"})

    with open_csv(serial["out.csv"]) as first, open_csv(threaded["out.csv"]) as second:
        assert list(first["n"]) == list(second["n"]) == [8, 2, 5, 3]
        assert np.allclose(first["entropy_ebits"], second["entropy_ebits"], rtol = 0, atol = 1e-12)


def test_sweep_etpd_width_ratio():
    files = experiment({"kind": "etpd"}, "out.csv", format = "csv", sweep = {"parameter": "ratio", "values": [0.1, 1, 10]})
    result, outputs = invoke("sweep", "config.json", files = files)

    assert result.exit_code == 0, result.output

    with open_csv(outputs["out.csv"]) as report:
        assert report["entropy_ebits"].is_monotonic_increasing
        assert (report["rel_err"] < 0.01).all()
        assert report["n"].isna().all()
        assert np.allclose(report["sigma"] / report["delta"], [0.1, 1, 10])


def test_sweep_json_report():
    files = experiment({"kind": "single_detection"}, sweep = {"parameter": "seed", "values": [1, 2, 3]})
    result, outputs = invoke("sweep", "config.json", files = files)

    assert result.exit_code == 0, result.output

    report = json.loads(outputs["out.json"])

    assert report["sweep"] == {"parameter": "seed", "values": [1, 2, 3]}
    assert [row["protocol"]["seed"] for row in report["results"]] == [1, 2, 3]
    assert all(row["entropy_ebits"] <= 1 + 1e-9 for row in report["results"])


def test_sweep_needs_a_sweep():
    result, _ = invoke("sweep", "config.json", files = experiment({"kind": "symmetric_n", "n": 3}))
    assert result.exit_code == 1


def test_decompose():
    unitary = np.array([[1, 1j, 0], [1j, 1, 0], [0, 0, np.sqrt(2)]]) / np.sqrt(2)
    files = {"unitary.json": {"re": unitary.real.tolist(), "im": unitary.imag.tolist()}}

    result, _ = invoke("decompose", "unitary.json", files = files)

    assert result.exit_code == 0, result.output

    network = network_from_records(json.loads(result.output), ports = 3)

    assert np.max(np.abs(network.transfer - unitary)) < 1e-10

def test_decompose_rejects_non_unitary():
    result, _ = invoke("decompose", "unitary.json", files = {"unitary.json": [[1, 1], [0, 1]]})
    assert result.exit_code == 1


def test_selftest_single_suite():
    result, _ = invoke("selftest", "--only", "permanent")

    assert result.exit_code == 0, result.output
    assert result.output.startswith("ok   permanent")
    assert len(result.output.splitlines()) == 1


def test_selftest():
    result, _ = invoke("selftest")

    assert result.exit_code == 0, result.output
    assert all(line.startswith("ok") for line in result.output.splitlines())


class open_csv:
    """
    Context manager parsing CSV report text into a DataFrame.
    """
    def __init__(self, text):
        from io import StringIO
        self.frame = pd.read_csv(StringIO(text))

    def __enter__(self):
        return self.frame

    def __exit__(self, *exc):
        return False
