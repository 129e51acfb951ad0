import numpy as np
import pytest
from ebitsim.etpd import MomentumGrid
from ebitsim.exceptions import DomainError, GridUnderResolved
from ebitsim.optics import BeamSplitter, PortBasis, compose
from ebitsim.protocols import (
    ProtocolSpec,
    build_saturating_protocol,
    build_symmetric_ensemble,
    random_network,
    run_protocol,
    saturating_filter_amplitude,
    validate_spec,
)


def test_three_photon_symmetric_protocol():
    result = run_protocol(ProtocolSpec("symmetric_n", n = 3))

    assert abs(result.entropy_ebits - 1.2516) < 1e-3
    assert np.allclose(result.report.schmidt_coefficients, [2/3, 1/6, 1/6], atol = 1e-12)
    assert result.oracle is None
    assert result.rel_err is None


@pytest.mark.parametrize("n", range(2, 13))
def test_saturating_protocol_reaches_log2_n(n):
    result = run_protocol(ProtocolSpec("saturating_n", n = n))

    assert abs(result.entropy_ebits - np.log2(n)) < 1e-9
    assert np.ptp(result.report.schmidt_coefficients) < 1e-10
    assert result.report.numerical_rank == n


def test_quoted_saturation_values():
    assert round(run_protocol(ProtocolSpec("saturating_n", n = 3)).entropy_ebits, 2) == 1.58
    assert round(run_protocol(ProtocolSpec("saturating_n", n = 4)).entropy_ebits, 9) == 2.0


@pytest.mark.parametrize("n", range(3, 9))
def test_per_component_filter_does_not_equalize(n):
    # Attenuating by 1/(N−1) per photon over-suppresses the collective mode.
    result = run_protocol(ProtocolSpec("saturating_n", n = n, filter_amplitude = 1 / (n - 1)))

    assert result.entropy_ebits < np.log2(n) - 0.05


def test_known_per_component_filter_entropies():
    entropy = lambda n: run_protocol(ProtocolSpec("saturating_n", n = n, filter_amplitude = 1 / (n - 1))).entropy_ebits

    assert entropy(3) == pytest.approx(1.392, abs = 1e-3)
    assert entropy(4) == pytest.approx(1.7506, abs = 1e-3)


def test_saturating_network_shape():
    ensemble, network = build_saturating_protocol(4)

    assert ensemble.size == network.count == 4

    # Collective mode attenuated, everything orthogonal to it untouched.
    t = saturating_filter_amplitude(4)
    uniform = np.full(4, 0.5)
    expected = np.eye(4) - (1 - t) * np.outer(uniform, uniform)

    assert np.allclose(network.transfer, expected, atol = 1e-12)
    assert np.allclose(compose(network.elements, PortBasis.of(4)).transfer, network.transfer, atol = 1e-15)


def test_trivial_filter_for_two_photons():
    _, network = build_saturating_protocol(2)

    assert saturating_filter_amplitude(2) == 1.0
    assert np.allclose(network.transfer, np.eye(2), atol = 1e-12)


@pytest.mark.parametrize("n", range(3, 9))
def test_filtering_costs_coincidence_weight(n):
    symmetric = run_protocol(ProtocolSpec("symmetric_n", n = n))
    saturating = run_protocol(ProtocolSpec("saturating_n", n = n))

    assert saturating.coincidence_weight < symmetric.coincidence_weight


def test_entropy_never_exceeds_log2_n():
    for n in range(2, 9):
        for kind in ("symmetric_n", "saturating_n"):
            assert run_protocol(ProtocolSpec(kind, n = n)).entropy_ebits <= np.log2(n) + 1e-9


def test_two_photons_never_exceed_one_ebit():
    entropies = []

    for seed in range(100):
        result = run_protocol(ProtocolSpec("two_photon_two_detector", seed = seed))

        assert result.report.numerical_rank <= 2
        entropies.append(result.entropy_ebits)

    assert max(entropies) <= 1 + 1e-9


def test_two_photon_explicit_network_is_kept():
    network = compose([BeamSplitter(0, 1, np.pi / 4)], PortBasis.of(2))
    result = run_protocol(ProtocolSpec("two_photon_two_detector", network = network))

    assert result.spec.network is network


def test_two_photon_seeded_network_is_recorded():
    result = run_protocol(ProtocolSpec("two_photon_two_detector", seed = 5))

    assert result.spec.network is not None
    assert np.allclose(result.spec.network.transfer, random_network(2, 5).transfer)


def test_single_detection_protocol():
    ideal = run_protocol(ProtocolSpec("single_detection"))
    assert abs(ideal.entropy_ebits - 1) < 1e-9

    for seed in range(200):
        assert run_protocol(ProtocolSpec("single_detection", seed = seed)).entropy_ebits <= 1 + 1e-9


def test_more_detectors_add_nothing():
    for dimension in (2, 3, 6, 10):
        assert run_protocol(ProtocolSpec("single_detection", n = dimension)).entropy_ebits == pytest.approx(1, abs = 1e-9)


def test_etpd_protocol_matches_oracle():
    result = run_protocol(ProtocolSpec("etpd", sigma = 1.0, delta = 1.0))

    assert result.oracle is not None
    assert result.rel_err < 0.01
    assert result.spec.grid == MomentumGrid(257, 8.0)


def test_etpd_variants():
    ideal = run_protocol(ProtocolSpec("etpd", sigma = 1.0, acceptance = "delta_sum"))
    separable = run_protocol(ProtocolSpec("etpd", sigma = 1.0, delta = 1.0, acceptance = "separable"))

    assert ideal.oracle is None
    assert ideal.entropy_ebits > 3
    assert separable.entropy_ebits <= 1 + 1e-9


def test_etpd_under_resolved_grid():
    with pytest.raises(GridUnderResolved):
        run_protocol(ProtocolSpec("etpd", sigma = 1.0, delta = 0.1, grid = MomentumGrid(9, 8.0)))


def test_runs_are_deterministic():
    for spec in (ProtocolSpec("two_photon_two_detector", seed = 3), ProtocolSpec("single_detection", seed = 3)):
        first, second = run_protocol(spec), run_protocol(spec)
        assert np.array_equal(first.amplitude.matrix, second.amplitude.matrix)


@pytest.mark.parametrize("spec, field", [
    (ProtocolSpec("saturating_n", n = 1),                            "n"),
    (ProtocolSpec("symmetric_n", n = 13),                            "n"),
    (ProtocolSpec("symmetric_n"),                                    "n"),
    (ProtocolSpec("two_photon_two_detector", n = 3),                 "n"),
    (ProtocolSpec("saturating_n", n = 3, filter_amplitude = 0),      "filter_amplitude"),
    (ProtocolSpec("etpd", delta = 1.0),                              "sigma"),
    (ProtocolSpec("etpd", sigma = 1.0),                              "delta"),
    (ProtocolSpec("etpd", sigma = -1.0, delta = 1.0),                "sigma"),
    (ProtocolSpec("etpd", sigma = 1.0, delta = 1.0, acceptance = "x"), "acceptance"),
    (ProtocolSpec("single_detection", seed = -1),                    "seed"),
    (ProtocolSpec("bogus"),                                          "kind"),
])
def test_invalid_specs(spec, field):
    with pytest.raises(DomainError) as error:
        validate_spec(spec)

    assert error.value.field == field


def test_out_of_range_message():
    with pytest.raises(DomainError, match = r"n out of range \[2,12\]"):
        build_symmetric_ensemble(1)
