import numpy as np
import pytest
import scipy.stats
from ebitsim.entanglement import (
    entropy_upper_bound_check,
    max_entangle_local_filter,
    schmidt,
)
from ebitsim.exceptions import DomainError, ZeroSuccessAmplitude
from ebitsim.postselect import BipartiteAmplitude, PhotonEnsemble, coincidence_project


def symmetric_amplitude(n):
    return coincidence_project(PhotonEnsemble(np.full((n, n), 1 / np.sqrt(n)))).normalize()


def test_product_state():
    report = schmidt(np.outer([1, 2, 3], [1j, 0, 1]))

    assert report.entropy_ebits == pytest.approx(0, abs = 1e-12)
    assert report.numerical_rank == 1


def test_maximally_entangled_state():
    for n in (2, 3, 5, 8):
        report = schmidt(np.eye(n) / np.sqrt(n))

        assert abs(report.entropy_ebits - np.log2(n)) < 1e-12
        assert report.numerical_rank == n


def test_normalization_is_irrelevant():
    matrix = np.array([[1, 2], [3, 4j]])

    assert schmidt(matrix).entropy_ebits == pytest.approx(schmidt(10 * matrix).entropy_ebits, abs = 1e-12)


def test_coefficients_are_sorted_and_sum_to_one():
    random = np.random.default_rng(1)
    report = schmidt(random.normal(size = (4, 6)))

    assert report.schmidt_coefficients.sum() == pytest.approx(1, abs = 1e-12)
    assert np.all(np.diff(report.schmidt_coefficients) <= 0)


def test_three_photon_symmetric_state():
    report = schmidt(symmetric_amplitude(3))

    assert np.allclose(report.schmidt_coefficients, [2/3, 1/6, 1/6], rtol = 0, atol = 1e-12)
    assert abs(report.entropy_ebits - 1.2516) < 1e-3
    assert abs(report.entropy_ebits - 1.2516291673878228) < 1e-9


def test_zero_matrix():
    with pytest.raises(ZeroSuccessAmplitude):
        schmidt(np.zeros((3, 3)))


def test_empty_matrix():
    with pytest.raises(DomainError):
        schmidt(np.zeros((0, 0)))


def test_upper_bound_check():
    check = entropy_upper_bound_check(symmetric_amplitude(3), np.log2(3))

    assert check.within
    assert check.margin == pytest.approx(np.log2(3) - 1.2516291673878228, abs = 1e-9)

    assert not entropy_upper_bound_check(np.eye(4), 1.0).within


def test_local_filter_equalizes():
    amplitude = symmetric_amplitude(3)
    result = max_entangle_local_filter(amplitude)

    assert abs(result.report.entropy_ebits - np.log2(3)) < 1e-9
    assert np.ptp(result.report.schmidt_coefficients) < 1e-10
    assert result.penalty == pytest.approx(0.25, abs = 1e-12)

    # A filter never amplifies.
    assert np.linalg.norm(result.operator, 2) == pytest.approx(1, abs = 1e-12)

    # Acting on atom 1 alone reproduces the filtered state.
    filtered = BipartiteAmplitude(result.operator @ amplitude.matrix).normalize()
    assert np.allclose(filtered.matrix, result.filtered.matrix, atol = 1e-12)


def test_local_filter_on_random_states():
    random = np.random.default_rng(4)

    for n in range(2, 7):
        matrix = random.normal(size = (n, n)) + 1j * random.normal(size = (n, n))
        assert abs(max_entangle_local_filter(matrix).report.entropy_ebits - np.log2(n)) < 1e-9


def test_local_filter_needs_full_rank():
    with pytest.raises(DomainError, match = "rank-deficient"):
        max_entangle_local_filter(np.outer([1, 0, 1], [0, 1, 1]))


def test_local_filter_needs_square():
    with pytest.raises(DomainError):
        max_entangle_local_filter(np.ones((2, 3)))


@pytest.mark.parametrize("n", range(2, 7))
def test_entropy_is_invariant_under_local_unitaries(n):
    random = np.random.default_rng(300 + n)
    amplitude = random.normal(size = (n, n)) + 1j * random.normal(size = (n, n))

    u = scipy.stats.unitary_group.rvs(n, random_state = 310 + n)
    v = scipy.stats.unitary_group.rvs(n, random_state = 320 + n)

    before = schmidt(amplitude)
    after = schmidt(u @ amplitude @ v)

    assert after.entropy_ebits == pytest.approx(before.entropy_ebits, abs = 1e-10)
    assert np.allclose(after.schmidt_coefficients, before.schmidt_coefficients, rtol = 0, atol = 1e-10)
