"""
Schmidt decomposition and entanglement entropy of bipartite pure states.

A pure state Σ C[i, j] |i⟩|j⟩ has Schmidt coefficients λ_k = s_k² / Σ s², where
s_k are the singular values of C, and entanglement entropy −Σ λ_k log₂ λ_k
in ebits.
"""
import logging
import numpy as np
import scipy.linalg
import scipy.stats
from typing import NamedTuple, Union
from .exceptions import DomainError, NumericalFailure, ZeroSuccessAmplitude
from .postselect import BipartiteAmplitude


LOG = logging.getLogger(__name__)

#: Schmidt coefficients at or below this count as zero for the numerical rank.
RANK_CUTOFF = 1e-10

#: Slack allowed when comparing an entropy against a bound.
BOUND_TOLERANCE = 1e-9


class SchmidtReport(NamedTuple):
    singular_values: np.ndarray
    schmidt_coefficients: np.ndarray
    entropy_ebits: float
    numerical_rank: int


class BoundCheck(NamedTuple):
    within: bool
    entropy_ebits: float
    bound_ebits: float
    margin: float


class LocalFilter(NamedTuple):
    """
    A local filtering operation on atom 1 that equalizes a state's Schmidt
    coefficients.

    *operator* acts on atom 1's index (C ↦ operator · C) and has operator
    norm 1.  *filtered* is the renormalized result and *report* its Schmidt
    report.  *penalty* is λ_min / λ_max of the input, a diagnostic for how much
    success probability the filtering costs.
    """
    operator: np.ndarray
    filtered: BipartiteAmplitude
    report: SchmidtReport
    penalty: float


Amplitude = Union[BipartiteAmplitude, np.ndarray]


def as_matrix(amplitude: Amplitude) -> np.ndarray:
    if isinstance(amplitude, BipartiteAmplitude):
        return amplitude.matrix
    else:
        return np.asarray(amplitude, dtype = complex)


def schmidt(amplitude: Amplitude) -> SchmidtReport:
    """
    Schmidt spectrum and entropy of *amplitude*, which need not be normalized.

    >>> report = schmidt(np.array([[0, 1], [1, 0]]) / np.sqrt(2))
    >>> report.schmidt_coefficients
    array([0.5, 0.5])
    >>> round(report.entropy_ebits, 12), report.numerical_rank
    (1.0, 2)
    """
    matrix = as_matrix(amplitude)

    if matrix.ndim != 2 or matrix.size == 0:
        raise DomainError(f"Schmidt decomposition needs a non-empty matrix, not shape {matrix.shape}")

    singular_values = scipy.linalg.svdvals(matrix)
    total = np.sum(singular_values ** 2)

    if total == 0:
        raise ZeroSuccessAmplitude("Schmidt decomposition of the zero matrix")

    singular_values = singular_values / np.sqrt(total)
    coefficients = singular_values ** 2
    coefficients = coefficients / coefficients.sum()

    entropy = float(scipy.stats.entropy(coefficients, base = 2))
    entropy = min(max(entropy, 0.0), float(np.log2(min(matrix.shape))))

    return SchmidtReport(
        singular_values = singular_values,
        schmidt_coefficients = coefficients,
        entropy_ebits = entropy,
        numerical_rank = int(np.sum(coefficients > RANK_CUTOFF)))


def entropy_upper_bound_check(amplitude: Amplitude, bound_ebits: float) -> BoundCheck:
    """
    Whether the entanglement of *amplitude* stays within *bound_ebits*.

    >>> entropy_upper_bound_check(np.eye(4) / 2, 1.0).within
    False
    """
    entropy = schmidt(amplitude).entropy_ebits
    margin = bound_ebits - entropy

    return BoundCheck(
        within = bool(margin >= -BOUND_TOLERANCE),
        entropy_ebits = entropy,
        bound_ebits = bound_ebits,
        margin = margin)


def max_entangle_local_filter(amplitude: Amplitude) -> LocalFilter:
    """
    Equalize the Schmidt coefficients of a full-rank square *amplitude* by
    filtering atom 1 alone, giving a maximally entangled state of log₂N ebits.

    With C = U S V†, the filter U (s_min S⁻¹) U† maps C to s_min U V†, whose
    singular values are all equal.
    """
    matrix = as_matrix(amplitude)

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"local equalization needs a square amplitude, not shape {matrix.shape}")

    before = schmidt(matrix)
    n = matrix.shape[0]

    if before.numerical_rank < n:
        raise DomainError(f"cannot equalize a rank-deficient state (rank {before.numerical_rank} of {n})")

    u, s, _ = scipy.linalg.svd(matrix)
    operator = u @ np.diag(s.min() / s) @ u.conj().T

    filtered = BipartiteAmplitude(operator @ matrix).normalize()
    report = schmidt(filtered)

    if abs(report.entropy_ebits - np.log2(n)) > BOUND_TOLERANCE:
        raise NumericalFailure(f"local filtering reached {report.entropy_ebits:.12g} ebits, not log₂{n}")

    coefficients = before.schmidt_coefficients
    penalty = float(coefficients.min() / coefficients.max())

    LOG.debug(f"Equalized {n} Schmidt coefficients; λ_min/λ_max was {penalty:.6g}")

    return LocalFilter(operator, filtered, report, penalty)
