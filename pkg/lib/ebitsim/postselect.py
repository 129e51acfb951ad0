"""
Post-selected atomic amplitudes from photon coincidences.

Two atoms each emit one photon; N−2 ancilla photons join them and all N go
through a linear network onto N detectors.  Conditioning on every detector
clicking once leaves the atoms in a pure bipartite state whose amplitude
matrix C is built here.  Entry C[k, l] is the amplitude for the atom-1 photon
having been emitted towards port k and the atom-2 photon towards port l; the
atom's recoil records that direction.  Without a network, port k is simply
the detector the photon reached.

The sum over all detector assignments is a matrix permanent, evaluated with
Ryser's formula.  Brute-force permutation sums are kept alongside as oracles.
"""
import logging
import math
import numpy as np
from itertools import permutations
from typing import List, Optional, Sequence, Tuple
from .exceptions import DomainError, ZeroSuccessAmplitude
from .optics import LinearNetwork


LOG = logging.getLogger(__name__)

#: Largest matrix :func:`permanent` will take; Ryser's formula is O(2ⁿ·n).
PERMANENT_SIZE_GUARD = 20

#: Largest matrix :func:`permanent_bruteforce` will take (n! terms).
BRUTEFORCE_PERMANENT_GUARD = 9

#: Largest ensemble :func:`coincidence_project_bruteforce` will take.
BRUTEFORCE_PROJECTION_GUARD = 8

# Subsets evaluated per vectorized Ryser step.
RYSER_CHUNK = 1 << 14

# A projection whose Frobenius norm is below this fraction of the product of
# photon row norms is treated as exactly zero.
ZERO_AMPLITUDE_CUTOFF = 1e-12


class BipartiteAmplitude:
    """
    The atoms' joint amplitude matrix (or discretized momentum kernel) after
    post-selection.

    *weight* is the squared Frobenius norm of the matrix as it came out of the
    projection, before any normalization: the relative probability of the
    coincidence event.  It is carried through :meth:`normalize` unchanged.
    """
    matrix: np.ndarray
    normalized: bool
    weight: float

    def __init__(self, matrix: np.ndarray, normalized: bool = False, weight: Optional[float] = None) -> None:
        matrix = np.array(matrix, dtype = complex)

        if matrix.ndim != 2:
            raise DomainError(f"bipartite amplitude must be a matrix, not shape {matrix.shape}")

        if normalized:
            assert abs(np.linalg.norm(matrix) - 1) < 1e-12, "normalized amplitude does not have unit norm"

        matrix.setflags(write = False)

        self.matrix = matrix
        self.normalized = normalized
        self.weight = float(np.linalg.norm(matrix) ** 2) if weight is None else weight

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape  # type: ignore

    def normalize(self) -> "BipartiteAmplitude":
        """
        Return a unit-Frobenius-norm copy, keeping the original *weight*.

        >>> BipartiteAmplitude([[0, 3], [4, 0]]).normalize().matrix.real
        array([[0. , 0.6],
               [0.8, 0. ]])
        """
        if self.normalized:
            return self

        norm = np.linalg.norm(self.matrix)

        if norm == 0:
            raise ZeroSuccessAmplitude()

        return BipartiteAmplitude(self.matrix / norm, normalized = True, weight = self.weight)

    def __repr__(self) -> str:
        return f"<BipartiteAmplitude shape={self.shape} normalized={self.normalized} weight={self.weight:.6g}>"


class PhotonEnsemble:
    """
    Amplitudes of N photons over N optical ports, one row per photon.

    *atomic_rows* names the two rows whose photons came from atoms 1 and 2;
    every other row is an ancilla photon.  *epsilon* is the per-atom
    excitation probability, carried as metadata only since post-selection
    renormalizes it away.
    """
    amplitudes: np.ndarray
    atomic_rows: Tuple[int, int]
    epsilon: float

    def __init__(self,
                 amplitudes: np.ndarray,
                 atomic_rows: Tuple[int, int] = (0, 1),
                 epsilon: float = 0.01) -> None:
        amplitudes = np.array(amplitudes, dtype = complex)

        if amplitudes.ndim != 2 or amplitudes.shape[0] != amplitudes.shape[1]:
            raise DomainError(f"photon ensemble must have as many photons as ports, not shape {amplitudes.shape}")

        n = amplitudes.shape[0]
        r1, r2 = atomic_rows

        if r1 == r2 or not (0 <= r1 < n and 0 <= r2 < n):
            raise DomainError(f"atomic rows {atomic_rows} must be two distinct rows of {n}")

        if not 0 < epsilon < 1:
            raise DomainError(f"excitation probability must be in (0, 1), not {epsilon}")

        empty = [k for k, norm in enumerate(np.linalg.norm(amplitudes, axis = 1)) if norm == 0]

        if empty:
            raise DomainError(f"photon rows {empty} have zero amplitude")

        amplitudes.setflags(write = False)

        self.amplitudes = amplitudes
        self.atomic_rows = (int(r1), int(r2))
        self.epsilon = epsilon

    @property
    def size(self) -> int:
        """Number of photons (= ports = detectors)."""
        return self.amplitudes.shape[0]

    @property
    def ancilla_rows(self) -> List[int]:
        return [k for k in range(self.size) if k not in self.atomic_rows]

    def with_amplitudes(self, amplitudes: np.ndarray) -> "PhotonEnsemble":
        return PhotonEnsemble(amplitudes, self.atomic_rows, self.epsilon)

    def __repr__(self) -> str:
        return f"<PhotonEnsemble photons={self.size} atomic_rows={self.atomic_rows}>"


def permanent(matrix: np.ndarray) -> complex:
    """
    Permanent of a square *matrix* by Ryser's inclusion–exclusion formula,

        perm(M) = (−1)ⁿ Σ_{S ⊆ columns} (−1)^|S| ∏_i Σ_{j ∈ S} M[i, j].

    Subsets are evaluated in vectorized chunks and the terms summed with
    :func:`math.fsum` to keep cancellation error down.

    >>> permanent(np.eye(2)).real
    1.0
    >>> permanent(np.ones((3, 3))).real
    6.0
    >>> permanent(np.zeros((0, 0)))
    (1+0j)
    """
    matrix = np.asarray(matrix, dtype = complex)

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"permanent requires a square matrix, not shape {matrix.shape}")

    n = matrix.shape[0]

    if n > PERMANENT_SIZE_GUARD:
        raise DomainError(f"permanent size guard: {n}×{n} exceeds {PERMANENT_SIZE_GUARD}×{PERMANENT_SIZE_GUARD}")

    if n == 0:
        return complex(1)

    columns = np.arange(n)
    real: List[float] = []
    imag: List[float] = []

    # The empty subset contributes a zero product, so start at 1.
    for start in range(1, 1 << n, RYSER_CHUNK):
        subsets = np.arange(start, min(start + RYSER_CHUNK, 1 << n))
        members = (subsets[:, np.newaxis] >> columns) & 1

        products = np.prod(members @ matrix.T, axis = 1)
        signs = np.where((n - members.sum(axis = 1)) % 2 == 0, 1.0, -1.0)

        terms = signs * products
        real.extend(terms.real)
        imag.extend(terms.imag)

    return complex(math.fsum(real), math.fsum(imag))


def permanent_bruteforce(matrix: np.ndarray) -> complex:
    """
    Permanent by summing over every permutation.  Reference for tests.

    >>> permanent_bruteforce(np.ones((2, 2))).real
    2.0
    """
    matrix = np.asarray(matrix, dtype = complex)

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"permanent requires a square matrix, not shape {matrix.shape}")

    n = matrix.shape[0]

    if n > BRUTEFORCE_PERMANENT_GUARD:
        raise DomainError(f"brute-force permanent is limited to n ≤ {BRUTEFORCE_PERMANENT_GUARD}, not {n}")

    rows = np.arange(n)
    terms = [np.prod(matrix[rows, list(sigma)]) for sigma in permutations(range(n))]

    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def apply_network_to_ensemble(ensemble: PhotonEnsemble, network: LinearNetwork) -> PhotonEnsemble:
    """
    Send every photon of *ensemble* through *network*.

    Rows are amplitude row vectors over input ports, so each transforms as
    ``row @ transferᵀ`` and afterwards reads over output (detector) ports.
    """
    if network.count != ensemble.size:
        raise DomainError(f"dimension mismatch: {network.count}-port network, {ensemble.size}-port ensemble")

    return ensemble.with_amplitudes(ensemble.amplitudes @ network.transfer.T)


def ancilla_permanents(ancillas: np.ndarray) -> np.ndarray:
    """
    The N×N table P with P[i, j] = permanent of the (N−2)×(N−2) *ancillas*
    matrix after deleting detector columns i and j, and P[i, i] = 0: the
    amplitude for the ancillas to fill every detector except i and j.
    """
    n = ancillas.shape[1]
    table = np.zeros((n, n), dtype = complex)

    for i in range(n):
        for j in range(i + 1, n):
            kept = [c for c in range(n) if c not in (i, j)]
            table[i, j] = table[j, i] = permanent(ancillas[:, kept])

    return table


def coincidence_project(ensemble: PhotonEnsemble, network: Optional[LinearNetwork] = None) -> BipartiteAmplitude:
    """
    Amplitude matrix C for an N-fold coincidence on N detectors.

    Without a *network*, photons go straight to the detectors and

        C[i, j] = M[r₁, i] · M[r₂, j] · perm(M without rows r₁, r₂ and columns i, j)

    with C[i, i] = 0: no assignment puts both atomic photons on one detector.

    With a *network*, the ancillas are sent through it while the atomic labels
    stay on the emission ports:

        C = diag(M[r₁]) · Tᵀ · P · T · diag(M[r₂])

    where P is :func:`ancilla_permanents` of the transformed ancilla rows.  The
    result is unnormalized; its *weight* is the relative coincidence
    probability.

    >>> coincidence_project(PhotonEnsemble(np.eye(2))).matrix.real
    array([[0., 1.],
           [0., 0.]])
    """
    n = ensemble.size

    if n < 2:
        raise DomainError(f"coincidence projection needs at least 2 photons, not {n}")

    amplitudes = ensemble.amplitudes
    r1, r2 = ensemble.atomic_rows

    if network is None:
        transfer = np.eye(n, dtype = complex)
        ancillas = amplitudes[ensemble.ancilla_rows]
    else:
        transfer = network.transfer
        ancillas = apply_network_to_ensemble(ensemble, network).amplitudes[ensemble.ancilla_rows]

    table = ancilla_permanents(ancillas)
    matrix = np.diag(amplitudes[r1]) @ transfer.T @ table @ transfer @ np.diag(amplitudes[r2])

    assert network is not None or np.all(np.diag(matrix) == 0), "coincidence projection produced a doubly-occupied detector"

    return checked_amplitude(matrix, ensemble)


def coincidence_project_bruteforce(ensemble: PhotonEnsemble, network: Optional[LinearNetwork] = None) -> BipartiteAmplitude:
    """
    Same contract as :func:`coincidence_project`, summing explicitly over all
    N! assignments of photons to detectors.  Reference for tests.
    """
    n = ensemble.size

    if n > BRUTEFORCE_PROJECTION_GUARD:
        raise DomainError(f"brute-force projection is limited to n ≤ {BRUTEFORCE_PROJECTION_GUARD}, not {n}")

    if n < 2:
        raise DomainError(f"coincidence projection needs at least 2 photons, not {n}")

    amplitudes = ensemble.amplitudes
    r1, r2 = ensemble.atomic_rows

    if network is None:
        transfer = np.eye(n, dtype = complex)
        moved = amplitudes
    else:
        transfer = network.transfer
        moved = apply_network_to_ensemble(ensemble, network).amplitudes

    matrix = np.zeros((n, n), dtype = complex)

    for sigma in permutations(range(n)):
        weight = complex(1)

        for photon in ensemble.ancilla_rows:
            weight *= moved[photon, sigma[photon]]

        if weight == 0:
            continue

        first = amplitudes[r1] * transfer[sigma[r1], :]
        second = amplitudes[r2] * transfer[sigma[r2], :]
        matrix += weight * np.outer(first, second)

    return checked_amplitude(matrix, ensemble)


def checked_amplitude(matrix: np.ndarray, ensemble: PhotonEnsemble) -> BipartiteAmplitude:
    """
    Wrap *matrix*, raising :class:`ZeroSuccessAmplitude` if it is zero to
    working precision.
    """
    scale = float(np.prod(np.linalg.norm(ensemble.amplitudes, axis = 1)))

    if np.linalg.norm(matrix) <= ZERO_AMPLITUDE_CUTOFF * scale:
        raise ZeroSuccessAmplitude()

    amplitude = BipartiteAmplitude(matrix)

    LOG.debug(f"Projected {ensemble.size}-photon coincidence with weight {amplitude.weight:.6g}")

    return amplitude


def coincidence_weight(amplitude: BipartiteAmplitude) -> float:
    """
    Relative probability of the post-selected event: the squared Frobenius
    norm of the projection before normalization.

    >>> coincidence_weight(BipartiteAmplitude([[0, 3], [4, 0]]).normalize())
    25.0
    """
    return amplitude.weight


def single_detection_state(psi1: Sequence[complex],
                           psi2: Sequence[complex],
                           w1: complex,
                           w2: complex) -> BipartiteAmplitude:
    """
    The atoms' state after a single photon is detected without revealing which
    atom emitted it: w₁|ψ₁⟩|0⟩ + w₂|0⟩|ψ₂⟩, normalized.

    Index 0 of each motional vector is the unrecoiled ground state |0⟩.  The
    motional states are normalized before weighting.

    >>> single_detection_state([1, 0], [1, 0], 1, 1).matrix.real
    array([[1., 0.],
           [0., 0.]])
    """
    psi1 = np.asarray(psi1, dtype = complex)
    psi2 = np.asarray(psi2, dtype = complex)

    if psi1.ndim != 1 or psi1.shape != psi2.shape:
        raise DomainError(f"motional states must be vectors of equal length, not {psi1.shape} and {psi2.shape}")

    if psi1.shape[0] < 2:
        raise DomainError("motional states need at least the ground state and one recoil state")

    for name, psi in (("ψ₁", psi1), ("ψ₂", psi2)):
        if np.linalg.norm(psi) == 0:
            raise ZeroSuccessAmplitude(f"zero total norm: motional state {name} is the zero vector")

    ground = np.zeros_like(psi1)
    ground[0] = 1

    matrix = (w1 * np.outer(psi1 / np.linalg.norm(psi1), ground)
            + w2 * np.outer(ground, psi2 / np.linalg.norm(psi2)))

    if np.linalg.norm(matrix) <= ZERO_AMPLITUDE_CUTOFF * (abs(w1) + abs(w2)):
        raise ZeroSuccessAmplitude("zero total norm: single detection amplitudes cancel")

    return BipartiteAmplitude(matrix).normalize()
