"""
Optical mode bookkeeping and passive linear-optical networks.

A network acts on a fixed set of optical ports.  Its transfer matrix *T* maps
input port amplitudes to output port amplitudes (column vector convention,
``out = T @ in``); elements listed first act first, so a list ``[E₁, E₂, E₃]``
composes to ``T = E₃ E₂ E₁``.

Beam splitters use the block

    [[cos θ,           e^{iφ} sin θ],
     [-e^{-iφ} sin θ,  cos θ       ]]

on their two ports.  Attenuators (filters) are subunitary diagonal factors
rather than being dilated into extra loss ports; under coincidence
post-selection the two descriptions give the same amplitudes.
"""
import logging
import numpy as np
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union
from .exceptions import DomainError


LOG = logging.getLogger(__name__)

#: Largest singular value slack allowed for a passive (possibly lossy) network.
PHYSICALITY_TOLERANCE = 1e-9

#: Max-norm deviation of T†T from 𝟙 accepted by :func:`reck_decompose`.
UNITARITY_TOLERANCE = 1e-8


class PortBasis(NamedTuple):
    """
    The optical ports (modes) a network acts on.  Detector ports are just
    indices into this basis.
    """
    count: int
    labels: Optional[Tuple[str, ...]] = None

    @classmethod
    def of(cls, count: int, labels: Optional[Iterable[str]] = None) -> "PortBasis":
        """
        Validating constructor.

        >>> PortBasis.of(3)
        PortBasis(count=3, labels=None)
        >>> PortBasis.of(2, ["x1", "x1"])
        Traceback (most recent call last):
            ...
        ebitsim.exceptions.DomainError: port labels must be unique: ['x1', 'x1']
        """
        if count < 1:
            raise DomainError(f"port count must be ≥ 1, not {count}")

        if labels is not None:
            labels = tuple(labels)

            if len(labels) != count:
                raise DomainError(f"expected {count} port labels, got {len(labels)}")

            if len(set(labels)) != count:
                raise DomainError(f"port labels must be unique: {list(labels)}")

        return cls(count, labels)


class BeamSplitter(NamedTuple):
    port_a: int
    port_b: int
    theta: float
    phi: float = 0.0

    @property
    def kind(self) -> str:
        return "beam_splitter"

    @property
    def ports(self) -> Tuple[int, ...]:
        return (self.port_a, self.port_b)


class PhaseShifter(NamedTuple):
    port: int
    phi: float

    @property
    def kind(self) -> str:
        return "phase_shifter"

    @property
    def ports(self) -> Tuple[int, ...]:
        return (self.port,)


class Attenuator(NamedTuple):
    """
    A filter scaling one port's amplitude by *t* ∈ [0, 1].
    """
    port: int
    t: float

    @property
    def kind(self) -> str:
        return "attenuator"

    @property
    def ports(self) -> Tuple[int, ...]:
        return (self.port,)


NetworkElement = Union[BeamSplitter, PhaseShifter, Attenuator]


def element_matrix(element: NetworkElement, basis: PortBasis) -> np.ndarray:
    """
    The *basis*-sized transfer matrix of a single *element*: identity except
    on the 1×1 or 2×2 block of the ports it touches.

    >>> element_matrix(PhaseShifter(0, 0.0), PortBasis.of(2)).real
    array([[1., 0.],
           [0., 1.]])
    >>> element_matrix(Attenuator(0, 0.5), PortBasis.of(2)).real
    array([[0.5, 0. ],
           [0. , 1. ]])
    >>> element_matrix(PhaseShifter(2, 0.0), PortBasis.of(2))
    Traceback (most recent call last):
        ...
    ebitsim.exceptions.DomainError: port out of range: 2 not in [0, 2)
    """
    for port in element.ports:
        if not 0 <= port < basis.count:
            raise DomainError(f"port out of range: {port} not in [0, {basis.count})")

    matrix = np.eye(basis.count, dtype = complex)

    if isinstance(element, BeamSplitter):
        a, b = element.ports

        if a == b:
            raise DomainError(f"beam splitter needs two distinct ports, got {a} twice")

        c, s = np.cos(element.theta), np.sin(element.theta)
        phase = np.exp(1j * element.phi)

        matrix[a, a] = c
        matrix[a, b] = phase * s
        matrix[b, a] = -np.conj(phase) * s
        matrix[b, b] = c

    elif isinstance(element, PhaseShifter):
        matrix[element.port, element.port] = np.exp(1j * element.phi)

    elif isinstance(element, Attenuator):
        if not 0 <= element.t <= 1:
            raise DomainError(f"attenuator amplitude factor must be in [0, 1], not {element.t}")

        matrix[element.port, element.port] = element.t

    else:
        raise DomainError(f"unknown network element {element!r}")

    return matrix


class LinearNetwork:
    """
    A passive linear-optical network: a (sub)unitary port-to-port *transfer*
    matrix plus the ordered *elements* it was built from (empty when the
    matrix was given directly).

    Construction rejects matrices with a singular value above 1, which would
    amplify light.
    """
    transfer: np.ndarray
    elements: Tuple[NetworkElement, ...]

    def __init__(self, transfer: np.ndarray, elements: Sequence[NetworkElement] = ()) -> None:
        transfer = np.array(transfer, dtype = complex)

        if transfer.ndim != 2 or transfer.shape[0] != transfer.shape[1]:
            raise DomainError(f"network transfer matrix must be square, not shape {transfer.shape}")

        largest = np.linalg.norm(transfer, 2) if transfer.size else 0.0

        if largest > 1 + PHYSICALITY_TOLERANCE:
            raise DomainError(f"network is not passive: largest singular value {largest:.12g} > 1")

        transfer.setflags(write = False)

        self.transfer = transfer
        self.elements = tuple(elements)

    @property
    def count(self) -> int:
        """Number of ports."""
        return self.transfer.shape[0]

    @property
    def basis(self) -> PortBasis:
        return PortBasis.of(self.count)

    def is_unitary(self, tolerance: float = 1e-10) -> bool:
        """
        True if T†T = 𝟙 within *tolerance* (max-norm).
        """
        return unitarity_deviation(self.transfer) <= tolerance

    def inverse(self) -> "LinearNetwork":
        """
        The inverse of a unitary network, with its element list reversed and
        each element inverted.
        """
        if not self.is_unitary():
            raise DomainError("only unitary networks can be inverted")

        return LinearNetwork(
            self.transfer.conj().T,
            [invert_element(element) for element in reversed(self.elements)])

    def then(self, other: "LinearNetwork") -> "LinearNetwork":
        """
        The network formed by this one followed by *other*.
        """
        if other.count != self.count:
            raise DomainError(f"cannot chain a {self.count}-port network with a {other.count}-port one")

        return LinearNetwork(other.transfer @ self.transfer, [*self.elements, *other.elements])

    def __repr__(self) -> str:
        return f"<LinearNetwork ports={self.count} elements={len(self.elements)}>"


def identity_network(count: int) -> LinearNetwork:
    return LinearNetwork(np.eye(count, dtype = complex))


def invert_element(element: NetworkElement) -> NetworkElement:
    """
    The inverse of a unitary *element*.

    A beam splitter's inverse has the opposite mixing angle and the same phase.
    """
    if isinstance(element, BeamSplitter):
        return element._replace(theta = -element.theta)
    elif isinstance(element, PhaseShifter):
        return element._replace(phi = -element.phi)
    elif isinstance(element, Attenuator) and element.t == 1:
        return element
    else:
        raise DomainError(f"{element!r} is not invertible")


def compose(elements: Iterable[NetworkElement], basis: PortBasis) -> LinearNetwork:
    """
    Multiply out *elements* on *basis*, first element acting first.

    >>> compose([], PortBasis.of(3)).transfer.real
    array([[1., 0., 0.],
           [0., 1., 0.],
           [0., 0., 1.]])
    """
    elements = list(elements)
    transfer = np.eye(basis.count, dtype = complex)

    for element in elements:
        transfer = element_matrix(element, basis) @ transfer

    return LinearNetwork(transfer, elements)


def unitarity_deviation(matrix: np.ndarray) -> float:
    """
    Max-norm of M†M − 𝟙.
    """
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[1]))))


def reck_decompose(unitary: np.ndarray) -> List[NetworkElement]:
    """
    Factor *unitary* into a triangular mesh of beam splitters followed by a
    layer of output phase shifters.

    Subdiagonal entries are nulled column by column, bottom row first, with
    beam splitters on adjacent ports.  What is left is a diagonal of phases.
    Returns N phase shifters (acting first) then N(N−1)/2 beam splitters;
    :func:`compose` of the result reproduces *unitary*.

    >>> elements = reck_decompose(np.array([[1, 1], [-1, 1]]) / np.sqrt(2))
    >>> [e for e in elements if e.kind == "beam_splitter"]
    [BeamSplitter(port_a=0, port_b=1, theta=0.7853981633974483, phi=0.0)]
    """
    unitary = np.array(unitary, dtype = complex)

    if unitary.ndim != 2 or unitary.shape[0] != unitary.shape[1]:
        raise DomainError(f"reck_decompose requires a square matrix, not shape {unitary.shape}")

    deviation = unitarity_deviation(unitary)

    if deviation > UNITARITY_TOLERANCE:
        raise DomainError(f"reck_decompose requires unitary (max-norm deviation of U†U from 𝟙 is {deviation:.3g})")

    n = unitary.shape[0]
    basis = PortBasis.of(n)
    remaining = unitary.copy()
    nulling: List[BeamSplitter] = []

    for column in range(n - 1):
        for row in range(n - 1, column, -1):
            upper, lower = remaining[row - 1, column], remaining[row, column]

            theta = np.arctan2(abs(lower), abs(upper))
            phi = np.angle(upper) - np.angle(lower) if abs(lower) > 0 else 0.0

            splitter = BeamSplitter(row - 1, row, float(theta), float(phi))
            remaining = element_matrix(splitter, basis) @ remaining
            nulling.append(splitter)

    LOG.debug(f"Nulled {len(nulling)} subdiagonal entries of a {n}×{n} unitary")

    # remaining = T_K ⋯ T_1 U is now diagonal, so U = T_1† ⋯ T_K† D.
    phases = [PhaseShifter(port, float(np.angle(remaining[port, port]))) for port in range(n)]

    mesh: List[NetworkElement] = [*phases]
    mesh += [canonical_splitter(invert_element(splitter)) for splitter in reversed(nulling)]  # type: ignore

    return mesh


def canonical_splitter(splitter: BeamSplitter) -> BeamSplitter:
    """
    Rewrite *splitter* with θ ≥ 0 and φ in (−π, π], without changing its
    matrix.  BS(−θ, φ) and BS(θ, φ + π) are the same block.
    """
    theta, phi = splitter.theta, splitter.phi

    if theta < 0:
        theta, phi = -theta, phi + np.pi

    phi = float(np.angle(np.exp(1j * phi)))

    if np.isclose(phi, -np.pi, rtol = 0, atol = 1e-15):
        phi = float(np.pi)

    if abs(phi) < 1e-15:
        phi = 0.0

    return splitter._replace(theta = float(theta), phi = phi)


def symmetric_collector_unitary(n: int) -> np.ndarray:
    """
    A real orthogonal (hence unitary) *n*×*n* matrix whose first row is the
    uniform vector (1, …, 1)/√n, so it routes the collective detector mode
    onto port 0.

    Uses the Householder reflection swapping port 0 with the uniform vector,
    which is symmetric and its own inverse.

    >>> u = symmetric_collector_unitary(2)
    >>> np.allclose(u, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    True
    """
    if n < 2:
        raise DomainError(f"symmetric_collector_unitary needs n ≥ 2, not {n}")

    uniform = np.full(n, 1 / np.sqrt(n))
    v = uniform.copy()
    v[0] -= 1

    householder = np.eye(n) - 2 * np.outer(v, v) / (v @ v)

    return householder.astype(complex)
