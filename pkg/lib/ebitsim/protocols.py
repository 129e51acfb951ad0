"""
Ready-made entangling experiments.

Each protocol builds the photons and optics of one experiment, post-selects,
and reports the atoms' entanglement:

* ``single_detection``: one photon detected without which-atom information
  (at most 1 ebit).
* ``two_photon_two_detector``: one photon from each atom through an arbitrary
  network onto two detectors (at most 1 ebit).
* ``symmetric_n``: N−2 ancilla photons join the two atomic photons, every
  photon reaching each of N symmetric detectors with equal amplitude and
  phase (1.25 ebits for N = 3).
* ``saturating_n``: the symmetric setup with a filter on the collective
  detector mode, reaching the log₂N ebit maximum.
* ``etpd``: the continuous-momentum entangling two-photon detector.
"""
import logging
import numpy as np
import scipy.stats
from typing import NamedTuple, Optional, Tuple
from .entanglement import SchmidtReport, entropy_upper_bound_check, schmidt
from .etpd import (
    AcceptanceFunction,
    DeltaSumAcceptance,
    MomentumGrid,
    SeparableAcceptance,
    SumGaussianAcceptance,
    build_etpd_kernel,
    default_grid,
    gaussian_schmidt_oracle,
    gaussian_source,
    oracle_relative_error,
)
from .exceptions import DomainError
from .optics import (
    Attenuator,
    LinearNetwork,
    PortBasis,
    compose,
    reck_decompose,
    symmetric_collector_unitary,
)
from .postselect import BipartiteAmplitude, PhotonEnsemble, coincidence_project, single_detection_state
from .utils import prose_list


LOG = logging.getLogger(__name__)

PROTOCOL_KINDS = (
    "single_detection",
    "two_photon_two_detector",
    "symmetric_n",
    "saturating_n",
    "etpd",
)

ACCEPTANCE_KINDS = ("sum_gaussian", "delta_sum", "separable")

#: Bounds on N for the permanent-based protocols (Ryser is 2ᴺ).
MIN_PHOTONS = 2
MAX_PHOTONS = 12

# Motional dimension of the single-detection protocol when none is given.
SINGLE_DETECTION_DIMENSION = 3


class ProtocolSpec(NamedTuple):
    """
    Which experiment to run and its parameters.  Fields not used by *kind* are
    left as ``None``.

    *filter_amplitude* overrides the per-photon filter factor of
    ``saturating_n``, which defaults to 1/√(N−1).
    """
    kind: str
    n: Optional[int] = None
    network: Optional[LinearNetwork] = None
    sigma: Optional[float] = None
    delta: Optional[float] = None
    grid: Optional[MomentumGrid] = None
    acceptance: str = "sum_gaussian"
    filter_amplitude: Optional[float] = None
    seed: Optional[int] = None


class ProtocolResult(NamedTuple):
    spec: ProtocolSpec
    amplitude: BipartiteAmplitude
    report: SchmidtReport
    coincidence_weight: float
    oracle: Optional[SchmidtReport] = None

    @property
    def entropy_ebits(self) -> float:
        return self.report.entropy_ebits

    @property
    def rel_err(self) -> Optional[float]:
        """
        Relative disagreement with the analytic oracle, when there is one.
        """
        if self.oracle is None:
            return None

        expected = self.oracle.entropy_ebits

        return abs(self.entropy_ebits - expected) / expected if expected > 0 else abs(self.entropy_ebits)


def validate_spec(spec: ProtocolSpec) -> ProtocolSpec:
    """
    Check *spec* has what its kind needs, raising :class:`DomainError`
    (naming the offending field) otherwise.

    >>> validate_spec(ProtocolSpec("saturating_n", n = 1))
    Traceback (most recent call last):
        ...
    ebitsim.exceptions.DomainError: n out of range [2,12]: 1
    """
    if spec.kind not in PROTOCOL_KINDS:
        raise DomainError(f"unknown protocol kind «{spec.kind}»; expected {prose_list(PROTOCOL_KINDS)}", "kind")

    if spec.kind in {"symmetric_n", "saturating_n"}:
        if spec.n is None:
            raise DomainError(f"{spec.kind} needs n", "n")

    if spec.n is not None and spec.kind != "single_detection":
        if not MIN_PHOTONS <= spec.n <= MAX_PHOTONS:
            raise DomainError(f"n out of range [{MIN_PHOTONS},{MAX_PHOTONS}]: {spec.n}", "n")

    if spec.kind == "single_detection" and spec.n is not None and spec.n < 2:
        raise DomainError(f"single_detection needs a motional dimension n ≥ 2, not {spec.n}", "n")

    if spec.kind == "two_photon_two_detector":
        if spec.n not in (None, 2):
            raise DomainError(f"two_photon_two_detector has exactly 2 photons, not {spec.n}", "n")

        if spec.network is not None and spec.network.count != 2:
            raise DomainError(f"two_photon_two_detector needs a 2-port network, not {spec.network.count} ports", "network")

    if spec.kind == "saturating_n" and spec.filter_amplitude is not None:
        if not 0 < spec.filter_amplitude <= 1:
            raise DomainError(f"filter amplitude must be in (0, 1], not {spec.filter_amplitude}", "filter_amplitude")

    if spec.kind == "etpd":
        for name in ("sigma", "delta"):
            value = getattr(spec, name)

            if value is None and not (name == "delta" and spec.acceptance == "delta_sum"):
                raise DomainError(f"etpd needs {name}", name)

            if value is not None and not value > 0:
                raise DomainError(f"etpd {name} must be positive, not {value}", name)

        if spec.acceptance not in ACCEPTANCE_KINDS:
            raise DomainError(f"unknown acceptance «{spec.acceptance}»; expected {prose_list(ACCEPTANCE_KINDS)}", "acceptance")

    if spec.seed is not None and spec.seed < 0:
        raise DomainError(f"seed must be non-negative, not {spec.seed}", "seed")

    return spec


def build_symmetric_ensemble(n: int) -> PhotonEnsemble:
    """
    N photons (two atomic, N−2 ancilla) each reaching every one of N detectors
    with amplitude 1/√N and equal phase.
    """
    if not MIN_PHOTONS <= n <= MAX_PHOTONS:
        raise DomainError(f"n out of range [{MIN_PHOTONS},{MAX_PHOTONS}]: {n}")

    return PhotonEnsemble(np.full((n, n), 1 / np.sqrt(n)), atomic_rows = (0, 1))


def saturating_filter_amplitude(n: int) -> float:
    """
    Per-photon amplitude factor of the collective-mode filter, 1/√(N−1).

    The symmetric state C ∝ (N−1) e₁e₁ᵀ − Σ_{i≥2} eᵢeᵢᵀ has both atomic photons
    in the collective mode e₁ in its first term, so that term picks up the
    factor twice: t² = 1/(N−1) brings it level with the rest.
    """
    return float(1 / np.sqrt(n - 1))


def build_saturating_protocol(n: int, filter_amplitude: Optional[float] = None) -> Tuple[PhotonEnsemble, LinearNetwork]:
    """
    The symmetric ensemble plus the network that routes the collective detector
    mode onto port 0, filters it by *filter_amplitude* (default
    :func:`saturating_filter_amplitude`), and routes it back.

    Both routing stages are realized as beam-splitter meshes via
    :func:`~ebitsim.optics.reck_decompose`, so the returned network carries its
    full element list.
    """
    ensemble = build_symmetric_ensemble(n)

    t = saturating_filter_amplitude(n) if filter_amplitude is None else filter_amplitude

    if not 0 < t <= 1:
        raise DomainError(f"filter amplitude must be in (0, 1], not {t}")

    collector = symmetric_collector_unitary(n)

    elements = [
        *reck_decompose(collector),
        Attenuator(0, t),
        *reck_decompose(collector.conj().T),
    ]

    network = compose(elements, PortBasis.of(n))

    LOG.debug(f"Built {n}-port saturating network from {len(elements)} elements with filter amplitude {t:.12g}")

    return ensemble, network


def random_network(ports: int, seed: Optional[int]) -> LinearNetwork:
    """
    A Haar-random unitary network on *ports*, drawn from *seed* and realized
    as a beam-splitter mesh.
    """
    unitary = scipy.stats.unitary_group.rvs(ports, random_state = seed)
    return compose(reck_decompose(unitary), PortBasis.of(ports))


def single_detection_inputs(dimension: int, seed: Optional[int]):
    """
    Motional states and weights for the single-detection protocol.

    Without a *seed*, the ideal case: ψ₁ and ψ₂ orthogonal to each other and
    to the ground state, with equal weights.  With a seed, a random draw.
    """
    if seed is None:
        psi1 = np.zeros(dimension, dtype = complex)
        psi2 = np.zeros(dimension, dtype = complex)
        psi1[1] = 1

        if dimension > 2:
            psi2[2] = 1
        else:
            psi2[1] = 1

        return psi1, psi2, 1.0, 1.0

    random = np.random.default_rng(seed)
    psi1, psi2 = random.normal(size = (2, dimension)) + 1j * random.normal(size = (2, dimension))
    w1, w2 = random.normal(size = 2) + 1j * random.normal(size = 2)

    return psi1, psi2, complex(w1), complex(w2)


def etpd_acceptance(spec: ProtocolSpec, grid: MomentumGrid) -> AcceptanceFunction:
    if spec.acceptance == "delta_sum":
        return DeltaSumAcceptance()

    elif spec.acceptance == "separable":
        # Gaussian marginal windows of width δ on each photon independently.
        window = lambda p: np.exp(-p ** 2 / (4 * spec.delta ** 2))   # type: ignore
        return SeparableAcceptance(window, window)

    else:
        return SumGaussianAcceptance(spec.delta)  # type: ignore


def run_protocol(spec: ProtocolSpec) -> ProtocolResult:
    """
    Build, post-select and analyze the experiment described by *spec*.

    Deterministic for a fixed *spec*, including its seed.

    >>> result = run_protocol(ProtocolSpec("symmetric_n", n = 3))
    >>> round(result.entropy_ebits, 4)
    1.2516
    """
    validate_spec(spec)

    oracle = None

    if spec.kind == "single_detection":
        dimension = spec.n or SINGLE_DETECTION_DIMENSION
        raw = single_detection_state(*single_detection_inputs(dimension, spec.seed))
        bound = 1.0

    elif spec.kind == "two_photon_two_detector":
        network = spec.network or random_network(2, 0 if spec.seed is None else spec.seed)
        spec = spec._replace(network = network)
        raw = coincidence_project(build_symmetric_ensemble(2), network)
        bound = 1.0

    elif spec.kind == "symmetric_n":
        raw = coincidence_project(build_symmetric_ensemble(spec.n))  # type: ignore
        bound = float(np.log2(spec.n))  # type: ignore

    elif spec.kind == "saturating_n":
        ensemble, network = build_saturating_protocol(spec.n, spec.filter_amplitude)  # type: ignore
        raw = coincidence_project(ensemble, network)
        bound = float(np.log2(spec.n))  # type: ignore

    else:
        widths = [w for w in (spec.sigma, spec.delta) if w is not None]
        grid = spec.grid or default_grid(*widths)
        spec = spec._replace(grid = grid)

        source = gaussian_source(spec.sigma, grid)  # type: ignore
        raw = build_etpd_kernel(source, source, etpd_acceptance(spec, grid), grid)
        bound = float(np.log2(grid.points))

        if spec.acceptance == "sum_gaussian":
            oracle = gaussian_schmidt_oracle(spec.sigma, spec.delta)  # type: ignore

    amplitude = raw.normalize()
    report = schmidt(amplitude)
    check = entropy_upper_bound_check(amplitude, bound)

    assert check.within, f"{spec.kind} exceeded its {bound:.6g} ebit bound by {-check.margin:.3g}"

    if oracle is not None:
        oracle_relative_error(report.entropy_ebits, oracle.entropy_ebits, spec.sigma, spec.delta, grid)  # type: ignore

    LOG.info(f"{spec.kind} (n = {spec.n}): {report.entropy_ebits:.12g} ebits, coincidence weight {raw.weight:.6g}")

    return ProtocolResult(spec, amplitude, report, raw.weight, oracle)
