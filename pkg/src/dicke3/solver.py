"""Eigensolver, ground states, observables, cutoff convergence, evolution.

Dense symmetric diagonalization is the baseline; every Hamiltonian built by
this package is block tridiagonal in the photon-major ordering (half
bandwidth 2 m - 1 with m the atomic dimension), which the convergence scan
exploits for cheap lowest-eigenvalue queries.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import BasisSet, DimensionLimitError, enumerate_basis
from .model import ModelConfig, build_frame_hamiltonian
from .operators import OperatorMatrix
from .rotations import Branch

DEGENERACY_GAP = 1e-10
DEFAULT_ENERGY_TOL = 1e-8
DEFAULT_TAIL_TOL = 1e-10
CUTOFF_START = 8
CUTOFF_HARD_CAP = 512


class NonConvergenceError(RuntimeError):
    """Photon-cutoff convergence failed within the hard cap."""


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition: ascending energies, orthonormal columns.

    Sign convention: the largest-magnitude component of every eigenvector is
    positive (ties broken by the lowest index).
    """

    energies: np.ndarray
    vectors: np.ndarray
    basis: BasisSet


@dataclass(frozen=True)
class QuantumState:
    """Normalized state vector over a basis.

    ``degenerate`` marks ground states extracted within DEGENERACY_GAP of the
    next level, where the returned representative is convention, not physics.
    """

    amplitudes: np.ndarray
    basis: BasisSet
    degenerate: bool = False

    def __post_init__(self):
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.shape} does not "
                f"match basis dimension {self.basis.dim}"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized: |norm - 1| = {abs(norm - 1):.3e}")
        self.amplitudes.setflags(write=False)


def _fix_sign(column: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(column)))
    return column if column[i] > 0 else -column


def _require_same_basis(a: BasisSet, b: BasisSet) -> None:
    if not a.compatible_with(b):
        raise ValueError(
            f"basis mismatch: (na={a.na}, nmax={a.nmax}) vs (na={b.na}, nmax={b.nmax})"
        )


def diagonalize(H: OperatorMatrix, basis: BasisSet) -> Spectrum:
    """Full spectrum of a real symmetric operator."""
    if not H.hermitian:
        raise ValueError("diagonalize requires a hermitian operator")
    if H.dim != basis.dim:
        raise ValueError(f"operator dim {H.dim} does not match basis dim {basis.dim}")
    energies, vectors = scipy.linalg.eigh(H.matrix)
    for col in range(vectors.shape[1]):
        vectors[:, col] = _fix_sign(vectors[:, col])
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return Spectrum(energies, vectors, basis)


def ground_state(H: OperatorMatrix, basis: BasisSet) -> QuantumState:
    """Lowest eigenvector under the sign convention.

    Near-degeneracy (gap below DEGENERACY_GAP) is flagged on the returned
    state rather than raised.
    """
    if not H.hermitian:
        raise ValueError("ground_state requires a hermitian operator")
    if H.dim != basis.dim:
        raise ValueError(f"operator dim {H.dim} does not match basis dim {basis.dim}")
    if H.dim == 1:
        return QuantumState(np.ones(1, dtype=complex), basis)
    energies, vectors = scipy.linalg.eigh(H.matrix, subset_by_index=(0, 1))
    vec = _fix_sign(vectors[:, 0])
    vec = vec / np.linalg.norm(vec)
    degenerate = bool(energies[1] - energies[0] < DEGENERACY_GAP)
    return QuantumState(vec.astype(complex), basis, degenerate=degenerate)


def expectation(state: QuantumState, op: OperatorMatrix) -> float:
    """Real expectation value of a hermitian operator."""
    if op.dim != state.basis.dim:
        raise ValueError("operator and state dimensions differ")
    val = np.vdot(state.amplitudes, op.matrix @ state.amplitudes)
    return float(val.real)


def populations(state: QuantumState) -> tuple[float, float, float, float]:
    """Level populations and mean photon number (<A11>, <A22>, <A33>, <n>).

    All four operators are diagonal in the occupation basis, so the sums run
    straight over the probability weights; the level populations add up to
    the atom count.
    """
    prob = np.abs(state.amplitudes) ** 2
    counts = state.basis.level_counts
    return (
        float(prob @ counts[:, 0]),
        float(prob @ counts[:, 1]),
        float(prob @ counts[:, 2]),
        float(prob @ state.basis.photon_numbers),
    )


def _banded_storage(mat: np.ndarray, halfwidth: int) -> np.ndarray:
    n = mat.shape[0]
    ab = np.zeros((halfwidth + 1, n))
    for d in range(halfwidth + 1):
        ab[d, : n - d] = np.diagonal(mat, -d)
    return ab


def lowest_energy(H: OperatorMatrix, basis: BasisSet) -> float:
    """Ground energy only, via the banded bisection solver."""
    hw = 2 * basis.atomic_dim - 1
    if hw >= H.dim:
        return float(scipy.linalg.eigvalsh(H.matrix)[0])
    ab = _banded_storage(H.matrix, hw)
    w = scipy.linalg.eigvals_banded(ab, lower=True, select="i", select_range=(0, 0))
    return float(w[0])


def converged_ground_state(
    config: ModelConfig,
    etol: float = DEFAULT_ENERGY_TOL,
    ptol: float = DEFAULT_TAIL_TOL,
    *,
    rotated: Branch | None = None,
    start: int = CUTOFF_START,
    hard_cap: int = CUTOFF_HARD_CAP,
) -> tuple[int, QuantumState]:
    """Converged photon cutoff together with the ground state at that cutoff.

    A candidate cutoff passes when doubling it moves the ground energy by
    less than ``etol`` and the ground state carries less than ``ptol``
    probability in its top two photon blocks.  Candidates double from
    ``start``; the result is monotone in the couplings, so sweeps may seed
    ``start`` from a dominated point without changing the outcome.
    """
    if etol <= 0 or ptol <= 0:
        raise ValueError("tolerances must be positive")
    energy_at: dict[int, float] = {}

    def e0(cutoff: int) -> float:
        if cutoff not in energy_at:
            b = enumerate_basis(config.na, cutoff)
            m = dataclasses.replace(config, nmax=cutoff)
            energy_at[cutoff] = lowest_energy(build_frame_hamiltonian(m, b, rotated), b)
        return energy_at[cutoff]

    cutoff = start
    try:
        while cutoff <= hard_cap:
            if abs(e0(cutoff) - e0(2 * cutoff)) < etol:
                b = enumerate_basis(config.na, cutoff)
                m = dataclasses.replace(config, nmax=cutoff)
                state = ground_state(build_frame_hamiltonian(m, b, rotated), b)
                tail = np.abs(state.amplitudes[-2 * b.atomic_dim :]) ** 2
                if tail.sum() < ptol:
                    return cutoff, state
            cutoff *= 2
    except DimensionLimitError as exc:
        raise NonConvergenceError(
            f"cutoff search hit the basis dimension guard at nmax={cutoff}"
        ) from exc
    raise NonConvergenceError(
        f"no converged cutoff at or below {hard_cap} "
        f"(etol={etol:g}, ptol={ptol:g})"
    )


def converge_cutoff(
    config: ModelConfig,
    etol: float = DEFAULT_ENERGY_TOL,
    ptol: float = DEFAULT_TAIL_TOL,
    *,
    start: int = CUTOFF_START,
    hard_cap: int = CUTOFF_HARD_CAP,
) -> int:
    """Smallest tested photon cutoff meeting the convergence criteria."""
    cutoff, _ = converged_ground_state(
        config, etol, ptol, start=start, hard_cap=hard_cap
    )
    return cutoff


def evolve(spectrum: Spectrum, state: QuantumState, t: float) -> QuantumState:
    """Unitary evolution by time t through the eigendecomposition."""
    _require_same_basis(spectrum.basis, state.basis)
    coeffs = spectrum.vectors.T @ state.amplitudes
    evolved = spectrum.vectors @ (np.exp(-1j * spectrum.energies * t) * coeffs)
    norm = np.linalg.norm(evolved)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(
            f"evolution lost unitarity: |norm - 1| = {abs(norm - 1):.3e}; "
            "the spectrum's eigenvectors are not orthonormal"
        )
    return QuantumState(evolved / norm, state.basis)
