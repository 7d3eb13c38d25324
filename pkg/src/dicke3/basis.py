"""Occupation-number basis for N three-level atoms coupled to one boson mode.

States are product states |nu; n1, n2, n3> with nu the photon number
(truncated at a cutoff) and n1 + n2 + n3 = N_a the number of atoms in each
level.  Only the permutation-symmetric atomic sector is represented, so the
atomic factor has dimension (N_a + 1)(N_a + 2)/2 instead of 3**N_a.

The enumeration is photon-major (nu ascending, then n1 descending, then n2
descending), which keeps photon blocks contiguous: every operator built here
factorizes as kron(photon part, atomic part), and photon-cutoff convergence
checks are block local.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

DEFAULT_MAX_DIM = 6000
MAX_DIM_ENV_VAR = "DICKE3_MAX_DIM"


class DimensionLimitError(ValueError):
    """Requested basis would exceed the configured matrix-size guard."""


class BasisState(NamedTuple):
    """Single product state |nu; n1, n2, n3>."""

    nu: int
    n1: int
    n2: int
    n3: int

    def occupation(self, level: int) -> int:
        """Occupation of atomic level 1, 2 or 3."""
        if level not in (1, 2, 3):
            raise ValueError(f"level must be 1, 2 or 3, got {level}")
        return (self.n1, self.n2, self.n3)[level - 1]


def atomic_occupations(na: int) -> tuple[tuple[int, int, int], ...]:
    """All (n1, n2, n3) with n1 + n2 + n3 = na, n1 then n2 descending."""
    if na < 1:
        raise ValueError(f"atom count must be >= 1, got {na}")
    out = []
    for n1 in range(na, -1, -1):
        for n2 in range(na - n1, -1, -1):
            out.append((n1, n2, na - n1 - n2))
    return tuple(out)


def atomic_dimension(na: int) -> int:
    return (na + 1) * (na + 2) // 2


def basis_dimension(na: int, nmax: int) -> int:
    """Dimension of the truncated product space: (nmax+1)(na+1)(na+2)/2."""
    return (nmax + 1) * atomic_dimension(na)


def _resolved_max_dim(max_dim: int | None) -> int:
    if max_dim is not None:
        return max_dim
    env = os.environ.get(MAX_DIM_ENV_VAR)
    if env is not None:
        return int(env)
    return DEFAULT_MAX_DIM


@dataclass(frozen=True)
class BasisSet:
    """Full enumerated basis plus the inverse index map.

    Immutable after construction; shared read-only across threads.  The
    occupation arrays mirror ``states`` columnwise and back the diagonal
    operators and population sums.
    """

    na: int
    nmax: int
    states: tuple[BasisState, ...]
    index: Mapping[BasisState, int]
    photon_numbers: np.ndarray
    level_counts: np.ndarray  # shape (dim, 3)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def atomic_dim(self) -> int:
        return atomic_dimension(self.na)

    def __len__(self) -> int:
        return len(self.states)

    def compatible_with(self, other: "BasisSet") -> bool:
        return self.na == other.na and self.nmax == other.nmax


def enumerate_basis(na: int, nmax: int, max_dim: int | None = None) -> BasisSet:
    """Enumerate |nu; n1, n2, n3> for nu <= nmax, n1+n2+n3 = na.

    The guard rejects bases whose dense-matrix footprint would be
    unreasonable; it can be widened per call or through the
    ``DICKE3_MAX_DIM`` environment variable.
    """
    if na < 1:
        raise ValueError(f"atom count must be >= 1, got {na}")
    if nmax < 0:
        raise ValueError(f"photon cutoff must be >= 0, got {nmax}")
    dim = basis_dimension(na, nmax)
    limit = _resolved_max_dim(max_dim)
    if dim > limit:
        raise DimensionLimitError(
            f"basis dimension {dim} exceeds the guard {limit}; "
            f"raise {MAX_DIM_ENV_VAR} or pass max_dim to override"
        )

    atoms = atomic_occupations(na)
    states = tuple(
        BasisState(nu, *occ) for nu in range(nmax + 1) for occ in atoms
    )
    index = MappingProxyType({s: i for i, s in enumerate(states)})
    photon_numbers = np.array([s.nu for s in states], dtype=np.int64)
    level_counts = np.array([[s.n1, s.n2, s.n3] for s in states], dtype=np.int64)
    photon_numbers.setflags(write=False)
    level_counts.setflags(write=False)
    return BasisSet(na, nmax, states, index, photon_numbers, level_counts)


def index_of(basis: BasisSet, state: BasisState) -> int:
    """Position of ``state`` in ``basis.states``; inverse of the enumeration."""
    try:
        return basis.index[state]
    except KeyError:
        raise ValueError(f"state {state} is not in the basis") from None


@dataclass(frozen=True)
class LevelSector:
    """States of a parent basis with one atomic level frozen at a fixed count.

    ``parent_indices[i]`` is the position of ``states[i]`` in the parent
    enumeration, so parent-basis operators and amplitudes restrict by fancy
    indexing.  Note this is not a ``BasisSet``: its dimension is
    (nmax+1)(na - n_fixed + 1).
    """

    parent: BasisSet
    level: int
    n_fixed: int
    states: tuple[BasisState, ...]
    parent_indices: np.ndarray

    @property
    def na(self) -> int:
        return self.parent.na

    @property
    def nmax(self) -> int:
        return self.parent.nmax

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def active_atoms(self) -> int:
        """Atoms left in the two unfrozen levels."""
        return self.na - self.n_fixed


def fixed_level_sector(basis: BasisSet, level: int, n_fixed: int) -> LevelSector:
    """Select the |nu; ...> states with exactly ``n_fixed`` atoms in ``level``."""
    if level not in (1, 2, 3):
        raise ValueError(f"level must be 1, 2 or 3, got {level}")
    if not 0 <= n_fixed <= basis.na:
        raise ValueError(
            f"fixed occupation {n_fixed} outside [0, {basis.na}]"
        )
    mask = basis.level_counts[:, level - 1] == n_fixed
    parent_indices = np.nonzero(mask)[0]
    parent_indices.setflags(write=False)
    states = tuple(basis.states[i] for i in parent_indices)
    return LevelSector(basis, level, n_fixed, states, parent_indices)
