"""Exact diagonalization of short XXZ chains.

``H = (J/4) sum_i (X_i X_{i+1} + Y_i Y_{i+1} + Delta Z_i Z_{i+1})`` is built
directly in the computational basis of :mod:`xxzqfi.quantum_state`: the
Z Z term is diagonal and X X + Y Y flips an antiparallel pair with amplitude
2.  Dense matrices only, capped at 12 sites.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DegeneracyError, DomainError, VerificationError
from .qfi import qfi_pure
from .quantum_state import PureState, Sector, block_ground_state
from .rgflow import CouplingConstants

__all__ = [
    "Boundary",
    "SpinHamiltonian",
    "GroundSpace",
    "MAX_SITES",
    "bonds",
    "build_hamiltonian",
    "sector_states",
    "sector_hamiltonian",
    "total_sz",
    "block_decomposition",
    "ground_space",
    "verify_block_ground_space",
    "ed_ground_state",
    "ed_ground_qfi",
]

MAX_SITES = 12
DEGENERACY_RTOL = 1e-10
PROJECTOR_TOL = 1e-9


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True, eq=False)
class SpinHamiltonian:
    entries: np.ndarray
    sites: int
    boundary: Boundary
    couplings: CouplingConstants

    def __add__(self, other):
        if self.sites != other.sites:
            raise DomainError("cannot add Hamiltonians on different chains")
        return SpinHamiltonian(self.entries + other.entries, self.sites, self.boundary, self.couplings)


@dataclass(frozen=True, eq=False)
class GroundSpace:
    energy: float
    degeneracy: int
    basis: tuple
    projector_distance: float | None = None

    def projector(self):
        vecs = np.column_stack([np.asarray(p.amplitudes) for p in self.basis])
        return vecs @ vecs.conj().T


def _check_sites(sites):
    if isinstance(sites, bool) or int(sites) != sites:
        raise DomainError(f"number of sites must be an integer, got {sites!r}")
    sites = int(sites)
    if not 2 <= sites <= MAX_SITES:
        raise CapacityError(f"dense ED supports 2..{MAX_SITES} sites, got {sites}")
    return sites


def bonds(sites, boundary=Boundary.PERIODIC):
    """Nearest-neighbour bonds as 0-based site pairs."""
    boundary = Boundary(boundary)
    pairs = [(i, i + 1) for i in range(sites - 1)]
    if boundary is Boundary.PERIODIC:
        pairs.append((sites - 1, 0))
    return pairs


def _spin_up(states, site, sites):
    # bit 0 in the index is |1> (sigma_z = +1)
    return ((states >> (sites - 1 - site)) & 1) == 0


def _assemble(sites, c, pairs, states):
    """Matrix of the bond sum restricted to the basis ``states`` (sorted indices)."""
    states = np.asarray(states, dtype=np.int64)
    dim = states.size
    position = {int(s): k for k, s in enumerate(states)}
    h = np.zeros((dim, dim))
    cols = np.arange(dim)
    for i, j in pairs:
        zi = np.where(_spin_up(states, i, sites), 1.0, -1.0)
        zj = np.where(_spin_up(states, j, sites), 1.0, -1.0)
        h[cols, cols] += 0.25 * c.j * c.delta * zi * zj
        flip = (1 << (sites - 1 - i)) | (1 << (sites - 1 - j))
        for k in np.flatnonzero(zi != zj):
            h[position[int(states[k] ^ flip)], k] += 0.5 * c.j
    return h


def build_hamiltonian(sites, c, boundary=Boundary.PERIODIC):
    """Dense XXZ Hamiltonian on ``sites`` spins."""
    sites = _check_sites(sites)
    boundary = Boundary(boundary)
    h = _assemble(sites, c, bonds(sites, boundary), np.arange(2**sites))
    return SpinHamiltonian(h, sites, boundary, c)


def total_sz(sites):
    """Diagonal of ``sum_i Z_i``."""
    states = np.arange(2**sites)
    return sum(np.where(_spin_up(states, i, sites), 1.0, -1.0) for i in range(sites))


def sector_states(sites, n_up):
    """Basis indices with exactly ``n_up`` spins up, ascending."""
    states = np.arange(2**sites)
    ups = sum(_spin_up(states, i, sites).astype(int) for i in range(sites))
    return states[ups == n_up]


def sector_hamiltonian(sites, c, n_up, boundary=Boundary.PERIODIC):
    """``(H restricted to the n_up sector, basis indices)``."""
    sites = _check_sites(sites)
    if not 0 <= n_up <= sites:
        raise DomainError(f"n_up must lie in 0..{sites}, got {n_up}")
    states = sector_states(sites, n_up)
    return _assemble(sites, c, bonds(sites, boundary), states), states


def block_decomposition(sites, c):
    """Split the periodic chain into intrablock and interblock parts.

    Blocks are consecutive site triples; the interblock part holds the bond
    between site 3 of block I and site 1 of block I+1.
    """
    sites = _check_sites(sites)
    if sites % 3:
        raise DomainError(f"block decomposition needs a multiple of 3 sites, got {sites}")
    states = np.arange(2**sites)
    intra = [(3 * b + k, 3 * b + k + 1) for b in range(sites // 3) for k in (0, 1)]
    inter = [(3 * b + 2, (3 * b + 3) % sites) for b in range(sites // 3)]
    return (
        SpinHamiltonian(_assemble(sites, c, intra, states), sites, Boundary.PERIODIC, c),
        SpinHamiltonian(_assemble(sites, c, inter, states), sites, Boundary.PERIODIC, c),
    )


def ground_space(ham, rtol=DEGENERACY_RTOL):
    """Lowest level of ``ham`` and an orthonormal basis of its eigenspace."""
    w, v = np.linalg.eigh(ham.entries)
    tol = rtol * max(1.0, abs(w[0]))
    deg = int(np.count_nonzero(w - w[0] <= tol))
    basis = tuple(PureState(v[:, k], ham.sites) for k in range(deg))
    return GroundSpace(float(w[0]), deg, basis)


def verify_block_ground_space(delta, j=1.0):
    """Check that the open three-site block has the two-fold ground space
    spanned by the analytic states ``|phi_0>`` and ``|phi_0'>``.

    Returns the numerical ground space with the operator-norm distance between
    its projector and the analytic one.  Raises :class:`VerificationError`
    if the degeneracy is not 2 or the projectors differ by 1e-9 or more.
    """
    ham = build_hamiltonian(3, CouplingConstants(j, delta), Boundary.OPEN)
    gs = ground_space(ham)
    if gs.degeneracy != 2:
        w = np.linalg.eigvalsh(ham.entries)
        raise VerificationError(
            f"block ground space at Delta={delta} has degeneracy {gs.degeneracy} "
            f"(lowest levels {w[:3].tolist()})"
        )
    analytic = np.column_stack(
        [np.asarray(block_ground_state(delta, s).amplitudes) for s in Sector]
    )
    dist = float(np.linalg.norm(gs.projector() - analytic @ analytic.conj().T, 2))
    if not dist < PROJECTOR_TOL:
        raise VerificationError(f"projector distance {dist:.3e} at Delta={delta}")
    return GroundSpace(gs.energy, gs.degeneracy, gs.basis, dist)


def ed_ground_state(sites, delta, j=1.0, boundary=Boundary.PERIODIC):
    """Unique ground state in the zero-magnetization sector, embedded in the full space."""
    sites = _check_sites(sites)
    if sites % 2:
        raise DomainError(f"zero-magnetization sector needs an even chain, got {sites}")
    h, states = sector_hamiltonian(sites, CouplingConstants(j, delta), sites // 2, boundary)
    w, v = np.linalg.eigh(h)
    if w[1] - w[0] <= DEGENERACY_RTOL * max(1.0, abs(w[0])):
        raise DegeneracyError(
            f"sector ground state is degenerate at Delta={delta}: E0={w[0]!r}, E1={w[1]!r}",
            energies=(float(w[0]), float(w[1])),
        )
    full = np.zeros(2**sites, dtype=complex)
    full[states] = v[:, 0]
    return PureState(full, sites)


def ed_ground_qfi(sites, delta, h=1e-4, j=1.0, boundary=Boundary.PERIODIC):
    """Pure-state QFI (4x the fidelity susceptibility) of the exact chain ground state."""
    if not 1e-6 <= h <= 1e-3:
        raise DomainError(f"step h must lie in [1e-6, 1e-3], got {h!r}")
    return qfi_pure(lambda d: ed_ground_state(sites, d, j, boundary), delta, h)
