"""Dense pure states and density matrices of a few spins 1/2.

Basis convention
----------------
Kets are labelled by strings such as ``"110"``; character ``k`` is the state
of site ``k+1``.  ``|1>`` is the sigma_z = +1 ("up") state and ``|0>`` the
sigma_z = -1 state.  Site 1 is the most significant tensor factor, and within
each factor ``|1>`` comes first, so the single-site Pauli matrices take their
textbook form ``Z = diag(1, -1)``.  With this ordering the reduced state of
site 1 prints as ``diag(1 + q**2, 1) / (2 + q**2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, DomainError
from .rgflow import ground_amplitude

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "Sector",
    "PureState",
    "DensityMatrix",
    "SpectralDecomposition",
    "ket_index",
    "jacobi_eigh",
    "block_ground_state",
    "density_from_pure",
    "partial_trace",
    "tensor",
    "spectral",
    "von_neumann_entropy",
    "uhlmann_fidelity",
    "bures_distance_sq",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
JACOBI_TOL = 1e-13
# Beyond this size the Python Jacobi sweep is too slow; LAPACK takes over.
JACOBI_MAX_DIM = 64
# Eigenvalues below this are treated as outside the support when taking sqrt.
SUPPORT_CUTOFF = 1e-14


class Sector(str, enum.Enum):
    """Magnetization sector of the degenerate three-site block ground states."""

    UP = "up_sector"
    DOWN = "down_sector"


def _site_count(dim):
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise DomainError(f"dimension {dim} is not a power of two >= 2")
    return n


def ket_index(label):
    """Row index of the computational basis ket ``|label>``."""
    if not label or set(label) - {"0", "1"}:
        raise DomainError(f"ket label must be a non-empty string of 0/1, got {label!r}")
    index = 0
    for ch in label:
        index = 2 * index + (1 - int(ch))
    return index


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    site_count: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.site_count:
            raise DomainError(
                f"{amps.size} amplitudes do not fit {self.site_count} sites"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalized (norm = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector):
        """Normalize ``vector`` and wrap it."""
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise DomainError("cannot normalize the zero vector")
        return cls(vector / norm, _site_count(vector.size))

    def amplitude(self, label):
        return self.amplitudes[ket_index(label)]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``site_count`` spins."""

    entries: np.ndarray
    site_count: int

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        dim = 2**self.site_count
        if m.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > HERMITIAN_TOL:
            raise DomainError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise DomainError(f"trace is {tr!r}, not 1")
        low = np.linalg.eigvalsh(m)[0]
        if low < -PSD_TOL:
            raise DomainError(f"matrix is not positive semidefinite (eigenvalue {low:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        return cls(matrix, _site_count(matrix.shape[0]))

    @property
    def dim(self):
        return self.entries.shape[0]

    def purity(self):
        return float(np.real(np.trace(self.entries @ self.entries)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in descending order and the matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def jacobi_eigh(matrix, tol=JACOBI_TOL, max_sweeps=100):
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary and then applies a real Givens rotation.  Sweeps stop
    once the Frobenius norm of the off-diagonal part drops below
    ``tol * max(1, ||A||_F)``.

    Returns ``(w, v)`` with ascending eigenvalues ``w`` and ``A = v diag(w) v^H``.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    v = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                mag = abs(apr)
                if mag <= 1e-3 * threshold / n:
                    continue
                phase = apr / mag
                theta = (a[r, r].real - a[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, r]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, r] = a[r, p] = 0.0
                a[p, p] = a[p, p].real
                a[r, r] = a[r, r].real
                v[:, idx] = v[:, idx] @ g
    else:
        raise ComputationError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def block_ground_state(delta, which=Sector.UP):
    """One of the two degenerate ground states of the open three-site block.

    ``up_sector``: (|110> + q|101> + |011>) / sqrt(2 + q**2)
    ``down_sector``: (|100> + q|010> + |001>) / sqrt(2 + q**2)
    """
    try:
        which = Sector(which)
    except ValueError:
        raise DomainError(f"unknown sector {which!r}; use 'up_sector' or 'down_sector'") from None
    q = ground_amplitude(delta)
    labels = ("110", "101", "011") if which is Sector.UP else ("100", "010", "001")
    amps = np.zeros(8, dtype=complex)
    for label, a in zip(labels, (1.0, q, 1.0)):
        amps[ket_index(label)] = a
    return PureState(amps / math.sqrt(2.0 + q * q), 3)


def density_from_pure(psi):
    """Projector ``|psi><psi|``."""
    amps = np.asarray(psi.amplitudes)
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > NORM_TOL:
        raise DomainError(f"state is not normalized (norm = {norm!r})")
    return DensityMatrix(np.outer(amps, amps.conj()), psi.site_count)


def partial_trace(rho, keep):
    """Reduced state on the sites in ``keep`` (1-based site numbers).

    The kept sites retain their relative order.
    """
    n = rho.site_count
    keep = sorted({int(k) for k in keep})
    if not keep or keep[0] < 1 or keep[-1] > n:
        raise DomainError(f"keep set must be a non-empty subset of 1..{n}, got {keep}")
    if len(keep) == n:
        return rho
    t = np.asarray(rho.entries).reshape([2] * (2 * n))
    remaining = n
    for site in sorted(set(range(n)) - {k - 1 for k in keep}, reverse=True):
        t = np.trace(t, axis1=site, axis2=site + remaining)
        remaining -= 1
    dim = 2 ** len(keep)
    return DensityMatrix(t.reshape(dim, dim), len(keep))


def tensor(*states):
    """Tensor product of density matrices, first factor most significant."""
    m = np.ones((1, 1), dtype=complex)
    for s in states:
        m = np.kron(m, s.entries)
    return DensityMatrix(m, sum(s.site_count for s in states))


def _as_matrix(rho):
    return np.asarray(rho.entries if isinstance(rho, DensityMatrix) else rho, dtype=complex)


def spectral(rho):
    """Spectral decomposition with eigenvalues sorted in descending order.

    Accepts a :class:`DensityMatrix` or any Hermitian array.
    """
    m = _as_matrix(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise DomainError("spectral decomposition needs a Hermitian matrix")
    if m.shape[0] <= JACOBI_MAX_DIM:
        w, v = jacobi_eigh(m)
    else:
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def _clamped_eigenvalues(rho):
    sd = spectral(rho)
    w = sd.eigenvalues.copy()
    if w.size and w[-1] < -PSD_TOL:
        raise DomainError(f"matrix is not positive semidefinite (eigenvalue {w[-1]:.3e})")
    w[w < 0] = 0.0
    return w, sd.eigenvectors


def von_neumann_entropy(rho, log_base=2):
    """``-sum(l * log(l))`` over the spectrum, with ``0 log 0 = 0``.

    ``log_base`` is 2 (bits, the default) or e (nats; ``"e"`` also accepted).
    """
    if log_base in ("e", "E") or (not isinstance(log_base, str) and log_base == math.e):
        log = np.log
    elif log_base in (2, "2"):
        log = np.log2
    else:
        raise DomainError(f"log base must be 2 or e, got {log_base!r}")
    w, _ = _clamped_eigenvalues(rho)
    w = w[w > 0]
    return float(max(0.0, -np.sum(w * log(w))))


def _sqrt_psd(rho):
    w, v = _clamped_eigenvalues(rho)
    w[w < SUPPORT_CUTOFF] = 0.0
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(rho, sigma):
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``, in [0, 1].

    Computed as the trace norm of ``sqrt(rho) sqrt(sigma)``; for pure states
    this equals ``|<psi|phi>|``.
    """
    if rho.dim != sigma.dim:
        raise DomainError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    prod = _sqrt_psd(rho) @ _sqrt_psd(sigma)
    fid = float(np.sum(np.linalg.svd(prod, compute_uv=False)))
    return min(1.0, max(0.0, fid))


def bures_distance_sq(rho, sigma):
    """Squared Bures distance ``2 (1 - F(rho, sigma))``."""
    return max(0.0, 2.0 * (1.0 - uhlmann_fidelity(rho, sigma)))
