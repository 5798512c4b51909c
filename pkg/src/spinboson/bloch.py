"""SU(N) operator basis, coherence vectors and affine Bloch maps.

The generalized Bloch vector of an N-level density matrix is
``mu_j = Tr(lambda_j rho)`` with ``rho = I/N + (1/2) sum_j mu_j lambda_j``.
The basis is ordered as the symmetric ``u_jk`` block, the antisymmetric
``v_jk`` block and the diagonal ``w_j`` block.

For a qubit, the standard construction gives ``u_12 = sigma_x``,
``v_12 = -sigma_y`` and ``w_1 = -sigma_z``. The qubit solvers use Pauli
vectors ordered as ``(z, x, y)``; :func:`su2_to_pauli` and
:func:`pauli_to_su2` are the only places where the two conventions meet.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULI_ZXY",
    "SuNBasis",
    "AffineGenerator",
    "sun_basis",
    "to_bloch",
    "from_bloch",
    "su2_to_pauli",
    "pauli_to_su2",
    "pauli_vector",
    "pauli_state",
    "phi1",
    "expm_phi1",
    "exp_affine",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_ZXY = (SIGMA_Z, SIGMA_X, SIGMA_Y)

# su(2) vector (u, v, w) = (<sx>, -<sy>, -<sz>)  ->  Pauli (z, x, y)
_SU2_TO_PAULI = np.array([[0, 0, -1], [1, 0, 0], [0, -1, 0]], dtype=float)


@dataclass(frozen=True)
class SuNBasis:
    """Ordered generalized Gell-Mann basis of su(N)."""

    N: int
    ops: tuple
    labels: tuple

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, i):
        return self.ops[i]

    def stack(self):
        return np.array(self.ops)


@dataclass(frozen=True)
class AffineGenerator:
    """Affine action ``d mu = M mu + 2 r`` of a generator on Bloch vectors.

    With ``rho = I/2 + (1/2) mu . sigma`` the generator acts as
    ``K[rho] = (M mu / 2 + r) . sigma``. Qubit ordering is (z, x, y).
    """

    M: np.ndarray
    r: np.ndarray
    t: float = 0.0


def _unit(N, j, k):
    e = np.zeros((N, N), dtype=complex)
    e[j, k] = 1.0
    return e


def sun_basis(N):
    """Generalized Gell-Mann matrices in (u, v, w) order.

    Kets ``|j>`` (j = 1..N) are the computational basis vectors, so that
    ``u_jk = |j><k| + |k><j|``, ``v_jk = i(|j><k| - |k><j|)`` and
    ``w_l = -sqrt(2 / (l (l + 1))) (P_1 + ... + P_l - l P_{l+1})``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    pairs = [(j, k) for j in range(N) for k in range(j + 1, N)]
    u = [_unit(N, j, k) + _unit(N, k, j) for j, k in pairs]
    v = [1j * (_unit(N, j, k) - _unit(N, k, j)) for j, k in pairs]
    w = []
    for l in range(1, N):
        d = np.zeros(N)
        d[:l] = 1.0
        d[l] = -l
        w.append(-np.sqrt(2.0 / (l * (l + 1))) * np.diag(d).astype(complex))
    labels = ([f"u{j + 1}{k + 1}" for j, k in pairs]
              + [f"v{j + 1}{k + 1}" for j, k in pairs]
              + [f"w{l}" for l in range(1, N)])
    return SuNBasis(N, tuple(u + v + w), tuple(labels))


def _validate(rho, tol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real:.3g} != 1")
    return rho


def to_bloch(rho, basis=None):
    """Coherence vector ``mu_j = Tr(lambda_j rho)``."""
    rho = _validate(rho)
    basis = basis or sun_basis(rho.shape[0])
    ops = basis.stack()
    return np.einsum("kij,ji->k", ops, rho).real


def from_bloch(mu, basis=None, N=None):
    """Density matrix ``I/N + (1/2) sum_j mu_j lambda_j``."""
    mu = np.asarray(mu, dtype=float)
    if basis is None:
        N = N or int(round(np.sqrt(mu.size + 1)))
        basis = sun_basis(N)
    if mu.size != len(basis):
        raise ValueError(f"expected {len(basis)} components, got {mu.size}")
    rho = np.eye(basis.N, dtype=complex) / basis.N
    rho += 0.5 * np.einsum("k,kij->ij", mu, basis.stack())
    return rho


def su2_to_pauli(mu):
    """Map an su(2) vector (u, v, w) to the Pauli vector (z, x, y)."""
    return _SU2_TO_PAULI @ np.asarray(mu, dtype=float)


def pauli_to_su2(x):
    return _SU2_TO_PAULI.T @ np.asarray(x, dtype=float)


def pauli_vector(rho):
    """Qubit expectation values (<sz>, <sx>, <sy>)."""
    return su2_to_pauli(to_bloch(rho))


def pauli_state(x):
    """Qubit density matrix from (<sz>, <sx>, <sy>)."""
    return from_bloch(pauli_to_su2(x))


def expm_phi1(M):
    """Return ``(exp(M), phi1(M))`` from one augmented exponential.

    ``expm([[M, I], [0, 0]]) = [[exp(M), phi1(M)], [0, I]]`` with
    ``phi1(M) = sum_{n>=1} M^(n-1) / n!``. Scaling and squaring with Pade
    approximants is done by :func:`scipy.linalg.expm`. No inverse of M is
    formed, so singular M is fine.
    """
    M = np.asarray(M)
    n = M.shape[0]
    aug = np.zeros((2 * n, 2 * n), dtype=M.dtype)
    aug[:n, :n] = M
    aug[:n, n:] = np.eye(n)
    E = linalg.expm(aug)
    return E[:n, :n], E[:n, n:]


def phi1(M):
    return expm_phi1(M)[1]


def exp_affine(M, r, mu0):
    """Apply the exponential of the affine generator to ``mu0``.

    Solves ``d mu / ds = M mu + 2 r`` over unit time, i.e.
    ``mu = exp(M) mu0 + 2 phi1(M) r``. This is the Bloch-vector form of
    ``exp(K)[rho]``.
    """
    M = np.asarray(M, dtype=float)
    r = np.asarray(r, dtype=float)
    mu0 = np.asarray(mu0, dtype=float)
    n = M.shape[0]
    # one augmented exponential carries the affine part
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = M
    aug[:n, n] = 2.0 * r
    E = linalg.expm(aug)
    return E[:n, :n] @ mu0 + E[:n, n]
