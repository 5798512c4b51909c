"""Row-major Liouville-space building blocks (``vec(A X B) = kron(A, B.T) vec X``)."""

import numpy as np


def left(a):
    return np.kron(a, np.eye(a.shape[0]))


def right(b):
    return np.kron(np.eye(b.shape[0]), b.T)


def sandwich(a, b):
    """Superoperator of ``X -> a X b``."""
    return np.kron(a, b.T)


def commutator(h):
    """Superoperator of ``X -> -i [h, X]``."""
    return -1j * (left(h) - right(h))


def dissipator(a, rate=1.0):
    """Superoperator of ``rate (a X a^dag - {a^dag a, X} / 2)``."""
    ad = a.conj().T
    n = ad @ a
    return rate * (sandwich(a, ad) - 0.5 * left(n) - 0.5 * right(n))


def trace_row(d):
    return np.eye(d).reshape(-1)


def steady_state(L, d=2):
    """Null vector of L normalized to unit trace."""
    A = np.vstack([L, trace_row(d)[None, :]])
    b = np.zeros(A.shape[0], dtype=complex)
    b[-1] = 1.0
    x = np.linalg.lstsq(A, b, rcond=None)[0]
    rho = x.reshape(d, d)
    return 0.5 * (rho + rho.conj().T)
