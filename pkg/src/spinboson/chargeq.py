"""Charge-qubit Hamiltonian with dephasing coupling, rotated to its eigenbasis.

The Hamiltonian ``H_S = w0 sz / 2 + Delta sx / 2 + delta sy / 2`` with bath
coupling ``sz x B`` is diagonalized, ``H_S = (Omega / 2) sz~``, and the
coupling operator is expanded in the Pauli matrices of the eigenbasis,

    sz = c_z sz~ + c_x sx~ + c_y sy~,    c_i = Tr(sz sigma~_i) / 2,

so that ``(Omega, c_x, c_y, c_z)`` is a non-equilibrium spin-boson model
with ``(w0, f1, f2, f3)``. Since ``sz`` is a traceless involution,
``c_x^2 + c_y^2 + c_z^2 = 1``.
"""

from dataclasses import dataclass

import numpy as np

from .bloch import SIGMA_X, SIGMA_Y, SIGMA_Z
from .cumulant import SystemParams

__all__ = ["CpbParams", "CpbSystem", "eigenbasis", "rotate_to_eigenbasis",
           "rotated_system"]


@dataclass(frozen=True)
class CpbParams:
    """Splitting ``omega0`` and transverse fields ``delta_x`` (Delta), ``delta_y`` (delta)."""

    omega0: float
    delta_x: float = 0.0
    delta_y: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("Omega = sqrt(omega0^2 + Delta^2 + delta^2) must be > 0")

    @property
    def omega(self):
        return float(np.sqrt(self.omega0 ** 2 + self.delta_x ** 2 + self.delta_y ** 2))

    @property
    def hamiltonian(self):
        return 0.5 * (self.omega0 * SIGMA_Z + self.delta_x * SIGMA_X
                      + self.delta_y * SIGMA_Y)


@dataclass(frozen=True)
class CpbSystem:
    """Unrotated system in the form accepted by the HEOM solver."""

    params: CpbParams

    @property
    def hamiltonian(self):
        return self.params.hamiltonian

    @property
    def coupling(self):
        return SIGMA_Z


def eigenbasis(p):
    """Unitary V with columns ``|+>, |->`` (energies ``+Omega/2, -Omega/2``).

    Phases are fixed by making the component along ``|1>`` (the
    ``sz = -1`` state) real and nonnegative; when it vanishes the
    component along ``|0>`` is made real and positive instead.
    """
    w, v = np.linalg.eigh(p.hamiltonian)
    V = v[:, ::-1].copy()
    for j in range(2):
        ref = V[1, j] if abs(V[1, j]) > 1e-12 else V[0, j]
        V[:, j] *= np.conj(ref) / abs(ref)
    return V


def rotate_to_eigenbasis(p):
    """Return ``(Omega, c_z, c_x, c_y)``.

    Examples
    --------
    >>> rotate_to_eigenbasis(CpbParams(1.0))
    (1.0, 1.0, 0.0, 0.0)
    """
    V = eigenbasis(p)
    sz_r = V.conj().T @ SIGMA_Z @ V
    c = [0.5 * np.trace(sz_r @ s).real for s in (SIGMA_Z, SIGMA_X, SIGMA_Y)]
    c = np.array(c)
    c /= np.linalg.norm(c)
    cz, cx, cy = (float(x) + 0.0 for x in c)
    return p.omega, cz, cx, cy


def rotated_system(p):
    """SystemParams of the rotated model: ``w0 = Omega``, ``f = (c_x, c_y, c_z)``."""
    omega, cz, cx, cy = rotate_to_eigenbasis(p)
    return SystemParams(omega, cx, cy, cz)
