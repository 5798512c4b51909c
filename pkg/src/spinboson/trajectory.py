"""Container for time series of qubit density matrices."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Trajectory", "rotate_picture"]


@dataclass
class Trajectory:
    """Density matrices on a time grid.

    Attributes
    ----------
    times : ndarray, shape (n,)
    states : ndarray, shape (n, d, d)
        Density matrices in the picture named by ``picture``.
    solver : str
        Identifier of the method that produced the data.
    picture : str
        ``"schrodinger"`` or ``"interaction"``.
    options : dict
        Solver options used for the run (provenance).
    diagnostics : dict
        Free-form numerical diagnostics (error estimates, drifts, ...).
    """

    times: np.ndarray
    states: np.ndarray
    solver: str
    picture: str = "schrodinger"
    options: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states have different lengths")

    def __len__(self):
        return self.times.size

    @property
    def populations(self):
        return np.real(np.einsum("nii->ni", self.states))

    @property
    def coherence(self):
        """The element rho_01 as a complex series."""
        return self.states[:, 0, 1]

    def expectation(self, op):
        return np.real(np.einsum("ij,nji->n", op, self.states))

    def in_picture(self, picture, omega0):
        """Return the trajectory in another picture for H_S = w0 sz / 2."""
        if picture == self.picture:
            return self
        sign = -1.0 if picture == "schrodinger" else 1.0
        states = rotate_picture(self.states, self.times, omega0, sign)
        return Trajectory(self.times, states, self.solver, picture,
                          dict(self.options), dict(self.diagnostics))

    def rows(self):
        """Rows ``(t, re rho00, re rho01, im rho01, re rho11)``."""
        s = self.states
        return np.column_stack([self.times, s[:, 0, 0].real, s[:, 0, 1].real,
                                s[:, 0, 1].imag, s[:, 1, 1].real])


def rotate_picture(states, times, omega0, sign=-1.0):
    """Conjugate by ``exp(sign * i H_S t)`` with ``H_S = w0 sz / 2``.

    ``sign = -1`` maps interaction-picture states to the Schrodinger
    picture (``rho = U rho_I U^dag`` with ``U = exp(-i H_S t)``).
    """
    states = np.array(states, dtype=complex, copy=True)
    phase = np.exp(sign * 1j * omega0 * np.asarray(times))
    states[:, 0, 1] *= phase
    states[:, 1, 0] *= np.conj(phase)
    return states
