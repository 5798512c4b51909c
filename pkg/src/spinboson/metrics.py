"""Fidelity, trace distance and the trace-distance non-Markovianity witness."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

__all__ = [
    "ComparisonResult",
    "fidelity",
    "fidelity_general",
    "trace_distance",
    "fidelity_series",
    "trace_distance_series",
    "compare",
    "min_fidelity",
    "NMWitness",
    "nm_witness",
    "nm_witness_from_trajectories",
]

log = logging.getLogger(__name__)

_PSD_TOL = 1e-8


def _as_state(rho, name, tol=_PSD_TOL):
    """Hermitian part of rho with tiny negative eigenvalues clamped.

    Returns the state and whether it was clamped.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise ValueError(f"{name} is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValueError(f"{name} does not have unit trace")
    w, v = np.linalg.eigh(rho)
    if w.min() < -tol:
        raise ValueError(f"{name} has negative eigenvalue {w.min():.3e}")
    if w.min() < 0:
        log.debug("clamping eigenvalue %.3e of %s for metric evaluation", w.min(), name)
        w = np.clip(w, 0.0, None)
        return (v * w) @ v.conj().T / w.sum(), True
    return rho, False


def fidelity_general(rho, sigma):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`` by eigendecomposition."""
    rho, _ = _as_state(rho, "rho")
    sigma, _ = _as_state(sigma, "sigma")
    w, v = np.linalg.eigh(rho)
    sq = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sq @ sigma @ sq
    ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.clip(np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2, 0.0, 1.0))


def fidelity(rho, sigma):
    """Uhlmann fidelity; qubits use ``Tr(rho sigma) + 2 sqrt(det rho det sigma)``."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        return fidelity_general(rho, sigma)
    rho, _ = _as_state(rho, "rho")
    sigma, _ = _as_state(sigma, "sigma")
    overlap = np.trace(rho @ sigma).real
    det = max(np.linalg.det(rho).real, 0.0) * max(np.linalg.det(sigma).real, 0.0)
    return float(np.clip(overlap + 2.0 * np.sqrt(det), 0.0, 1.0))


def trace_distance(rho, sigma):
    """Half the trace norm of ``rho - sigma``."""
    d = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    if np.max(np.abs(d - d.conj().T)) > 1e-8:
        raise ValueError("inputs must be Hermitian")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def _qubit_fidelity_series(a, b):
    a = 0.5 * (a + np.conj(np.swapaxes(a, 1, 2)))
    b = 0.5 * (b + np.conj(np.swapaxes(b, 1, 2)))
    overlap = np.einsum("nij,nji->n", a, b).real
    da = np.clip(np.linalg.det(a).real, 0.0, None)
    db = np.clip(np.linalg.det(b).real, 0.0, None)
    return np.clip(overlap + 2.0 * np.sqrt(da * db), 0.0, 1.0)


def _check_grids(a, b):
    if a.times.shape != b.times.shape or np.max(np.abs(a.times - b.times), initial=0) > 1e-12:
        raise ValueError("trajectories are on different time grids")


def fidelity_series(a, b):
    """Pointwise fidelity of two trajectories on the same grid."""
    _check_grids(a, b)
    if a.states.shape[1] == 2:
        return _qubit_fidelity_series(a.states, b.states)
    return np.array([fidelity(x, y) for x, y in zip(a.states, b.states)])


def trace_distance_series(a, b):
    _check_grids(a, b)
    d = a.states - b.states
    d = 0.5 * (d + np.conj(np.swapaxes(d, 1, 2)))
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(d)), axis=1)


@dataclass
class ComparisonResult:
    """Pointwise comparison of a trajectory with a reference."""

    times: np.ndarray
    fidelity: np.ndarray
    trace_distance: np.ndarray
    min_fidelity: float
    argmin_time: float
    annotations: dict = field(default_factory=dict)

    def rows(self):
        return np.column_stack([self.times, self.fidelity, self.trace_distance])


def _negativity(traj):
    return float(np.min(np.linalg.eigvalsh(traj.states)))


def compare(traj, ref):
    """Fidelity and trace distance of ``traj`` against ``ref``.

    States with negative eigenvalues (possible for Redfield) are flagged in
    the annotations; the fidelity formula is evaluated with clamped
    determinants.
    """
    _check_grids(traj, ref)
    fid = fidelity_series(traj, ref)
    td = trace_distance_series(traj, ref)
    mask = traj.times > 0
    if np.any(mask):
        i = int(np.flatnonzero(mask)[np.argmin(fid[mask])])
    else:
        i = 0
    notes = {"min_eigenvalue": _negativity(traj), "ref_min_eigenvalue": _negativity(ref)}
    notes["valid"] = notes["min_eigenvalue"] >= -1e-10 and notes["ref_min_eigenvalue"] >= -1e-10
    return ComparisonResult(traj.times, fid, td, float(fid[i]), float(traj.times[i]), notes)


def min_fidelity(a, b):
    """Minimum pointwise fidelity over the grid, excluding ``t = 0``.

    Returns
    -------
    value, time
    """
    res = compare(a, b)
    return res.min_fidelity, res.argmin_time


@dataclass
class NMWitness:
    """Trace-distance growth between two evolutions.

    Attributes
    ----------
    times : ndarray
    distance : ndarray
    derivative : ndarray
        Central differences of the distance (one-sided at the ends).
    flag : bool
        True iff the derivative exceeds ``eps`` somewhere.
    measure : float
        Integral of the positive part of the derivative.
    eps : float
    """

    times: np.ndarray
    distance: np.ndarray
    derivative: np.ndarray
    flag: bool
    measure: float
    eps: float


def nm_witness_from_trajectories(a, b, eps=1e-8):
    _check_grids(a, b)
    dist = trace_distance_series(a, b)
    deriv = np.gradient(dist, a.times)
    pos = np.clip(deriv, 0.0, None)
    measure = float(np.trapezoid(pos, a.times)) if a.times.size > 1 else 0.0
    return NMWitness(a.times, dist, deriv, bool(np.any(deriv > eps)), measure, eps)


def nm_witness(solver, params, rho0a, rho0b, times, eps=1e-8):
    """Trace-distance witness of non-Markovianity.

    Parameters
    ----------
    solver : callable
        ``solver(params, rho0, times)`` returning a Trajectory.
    params : object
        Passed through to ``solver``.
    rho0a, rho0b : array_like
        Orthogonal initial states.
    times : array_like
        Uniform grid.
    eps : float
        Threshold on the derivative.

    Returns
    -------
    NMWitness
    """
    rho0a = np.asarray(rho0a, dtype=complex)
    rho0b = np.asarray(rho0b, dtype=complex)
    if abs(np.trace(rho0a @ rho0b)) > 1e-10:
        log.warning("nm_witness initial states are not orthogonal")
    times = np.asarray(times, dtype=float)
    if times.size > 2 and np.ptp(np.diff(times)) > 1e-9 * np.max(np.diff(times)):
        raise ValueError("nm_witness needs a uniform time grid")
    a = solver(params, rho0a, times)
    b = solver(params, rho0b, times)
    return nm_witness_from_trajectories(a, b, eps)
