"""Shared adaptive Runge-Kutta stepper for linear master equations."""

from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, linalg, sparse

from ..trajectory import Trajectory

__all__ = ["OdeConfig", "OdeError", "integrate_linear", "ode_integrate", "propagate_static"]


class OdeError(RuntimeError):
    """Raised when the integrator fails; ``t`` is the time reached."""

    def __init__(self, message, t):
        super().__init__(f"{message} (t = {t:.6g})")
        self.t = t


@dataclass(frozen=True)
class OdeConfig:
    """Embedded Runge-Kutta settings.

    Parameters
    ----------
    method : str
        ``"DOP853"`` (8(5,3) Dormand-Prince) or ``"RK45"``.
    atol, rtol : float
    max_step : float
    """

    method: str = "DOP853"
    atol: float = 1e-11
    rtol: float = 1e-10
    max_step: float = np.inf

    def __post_init__(self):
        if self.method not in ("DOP853", "RK45"):
            raise ValueError(f"unsupported method {self.method!r}")
        if not (self.atol > 0 and self.rtol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


def integrate_linear(generator, y0, times, ode=None, components=None):
    """Integrate ``dy/dt = L(t) y`` and return y at ``times``.

    Parameters
    ----------
    generator : callable or matrix
        ``generator(t)`` returning a dense or sparse matrix, or a fixed
        matrix.
    y0 : array_like of complex
    times : array_like
        Sorted output times; the integration starts at ``times[0]``.
    ode : OdeConfig, optional
    components : array_like of int, optional
        Indices of y to keep at the output times (default all). Large
        systems such as HEOM only need a few of them.

    Returns
    -------
    ys : ndarray, shape (len(times), n_components)
    info : dict
        Number of right-hand-side evaluations.
    """
    ode = ode or OdeConfig()
    times = np.asarray(times, dtype=float)
    y0 = np.asarray(y0, dtype=complex)
    sel = slice(None) if components is None else np.asarray(components)
    L = None if callable(generator) else generator
    nfev = [0]

    def rhs(t, y):
        nfev[0] += 1
        return (generator(t) if L is None else L) @ y

    ys = np.empty((times.size, y0[sel].size), dtype=complex)
    ys[:] = y0[sel]
    if times.size == 1 or times[-1] == times[0]:
        return ys, {"nfev": 0}
    method = {"DOP853": integrate.DOP853, "RK45": integrate.RK45}[ode.method]
    stepper = method(rhs, times[0], y0, times[-1], max_step=ode.max_step,
                     rtol=ode.rtol, atol=ode.atol)
    k = int(np.searchsorted(times, times[0], side="right"))
    while k < times.size:
        msg = stepper.step()
        if stepper.status == "failed":
            raise OdeError(f"integration failed: {msg}", stepper.t)
        if times[k] <= stepper.t:
            # dense output of the last step serves every output time inside it
            interp = stepper.dense_output()
            while k < times.size and times[k] <= stepper.t:
                ys[k] = interp(times[k])[sel]
                k += 1
    return ys, {"nfev": nfev[0]}


def ode_integrate(generator, rho0, times, ode=None, solver="ode", picture="schrodinger",
                  options=None):
    """Evolve a density matrix under a Liouville generator.

    The generator acts on row-major vectorized states. Outputs are
    symmetrized; the removed anti-Hermitian part and the trace error are
    recorded in the diagnostics.

    Returns
    -------
    Trajectory
    """
    ode = ode or OdeConfig()
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted")
    ys, info = integrate_linear(generator, rho0.reshape(-1), times, ode)
    states = ys.reshape(-1, d, d)
    herm = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    drift = float(np.max(np.abs(states - herm)))
    tr = np.real(np.einsum("nii->n", herm))
    diag = {"hermiticity_drift": drift, "trace_drift": float(np.max(np.abs(tr - 1.0))),
            "nfev": info["nfev"]}
    diag.update(_min_eigenvalue(herm))
    opts = {"ode": asdict(ode)}
    opts.update(options or {})
    return Trajectory(times, herm, solver, picture, opts, diag)


def _min_eigenvalue(states):
    w = np.linalg.eigvalsh(states)
    idx = np.unravel_index(np.argmin(w), w.shape)
    return {"min_eigenvalue": float(w[idx])}


def propagate_static(L, rho0, times, solver="static", options=None):
    """Exact propagation ``vec(rho(t)) = exp(L t) vec(rho0)`` for constant L."""
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]
    times = np.asarray(times, dtype=float)
    if sparse.issparse(L):
        L = L.toarray()
    w, V = linalg.eig(L)
    # eigendecomposition is unreliable for defective generators
    if np.linalg.cond(V) < 1e8:
        c = linalg.solve(V, rho0.reshape(-1))
        ys = (V[None, :, :] * np.exp(np.multiply.outer(times, w))[:, None, :]) @ c
    else:
        ys = np.array([linalg.expm(L * t) @ rho0.reshape(-1) for t in times])
    states = ys.reshape(-1, d, d)
    states = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    diag = _min_eigenvalue(states)
    return Trajectory(times, states, solver, "schrodinger", dict(options or {}), diag)
