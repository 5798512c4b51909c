"""Bloch-Redfield and time-dependent Redfield (TCL2) generators.

With jump operators ``A(w)`` (``A(t) = sum_w exp(-i w t) A(w)`` in the
interaction picture) and kernels ``K(w, t) = int_0^t exp(i w s) <B(s)B(0)> ds``
the interaction-picture Redfield equation reads

    d rho / dt = sum_{w,w'} exp(i (w' - w) t) [G (A rho A'^dag - {A'^dag A, rho} / 2)
                 - i S [A'^dag A, rho]]

with ``A = A(w)``, ``A' = A(w')``, ``G = K(w, t) + conj K(w', t)`` and
``S = (K(w, t) - conj K(w', t)) / 2i``. The ``S`` part is the Lamb shift.
No secular approximation is made.
"""

import logging
from dataclasses import asdict

import numpy as np

from ..bath import half_fourier_kernel
from ..cumulant import jump_operators
from ..rates import FreqLabel
from ..trajectory import rotate_picture
from . import _liouville as lv
from .ode import OdeConfig, ode_integrate

__all__ = ["redfield_generator", "bloch_redfield", "redfield_td"]

log = logging.getLogger(__name__)


def _kernels(sys, bath, t):
    return {k: half_fourier_kernel(FreqLabel(k).frequency(sys.omega0), t, bath)
            for k in ("-", "+", "z")}


def redfield_generator(sys, bath, t, lamb_shift=False, kernels=None, rotating=True):
    """Redfield dissipator with kernels at time t.

    With ``rotating=True`` the phases ``exp(i (w' - w) t)`` of the
    interaction picture are included. Without them (and always for
    ``t = inf``) the result is the Schrodinger-picture dissipator.
    """
    ops = jump_operators(sys)
    K = kernels if kernels is not None else _kernels(sys, bath, t)
    L = np.zeros((4, 4), dtype=complex)
    for a, Aw in ops.items():
        if not np.any(Aw):
            continue
        w = FreqLabel(a).frequency(sys.omega0)
        for b, Awp in ops.items():
            if not np.any(Awp):
                continue
            wp = FreqLabel(b).frequency(sys.omega0)
            phase = 1.0 if (np.isinf(t) or not rotating) else np.exp(1j * (wp - w) * t)
            G = K[a] + np.conj(K[b])
            n = Awp.conj().T @ Aw
            L += phase * G * (lv.sandwich(Aw, Awp.conj().T) - 0.5 * lv.left(n)
                              - 0.5 * lv.right(n))
            if lamb_shift:
                S = (K[a] - np.conj(K[b])) / 2j
                L += phase * S * lv.commutator(n)
    return L


def bloch_redfield(sys, bath, lamb_shift=False):
    """Time-independent Schrodinger-picture Bloch-Redfield generator."""
    return lv.commutator(sys.hamiltonian) + redfield_generator(
        sys, bath, np.inf, lamb_shift)


def redfield_td(sys, bath, rho0, times, ode=None, lamb_shift=False,
                picture="schrodinger"):
    """Time-dependent Redfield evolution in the interaction picture.

    Returns
    -------
    Trajectory
        In the requested picture.
    """
    ode = ode or OdeConfig()
    times = np.asarray(times, dtype=float)

    def gen(t):
        return redfield_generator(sys, bath, t, lamb_shift)

    traj = ode_integrate(gen, rho0, times, ode, solver="redfield_td",
                         picture="interaction",
                         options={"lamb_shift": lamb_shift, "system": asdict(sys),
                                  "bath": asdict(bath)})
    if picture == "schrodinger":
        traj = traj.in_picture("schrodinger", sys.omega0)
    if traj.diagnostics["min_eigenvalue"] < -1e-10:
        # positivity violation of Redfield is an observable, not an error
        traj.diagnostics["positivity_violated"] = True
        log.info("redfield_td state not positive: min eigenvalue %.3e",
                 traj.diagnostics["min_eigenvalue"])
    return traj
