"""Davies-GKLS (secular Markovian) generator of the qubit."""

import numpy as np

from ..bath import thermal_spectrum
from ..cumulant import jump_operators
from . import _liouville as lv

__all__ = ["davies_rates", "davies_gkls"]


def davies_rates(sys, bath):
    """Rates ``2 pi S(w)`` of the three jump operators keyed by label.

    ``gamma(w0) = 2 pi J(w0)(n + 1)``, ``gamma(-w0) = 2 pi J(w0) n`` and
    ``gamma(0) = 4 pi lam / (beta gamma)``, so that the coherences of a
    pure-dephasing qubit decay at ``2 f3^2 gamma(0) = 8 pi lam f3^2 / (beta gamma)``.
    """
    w0 = sys.omega0
    return {"-": 2 * np.pi * float(thermal_spectrum(w0, bath)),
            "+": 2 * np.pi * float(thermal_spectrum(-w0, bath)),
            "z": 2 * np.pi * float(thermal_spectrum(0.0, bath))}


def davies_gkls(sys, bath):
    """Schrodinger-picture Liouville matrix ``-i[H_S, .] + D``.

    The Lamb shift is omitted.
    """
    ops = jump_operators(sys)
    rates = davies_rates(sys, bath)
    L = lv.commutator(sys.hamiltonian)
    for key, a in ops.items():
        if np.any(a):
            L = L + lv.dissipator(a, rates[key])
    return L
