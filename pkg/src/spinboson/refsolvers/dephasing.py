"""Exact pure-dephasing solution for the Drude-Lorentz bath.

For ``H = w0 sz / 2 + f3 sz B`` the populations are constant and

    rho_01(t) = exp(-i w0 t - f3^2 gamma(t)) rho_01(0)

with the decoherence exponent ``gamma(t)``. Two independent quadratures of
``gamma(t)`` are provided.
"""

import numpy as np
from scipy import integrate

from ..bath import thermal_spectrum
from ..quadrature import (QuadratureError, integrate_half_line, integrate_panels,
                          oscillatory_tail)
from ..trajectory import Trajectory

__all__ = ["exact_dephasing", "exact_dephasing_sinc", "exact_dephasing_trajectory"]


def _coth_j(w, p):
    # J(w) coth(beta w / 2) = S(w) + S(-w), smooth at w = 0
    return thermal_spectrum(w, p) + thermal_spectrum(-w, p)


def exact_dephasing(bath, t, epsabs=1e-14, epsrel=1e-12, full_output=False):
    """Decoherence exponent ``4 int_0^inf J coth(beta w/2) (1 - cos w t) / w^2 dw``.

    Adaptive QUADPACK quadrature in sinc form near the origin and the
    Fourier-weighted QAWO/QAWF rules for the ``cos`` part further out.

    Returns
    -------
    float, or (float, float) with the error estimate when ``full_output``
    """
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0 or bath.lam == 0:
        return (0.0, 0.0) if full_output else 0.0

    def near(w):
        # (1 - cos wt) / w^2 = (t^2 / 2) sinc^2(wt / 2)
        return 2.0 * t ** 2 * _coth_j(w, bath) * np.sinc(w * t / (2 * np.pi)) ** 2

    def far(w):
        return 4.0 * _coth_j(w, bath) / w ** 2

    cut = 60.0 * max(bath.gamma, 1.0 / bath.beta, 1.0 / t)
    # sinc form near the origin, Fourier-weighted QAWO/QAWF beyond w1
    w1 = min(cut, 20.0 * np.pi / t)
    n_osc = 20
    brk = np.linspace(0.0, w1, n_osc + 1)
    val, err = 0.0, 0.0
    for a, b in zip(brk[:-1], brk[1:]):
        v, e = integrate.quad(near, a, b, epsabs=epsabs / n_osc, epsrel=epsrel,
                              limit=200)
        val += v
        err += e
    v, e = integrate.quad(far, w1, np.inf, epsabs=epsabs, epsrel=epsrel, limit=400)
    val += v
    err += e
    if w1 < cut:
        v, e = integrate.quad(far, w1, cut, weight="cos", wvar=t, epsabs=epsabs,
                              epsrel=epsrel, limit=2000)
        val -= v
        err += e
    v, e = integrate.quad(far, cut, np.inf, weight="cos", wvar=t, epsabs=epsabs,
                          limlst=400)
    val -= v
    err += e
    if err > max(1e3 * epsabs, 1e-9 * abs(val)):
        raise QuadratureError("dephasing exponent did not converge", val, err)
    return (val, err) if full_output else val


def exact_dephasing_sinc(bath, t, atol=1e-14, rtol=1e-12, full_output=False):
    """The same exponent as ``2 t^2 int S(w) sinc^2(w t / 2) dw`` over the real line.

    Vectorized Gauss-Kronrod panels at the sinc zeros on a finite window;
    the right tail is split into a smooth part and an oscillatory part
    integrated by parts. The left tail is exponentially small and only
    enters the error.
    """
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0 or bath.lam == 0:
        return (0.0, 0.0) if full_output else 0.0
    scale = max(bath.gamma, 1.0 / bath.beta)
    hi = 80.0 * scale + 40.0 * np.pi / t
    lo = -(60.0 / bath.beta + 10.0 * bath.gamma)
    step = np.pi / t
    edges = np.unique(np.concatenate([np.arange(lo, hi, step), [hi], [0.0]]))

    def f(w):
        return thermal_spectrum(w, bath) * np.sinc(w * t / (2 * np.pi)) ** 2

    res = integrate_panels(f, edges, atol=atol / (2 * t ** 2), rtol=rtol)
    val, err = 2.0 * t ** 2 * res.value, 2.0 * t ** 2 * res.error

    # tail: 4 int S / w^2 - 4 Re int S exp(i w t) / w^2
    def g(w):
        return 4.0 * thermal_spectrum(w, bath) / w ** 2

    v1, e1 = integrate_half_line(g, hi)
    v2, e2 = oscillatory_tail(g, hi, t)
    val += v1 - v2.real
    err += e1 + e2
    # S(w) <= J(|w|) exp(-beta |w|) / (1 - exp(-beta |w|)) on the left
    err += 4.0 * bath.lam * np.exp(bath.beta * lo) / (bath.beta * bath.gamma * abs(lo))
    return (val, err) if full_output else val


def exact_dephasing_trajectory(bath, f3, omega0, rho0, times, picture="schrodinger",
                               method="sinc"):
    """Exact pure-dephasing trajectory from ``rho0``.

    ``method`` picks the quadrature of the exponent: ``"sinc"``
    (:func:`exact_dephasing_sinc`, about ten times faster) or
    ``"quadpack"`` (:func:`exact_dephasing`).
    """
    if method not in ("sinc", "quadpack"):
        raise ValueError(f"unknown method {method!r}")
    phi = exact_dephasing_sinc if method == "sinc" else exact_dephasing
    rho0 = np.asarray(rho0, dtype=complex)
    times = np.asarray(times, dtype=float)
    decay = np.array([np.exp(-f3 ** 2 * phi(bath, t)) for t in times])
    states = np.repeat(rho0[None], times.size, axis=0)
    phase = np.exp(-1j * omega0 * times) if picture == "schrodinger" else 1.0
    states[:, 0, 1] = rho0[0, 1] * decay * phase
    states[:, 1, 0] = np.conj(states[:, 0, 1])
    return Trajectory(times, states, "exact", picture,
                      {"f3": f3, "omega0": omega0, "method": method}, {})
