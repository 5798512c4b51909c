"""Drude-Lorentz bath: spectral density, occupation and correlations.

Units are hbar = k_B = 1. Two normalizations of the bath correlation
function appear in the literature and both are used here:

* :func:`correlation_function` returns the Leggett/HEOM normalization
  ``C(t) = (1/pi) int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw``.
* The rate integrals of the cumulant equation, the Davies rates
  ``2 pi J(w) (n(w) + 1)`` and the exact dephasing exponent all assume the
  bath two-point function ``<B(t) B(0)> = pi * C(t)``. Every dynamical
  solver in this package uses :data:`TWO_POINT_SCALE` ``= pi`` times the
  expansions below so that all methods see the same environment.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "TWO_POINT_SCALE",
    "BathParams",
    "CorrelationExpansion",
    "MatsubaraConvergenceWarning",
    "spectral_density",
    "bose_einstein",
    "thermal_spectrum",
    "correlation_function",
    "two_point_function",
    "matsubara_expansion",
    "pade_expansion",
    "half_fourier_kernel",
]

log = logging.getLogger(__name__)

TWO_POINT_SCALE = np.pi


class MatsubaraConvergenceWarning(RuntimeWarning):
    """The Matsubara remainder estimate exceeds the requested tolerance."""


@dataclass(frozen=True)
class BathParams:
    """Drude-Lorentz bath parameters.

    Parameters
    ----------
    lam : float
        Reorganization energy lambda (>= 0).
    gamma : float
        Cutoff frequency (> 0).
    beta : float
        Inverse temperature (> 0).
    """

    lam: float
    gamma: float
    beta: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @classmethod
    def from_ratios(cls, lam_over_gamma, gamma, beta):
        return cls(lam=lam_over_gamma * gamma, gamma=gamma, beta=beta)


def spectral_density(omega, p):
    """J(w) = 2 lam gamma w / (gamma^2 + w^2); odd in w."""
    omega = np.asarray(omega, dtype=float)
    return 2.0 * p.lam * p.gamma * omega / (p.gamma ** 2 + omega ** 2)


def bose_einstein(nu, beta):
    """Bose-Einstein occupation 1 / (exp(beta nu) - 1) for nu > 0."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise ValueError("bose_einstein requires nu > 0")
    return 1.0 / np.expm1(beta * nu)


def thermal_spectrum(nu, p):
    """S(nu) = J(nu) (n(nu) + 1) on the whole real line.

    For negative arguments this equals J(|nu|) n(|nu|), i.e. the
    absorption branch. The function is smooth at nu = 0 where it takes
    the value 2 lam / (beta gamma).
    """
    nu = np.asarray(nu, dtype=float)
    x = p.beta * nu
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    # J(nu) / (1 - exp(-beta nu)), written through the regular part
    with np.errstate(over="ignore"):
        ratio = np.where(small, 1.0 + 0.5 * x, xs / -np.expm1(-xs))
    return 2.0 * p.lam * p.gamma / (p.beta * (p.gamma ** 2 + nu ** 2)) * ratio


def _leading_amplitude(p):
    return p.lam * p.gamma * (1.0 / math.tan(0.5 * p.beta * p.gamma) - 1j)


def _check_temperature(p):
    if p.beta * p.gamma > 50:
        log.warning("beta*gamma = %.3g > 50: the Matsubara expansion may need "
                    "more terms at this temperature", p.beta * p.gamma)


def correlation_function(t, p, n_matsubara=8, tol=1e-12, max_terms=200_000,
                         full_output=False):
    """Drude-Lorentz bath correlation function C(t).

    Uses the normalization ``(1/pi) int J [coth cos - i sin]``. The
    Matsubara series is summed with ``n_matsubara`` explicit terms (more
    if needed to meet ``tol``) plus an analytic remainder: the slowly
    converging ``1/nu_k`` part is resummed to a logarithm, and what is
    left beyond the explicit terms is evaluated with a midpoint
    Euler-Maclaurin integral.

    Parameters
    ----------
    t : float or array_like
        Time(s). Negative times use C(-t) = conj(C(t)).
    p : BathParams
    n_matsubara : int
        Minimum number of explicit Matsubara terms.
    tol : float
        Absolute tolerance on the truncation remainder.
    max_terms : int
        Cap on the explicit terms; beyond it a
        :class:`MatsubaraConvergenceWarning` is emitted.
    full_output : bool
        If True also return a dict with ``tail_estimate``, ``n_terms`` and
        ``converged``.

    Notes
    -----
    The real part diverges logarithmically at t = 0 for a Drude-Lorentz
    bath; C(0) is returned with an infinite real part.
    """
    if n_matsubara < 1:
        raise ValueError("n_matsubara must be >= 1")
    _check_temperature(p)
    t = np.asarray(t, dtype=float)
    s = np.abs(t)
    lam, gam, beta = p.lam, p.gamma, p.beta
    a = 2.0 * np.pi / beta
    b = gam / a
    amp = 4.0 * lam * gam / beta
    pref = amp * gam ** 2 / a ** 3

    # explicit terms needed for a midpoint remainder below tol
    def est(k):
        y = k + 0.5
        tail0 = 0.5 / y ** 2 * (1.0 + b ** 2 / y ** 2)
        return abs(pref) * (tail0 / (8.0 * y ** 2) + b ** 6 / (8.0 * y ** 8))

    n = max(int(n_matsubara), int(math.ceil(2.0 * b)) + 1)
    while est(n) > tol and n < max_terms:
        n = min(max_terms, 2 * n)
    converged = est(n) <= tol
    if not converged:
        warnings.warn(f"Matsubara remainder estimate {est(n):.3e} exceeds "
                      f"tolerance {tol:.1e}", MatsubaraConvergenceWarning,
                      stacklevel=2)

    flat = s.reshape(-1)
    k = np.arange(1, n + 1, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        # 1/nu_k part resummed: sum_k exp(-a k s) / (a k) = -log(1 - e^{-a s}) / a
        logpart = -np.log(-np.expm1(-a * flat)) / a
        term = np.exp(-a * np.outer(flat, k)) / (k * (k ** 2 - b ** 2))
        explicit = term.sum(axis=1)
        y = n + 0.5
        z = a * flat * y
        remainder = (special.expn(3, z) / y ** 2 + b ** 2 * special.expn(5, z) / y ** 4
                     + b ** 4 * special.expn(7, z) / y ** 6)
    c0 = _leading_amplitude(p)
    re = (c0.real * np.exp(-gam * flat) + amp * logpart
          + pref * (explicit + remainder))
    im = c0.imag * np.exp(-gam * flat)
    val = (re + 1j * im).reshape(s.shape)
    val = np.where(t < 0, np.conj(val), val)
    if val.ndim == 0:
        val = complex(val)
    if full_output:
        return val, {"tail_estimate": est(n), "n_terms": n, "converged": converged}
    return val


def two_point_function(t, p, **kwargs):
    """Bath two-point function <B(t)B(0)> = pi * C(t) used by the dynamics."""
    return TWO_POINT_SCALE * correlation_function(t, p, **kwargs)


@dataclass(frozen=True)
class CorrelationExpansion:
    """Finite exponential expansion ``C(t) ~ sum_k c_k exp(-nu_k t)``.

    Attributes
    ----------
    amplitudes : ndarray of complex
    rates : ndarray of float
        Decay rates, all positive.
    n_matsubara : int
        Number of terms beyond the leading Drude term.
    terminator : float
        ``sum_{k > n} c_k / nu_k`` of the discarded terms. The discarded
        part of the correlation function is approximately
        ``2 * terminator * delta(t)``.
    kind : str
        ``"matsubara"`` or ``"pade"``.
    scale : float
        Overall normalization factor already applied to the amplitudes.
    """

    amplitudes: np.ndarray
    rates: np.ndarray
    n_matsubara: int
    terminator: float = 0.0
    kind: str = "matsubara"
    scale: float = 1.0
    params: BathParams = field(default=None, compare=False)

    def __post_init__(self):
        if np.any(np.asarray(self.rates) <= 0):
            raise ValueError("all decay rates must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = np.abs(t)
        val = np.exp(-np.multiply.outer(s, self.rates)) @ self.amplitudes
        val = np.where(t < 0, np.conj(val), val)
        return complex(val) if val.ndim == 0 else val

    def scaled(self, factor):
        return CorrelationExpansion(
            self.amplitudes * factor, self.rates, self.n_matsubara,
            self.terminator * factor, self.kind, self.scale * factor, self.params)

    def half_fourier(self, omega, t=np.inf):
        """``int_0^t exp(i omega s) C(s) ds`` of the truncated expansion."""
        z = self.rates - 1j * omega
        if np.isinf(t):
            return complex(np.sum(self.amplitudes / z))
        return complex(np.sum(self.amplitudes * -np.expm1(-z * t) / z))


def matsubara_expansion(p, n_matsubara=8):
    """Matsubara expansion with ``n_matsubara`` terms beyond the Drude pole.

    Uses the normalization of :func:`correlation_function`; multiply by
    :data:`TWO_POINT_SCALE` (``expansion.scaled(TWO_POINT_SCALE)``) for the
    dynamics.
    """
    if n_matsubara < 0:
        raise ValueError("n_matsubara must be >= 0")
    _check_temperature(p)
    lam, gam, beta = p.lam, p.gamma, p.beta
    nu = 2.0 * np.pi * np.arange(1, n_matsubara + 1) / beta
    ck = 4.0 * lam * gam / beta * nu / (nu ** 2 - gam ** 2)
    amps = np.concatenate([[_leading_amplitude(p)], ck.astype(complex)])
    rates = np.concatenate([[gam], nu])
    # sum_{k>=0} Re(c_k / nu_k) = 2 lam / (beta gamma)
    total = 2.0 * lam / (beta * gam)
    term = total - float(np.sum((amps / rates).real))
    return CorrelationExpansion(amps, rates, n_matsubara, term, "matsubara", 1.0, p)


def _pade_poles(n):
    # poles and residues of the [n-1/n] Pade approximant of the Bose function
    def eps(m, offset):
        k = np.arange(2 * m - 1 if offset == 0 else 2 * m - 2)
        off = 1.0 / np.sqrt((2 * k + 5 + offset) * (2 * k + 3 + offset))
        mat = np.diag(off, 1) + np.diag(off, -1)
        ev = np.linalg.eigvalsh(mat)
        return -2.0 / ev[:m if offset == 0 else m - 1]

    e = eps(n, 0)
    chi = eps(n, 2) if n > 1 else np.array([])
    kappa = np.empty(n)
    pref = 0.5 * n * (2 * (n + 1) + 1)
    for j in range(n):
        term = pref
        for k in range(n - 1):
            term *= (chi[k] ** 2 - e[j] ** 2) / (e[k] ** 2 - e[j] ** 2 + (j == k))
        term /= e[n - 1] ** 2 - e[j] ** 2 + (j == n - 1)
        kappa[j] = term
    return kappa, e


def pade_expansion(p, n_pade=8):
    """Pade spectrum decomposition of the Drude-Lorentz correlation function.

    Same normalization as :func:`matsubara_expansion`. The leading Drude
    pole keeps its exact amplitude.
    """
    if n_pade < 1:
        raise ValueError("n_pade must be >= 1")
    lam, gam, beta = p.lam, p.gamma, p.beta
    kappa, e = _pade_poles(n_pade)
    nu = e / beta
    ck = (kappa / beta) * 4.0 * lam * gam * nu / (nu ** 2 - gam ** 2)
    amps = np.concatenate([[_leading_amplitude(p)], ck.astype(complex)])
    rates = np.concatenate([[gam], nu])
    total = 2.0 * lam / (beta * gam)
    term = total - float(np.sum((amps / rates).real))
    return CorrelationExpansion(amps, rates, n_pade, term, "pade", 1.0, p)


def half_fourier_kernel(omega, t, p, n_terms=400):
    """Half-sided transform ``int_0^t exp(i omega s) <B(s)B(0)> ds``.

    Computed from the Matsubara series in closed form, one exponential at
    a time, with the remaining terms beyond ``n_terms`` summed
    asymptotically (polygamma functions for the constant part, midpoint
    exponential integrals for the time-dependent part). ``t = inf`` gives
    the Markovian kernel whose real part is ``pi * S(omega)``.

    Uses the dynamics normalization (:data:`TWO_POINT_SCALE` included).
    """
    lam, gam, beta = p.lam, p.gamma, p.beta
    omega = float(omega)
    a = 2.0 * np.pi / beta
    amp = 4.0 * lam * gam / beta
    k = np.arange(1, n_terms + 1, dtype=float)
    nu = a * k
    ck = amp * nu / (nu ** 2 - gam ** 2)
    c0 = _leading_amplitude(p)
    z0 = gam - 1j * omega
    z = nu - 1j * omega
    y = n_terms + 0.5
    # c_k/(nu_k - i w) = amp [1/nu^2 + i w/nu^3 + (gam^2 - w^2)/nu^4 + ...]
    coef = np.array([1.0, 1j * omega, gam ** 2 - omega ** 2]) * amp / np.array([a ** 2, a ** 3, a ** 4])
    zeta_tail = np.array([special.polygamma(1, n_terms + 1),
                          -0.5 * special.polygamma(2, n_terms + 1),
                          special.polygamma(3, n_terms + 1) / 6.0])
    if np.isinf(t):
        val = c0 / z0 + np.sum(ck / z) + np.sum(coef * zeta_tail)
    else:
        t = float(t)
        if t <= 0:
            return 0j
        val = c0 * -np.expm1(-z0 * t) / z0 + np.sum(ck * -np.expm1(-z * t) / z)
        zt = a * t * y
        decay = np.array([special.expn(2, zt) / y, special.expn(3, zt) / y ** 2,
                          special.expn(4, zt) / y ** 3])
        val += np.sum(coef * (zeta_tail - np.exp(1j * omega * t) * decay))
    return complex(TWO_POINT_SCALE * val)
