"""Cumulant decay rates Gamma(w, w', t) and Lamb-shift integrals xi(w, w', t).

Both integrals are written on the whole real frequency line with the
smooth weight ``S(nu) = J(nu) (n(nu) + 1)`` (negative ``nu`` carries the
absorption branch ``J(|nu|) n(|nu|)``):

* ``Gamma = exp(i (w - w') t / 2) int S(nu) t^2 sinc((w - nu) t/2) sinc((w' - nu) t/2) dnu``
* ``xi = (1/2i) int S(nu) K(nu) dnu`` where ``K`` is the double time
  integral of ``sgn(t1 - t2) exp(i (w - nu) t1 - i (w' - nu) t2)`` over
  ``[0, t]^2``. ``K`` is the Hilbert transform of the sinc product kernel,
  so this is the principal-value definition of xi with the inner PV
  integral carried out analytically.

The finite part of the line is integrated with adaptive Gauss-Kronrod
panels no wider than half an oscillation period; the high-frequency tail
is split into a non-oscillating part (mapped Gauss-Legendre) and an
oscillating part (integration by parts).
"""

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .bath import BathParams, thermal_spectrum, two_point_function
from .quadrature import (QuadratureError, integrate_half_line,
                         integrate_panels, oscillatory_tail)

__all__ = [
    "FreqLabel",
    "LABELS",
    "RateTable",
    "RateResult",
    "gamma",
    "gamma_oracle",
    "xi",
    "xi_oracle",
    "rate_table",
    "QuadratureError",
]

DEFAULT_ATOL = 1e-14
DEFAULT_RTOL = 1e-11


class FreqLabel(str, enum.Enum):
    """Frequency labels: ``-`` for +w0, ``+`` for -w0 and ``z`` for 0."""

    MINUS = "-"
    PLUS = "+"
    ZERO = "z"

    def frequency(self, omega0):
        return {"-": omega0, "+": -omega0, "z": 0.0}[self.value]


LABELS = (FreqLabel.MINUS, FreqLabel.PLUS, FreqLabel.ZERO)


@dataclass(frozen=True)
class RateResult:
    value: complex
    error: float


def _sinc(x):
    return np.sinc(x / np.pi)


def _phi1(theta):
    # (exp(i theta) - 1) / (i theta) for real theta, without cancellation
    return _sinc(theta) + 0.5j * theta * _sinc(0.5 * theta) ** 2


def _dd2(x1, x2):
    """Second divided difference of exp at the nodes (0, i x1, i x2)."""
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    z1, z2 = 1j * x1, 1j * x2
    d1, d2, d12 = np.abs(x1), np.abs(x2), np.abs(x2 - x1)
    big = np.maximum(np.maximum(d1, d2), d12)
    out = np.empty(x1.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (np.exp(z1) * _phi1(x2 - x1) - _phi1(x1)) / z2
        b = (np.exp(z2) * _phi1(x1 - x2) - _phi1(x2)) / z1
        c = (_phi1(x2) - _phi1(x1)) / (z2 - z1)
    out = np.where(d2 == big, a, np.where(d1 == big, b, c))
    small = big < 1e-2
    if np.any(small):
        u, v = z1[small], z2[small]
        h1 = u + v
        h2 = u * u + u * v + v * v
        h3 = u ** 3 + u * u * v + u * v * v + v ** 3
        h4 = u ** 4 + u ** 3 * v + u * u * v * v + u * v ** 3 + v ** 4
        out[small] = 0.5 + h1 / 6 + h2 / 24 + h3 / 120 + h4 / 720
    return out


def _frequency_grid(omega, omega_p, t, p):
    """Panel edges covering the finite part of the frequency line."""
    w = max(abs(omega), abs(omega_p))
    lo = -(w + 45.0 / p.beta + 10.0 * p.gamma)
    hi = max(50.0 * p.gamma, abs(omega) + abs(omega_p) + 40.0 * np.pi / t,
             w + 45.0 / p.beta)
    scale = 0.25 * min(p.gamma, 1.0 / p.beta, np.pi / t)
    n_geo = int(math.ceil(math.log(max(hi, -lo) / scale) / math.log(1.5))) + 1
    geo = scale * 1.5 ** np.arange(n_geo)
    period = np.pi / t
    nu = np.concatenate([
        np.arange(0.0, hi, period), -np.arange(period, -lo, period),
        geo, -geo, [lo, hi, 0.0, omega, omega_p],
    ])
    nu = np.unique(nu[(nu >= lo) & (nu <= hi)])
    keep = np.concatenate([[True], np.diff(nu) > 1e-12 * (hi - lo)])
    return nu[keep], lo, hi


def _left_tail_bound(lo, omega, omega_p, t, p, kind):
    # |S(nu)| <= 2 lam gamma e^{-beta |nu|} / |nu| below lo; kernel is bounded
    x = -lo
    w = max(abs(omega), abs(omega_p))
    s = 2.0 * p.lam * p.gamma * math.exp(-p.beta * x) / (p.beta * x)
    if kind == "gamma":
        return s * 4.0 / (x - w) ** 2
    return s * (t / (x - w) + 1.0 / (x - w) ** 2)


def _line_integral(f, tail, edges, hi, t, atol, rtol, max_doublings=6):
    """Panel integral over ``edges`` plus the asymptotic tail beyond ``hi``.

    The tail expansion loses accuracy when the cutoff is low compared with
    the bath scales; while its error estimate exceeds half the tolerance the
    cutoff is doubled and the new stretch is added with panels.
    """
    res = integrate_panels(f, edges, atol=atol, rtol=rtol)
    panels, perr = res.value, res.error
    period = np.pi / t
    for _ in range(max_doublings + 1):
        tv, terr = tail(hi)
        tol = max(atol, rtol * abs(panels + tv))
        if terr <= 0.5 * tol:
            break
        new = np.unique(np.concatenate([np.arange(hi, 2.0 * hi, period), [2.0 * hi]]))
        ext = integrate_panels(f, new, atol=0.5 * atol, rtol=rtol)
        panels += ext.value
        perr += ext.error
        hi *= 2.0
    return panels + tv, perr + terr


def _gamma_full(omega, omega_p, t, p, atol, rtol):
    if t == 0 or p.lam == 0:
        return 0j, 0.0
    edges, lo, hi = _frequency_grid(omega, omega_p, t, p)
    h = 0.5 * t

    def f(nu):
        return (thermal_spectrum(nu, p) * _sinc((omega - nu) * h)
                * _sinc((omega_p - nu) * h)) * t * t

    delta = omega - omega_p
    phase = np.exp(0.5j * delta * t)

    def g(nu):
        return thermal_spectrum(nu, p) / ((nu - omega) * (nu - omega_p))

    def tail(x):
        non, non_err = integrate_half_line(g, x)
        osc1, e1 = oscillatory_tail(g, x, -t)
        osc2, e2 = oscillatory_tail(g, x, t)
        val = ((np.exp(1j * delta * t) + 1.0) * non
               - np.exp(1j * omega * t) * osc1 - np.exp(-1j * omega_p * t) * osc2)
        # the panel part is multiplied by the phase, undo it for the sum
        return val / phase, 2 * non_err + e1 + e2

    value, err = _line_integral(f, tail, edges, hi, t, atol, rtol)
    err += _left_tail_bound(lo, omega, omega_p, t, p, "gamma")
    return complex(phase * value), float(err)


def _check(value, err, atol, rtol, what):
    tol = max(atol, rtol * abs(value))
    # tails and panels carry separate estimates; allow a safety factor
    if err > 10 * tol:
        raise QuadratureError(
            f"{what} did not converge: error estimate {err:.3e} > {tol:.3e}",
            value, err)


def gamma(omega, omega_p, t, bath, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL,
          full_output=False):
    """Cumulant decay rate Gamma(w, w', t).

    Parameters
    ----------
    omega, omega_p : float
        Frequencies of the two jump operators.
    t : float
        Time, t >= 0.
    bath : BathParams
    atol, rtol : float
        Quadrature tolerances.
    full_output : bool
        Return a :class:`RateResult` with the error estimate instead of
        the bare value.

    Returns
    -------
    complex or RateResult

    Raises
    ------
    QuadratureError
        If the estimated error exceeds the tolerance.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    value, err = _gamma_full(float(omega), float(omega_p), float(t), bath, atol, rtol)
    _check(value, err, atol, rtol, "gamma")
    return RateResult(value, err) if full_output else value


def _xi_full(omega, omega_p, t, p, atol, rtol):
    if t == 0 or p.lam == 0:
        return 0j, 0.0
    edges, lo, hi = _frequency_grid(omega, omega_p, t, p)
    dt = (omega - omega_p) * t

    def f(nu):
        al = (omega - nu) * t
        bp = (omega_p - nu) * t
        kern = 2.0 * _dd2(al, np.full_like(al, dt)) - _phi1(al) * np.conj(_phi1(bp))
        return thermal_spectrum(nu, p) * kern * (t * t / 2j)

    phi = complex(_phi1(dt))

    def g_non(nu):
        return thermal_spectrum(nu, p) * (
            t * phi / (omega - nu)
            + (np.exp(1j * dt) - 1.0) / (2j * (nu - omega) * (nu - omega_p)))

    def g_osc(nu):
        return thermal_spectrum(nu, p) / (2j * (nu - omega) * (nu - omega_p))

    def tail(x):
        non, non_err = integrate_half_line(g_non, x)
        osc1, e1 = oscillatory_tail(g_osc, x, t)
        osc2, e2 = oscillatory_tail(g_osc, x, -t)
        val = non + np.exp(-1j * omega_p * t) * osc1 - np.exp(1j * omega * t) * osc2
        return val, non_err + e1 + e2

    value, err = _line_integral(f, tail, edges, hi, t, atol, rtol)
    err += _left_tail_bound(lo, omega, omega_p, t, p, "xi")
    return complex(value), float(err)


def xi(omega, omega_p, t, bath, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL,
       full_output=False):
    """Lamb-shift integral xi(w, w', t), real and symmetric in (w, w').

    This is the amplitude of

    ``(1/2i) int_0^t int_0^t sgn(t1 - t2) exp(i (w t1 - w' t2)) <B(t1 - t2) B(0)> dt1 dt2``

    with the phase ``exp(i (w - w') t / 2)`` removed. Equivalently
    ``(t^2 / 2 pi) int dphi sinc((w - phi) t/2) sinc((w' - phi) t/2) P(phi)``
    with ``P(phi) = PV int S(nu) / (phi - nu) dnu``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    omega, omega_p, t = float(omega), float(omega_p), float(t)
    full, err = _xi_full(omega, omega_p, t, bath, atol, rtol)
    value = (np.exp(-0.5j * (omega - omega_p) * t) * full)
    # the imaginary part vanishes analytically and measures the error
    err = max(err, abs(value.imag))
    _check(value.real, err, atol, rtol, "xi")
    return RateResult(value.real, err) if full_output else float(value.real)


def _e_window(delta, x):
    # int_0^x exp(i delta y) dy
    return x * _phi1(delta * x)


def _time_domain(omega, omega_p, t, p, sign, epsabs, epsrel):
    delta = omega - omega_p

    def integrand(u):
        c = complex(two_point_function(u, p))
        k = c * np.exp(1j * omega * u) + sign * np.conj(c) * np.exp(-1j * omega_p * u)
        return k * complex(_e_window(delta, t - u))

    kw = dict(limit=2000, epsabs=epsabs, epsrel=epsrel)
    # the log singularity of C at u = 0 is integrable; split off a short piece
    cut = min(t, 0.05 * t + 1e-3)
    parts = [(0.0, cut), (cut, t)] if cut < t else [(0.0, t)]
    re = im = 0.0
    err = 0.0
    for a, b in parts:
        r, er = integrate.quad(lambda u: integrand(u).real, a, b, **kw)
        i, ei = integrate.quad(lambda u: integrand(u).imag, a, b, **kw)
        re += r
        im += i
        err += er + ei
    return complex(re, im), err


def gamma_oracle(omega, omega_p, t, bath, epsabs=1e-15, epsrel=1e-11,
                 full_output=False):
    """Brute-force Gamma from its double time integral definition.

    ``int_0^t int_0^t exp(i (w t1 - w' t2)) <B(t1 - t2) B(0)> dt1 dt2``,
    evaluated in the time domain with the correlation function of
    :func:`spinboson.bath.two_point_function`. The integral over the
    square is reduced exactly to one dimension along ``s = t1 - t2`` and
    the remaining integral (log-singular at s = 0) is done by QUADPACK.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0 or bath.lam == 0:
        return RateResult(0j, 0.0) if full_output else 0j
    value, err = _time_domain(float(omega), float(omega_p), float(t), bath,
                              +1.0, epsabs, epsrel)
    return RateResult(value, err) if full_output else value


def xi_oracle(omega, omega_p, t, bath, epsabs=1e-15, epsrel=1e-11):
    """Time-domain evaluation of xi from its sgn-kernel definition."""
    if t == 0 or bath.lam == 0:
        return 0.0
    value, _ = _time_domain(float(omega), float(omega_p), float(t), bath,
                            -1.0, epsabs, epsrel)
    value = value / 2j * np.exp(-0.5j * (omega - omega_p) * t)
    return float(value.real)


@dataclass(frozen=True)
class RateTable:
    """Gamma and xi for every ordered pair of frequency labels at time t.

    Keys are pairs of label strings, e.g. ``("-", "z")`` for Gamma_{-z}.
    """

    t: float
    omega0: float
    gamma: dict
    xi: dict
    error: float = 0.0
    bath: BathParams = field(default=None, compare=False)

    def gamma_matrix(self):
        keys = [lab.value for lab in LABELS]
        return np.array([[self.gamma[(a, b)] for b in keys] for a in keys])

    def xi_phased(self, a, b):
        """xi with the phase exp(i (w_a - w_b) t / 2) restored."""
        wa = FreqLabel(a).frequency(self.omega0)
        wb = FreqLabel(b).frequency(self.omega0)
        return self.xi[(a, b)] * np.exp(0.5j * (wa - wb) * self.t)


@lru_cache(maxsize=32768)
def _table_cached(t, omega0, bath, with_xi, atol, rtol, labels):
    keys = [lab.value for lab in LABELS]
    freqs = [lab.frequency(omega0) for lab in LABELS]
    g, x = {}, {}
    err = 0.0
    for i, a in enumerate(keys):
        for j in range(i, 3):
            b = keys[j]
            if a not in labels or b not in labels:
                g[(a, b)] = g[(b, a)] = 0j
                x[(a, b)] = x[(b, a)] = 0.0
                continue
            res = gamma(freqs[i], freqs[j], t, bath, atol, rtol, full_output=True)
            g[(a, b)] = res.value
            g[(b, a)] = np.conj(res.value)
            err = max(err, res.error)
            if with_xi:
                rx = xi(freqs[i], freqs[j], t, bath, atol, rtol, full_output=True)
                x[(a, b)] = x[(b, a)] = rx.value
                err = max(err, rx.error)
            else:
                x[(a, b)] = x[(b, a)] = 0.0
        g[(a, a)] = complex(g[(a, a)].real, 0.0)
    return RateTable(float(t), float(omega0), g, x, err, bath)


def rate_table(t, omega0, bath, with_xi=True, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL,
               labels=None):
    """Fill all nine Gamma and xi entries at time t (memoized).

    Only the upper triangle is integrated; the lower triangle follows
    from Gamma_ab = conj(Gamma_ba) and xi_ab = xi_ba. ``labels`` restricts
    the integration to pairs of the given labels, other entries are zero
    (use it when a jump operator vanishes).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    all_labels = tuple(lab.value for lab in LABELS)
    labels = all_labels if labels is None else tuple(sorted(set(labels), key=all_labels.index))
    if set(labels) - set(all_labels):
        raise ValueError(f"unknown labels {labels}")
    return _table_cached(float(t), float(omega0), bath, bool(with_xi),
                         float(atol), float(rtol), labels)
