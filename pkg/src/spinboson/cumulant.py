"""Cumulant (refined weak coupling) dynamics of the non-equilibrium spin-boson qubit.

System Hamiltonian ``H_S = w0 sz / 2`` coupled through
``(f1 sx + f2 sy + f3 sz) x B``. The map is ``rho(t) = exp(K_t)[rho(0)]``
in the interaction picture with

``K_t[rho] = -i [Lambda(t), rho] + sum_{w,w'} Gamma(w, w', t) (A(w') rho A(w)^dag - {A(w)^dag A(w'), rho} / 2)``

and ``Lambda(t) = sum xi(w, w', t) A(w)^dag A(w')``. The Liouville matrix
built from this definition is the ground truth; the hand-written affine
generator of :func:`closed_form_generator` is a cross-check.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import interpolate

from .bath import BathParams, half_fourier_kernel, thermal_spectrum
from .bloch import (PAULI_ZXY, SIGMA_X, SIGMA_Y, SIGMA_Z, AffineGenerator,
                    exp_affine, pauli_state, pauli_vector)
from .rates import DEFAULT_ATOL, DEFAULT_RTOL, LABELS, FreqLabel, RateTable, rate_table
from .trajectory import Trajectory, rotate_picture

__all__ = [
    "SystemParams",
    "CumulantOptions",
    "jump_operators",
    "lamb_shift_hamiltonian",
    "build_superoperator",
    "project_generator",
    "closed_form_generator",
    "generator_at",
    "evolve",
    "steady_state",
    "asymptotic_table",
    "dephasing_coherence",
    "standard_sb_observables",
    "liouville_to_choi",
    "vec",
    "unvec",
]

log = logging.getLogger(__name__)

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_KEYS = tuple(lab.value for lab in LABELS)


@dataclass(frozen=True)
class SystemParams:
    """Qubit splitting and coupling components ``(f1, f2, f3)``."""

    omega0: float
    f1: float
    f2: float = 0.0
    f3: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be > 0")

    @property
    def f(self):
        return complex(self.f1, -self.f2)

    @property
    def hamiltonian(self):
        return 0.5 * self.omega0 * SIGMA_Z

    @property
    def coupling(self):
        return self.f1 * SIGMA_X + self.f2 * SIGMA_Y + self.f3 * SIGMA_Z

    def is_trivial(self):
        return self.f1 == 0 and self.f2 == 0 and self.f3 == 0


@dataclass(frozen=True)
class CumulantOptions:
    """Options of the cumulant solver.

    Parameters
    ----------
    include_lamb_shift : bool
        Add ``-i [Lambda(t), .]``.
    picture : str
        ``"schrodinger"`` or ``"interaction"`` for the output states.
    lamb_phase : bool
        Keep the phase ``exp(i (w - w') t / 2)`` of the xi integrals in
        Lambda(t). The closed-form affine generator drops it, see
        :func:`closed_form_generator`.
    atol, rtol : float
        Rate quadrature tolerances.
    interpolate_rates : bool
        Evaluate rates on ``n_knots`` nodes and spline them over t.
    n_knots : int
    interp_check_tol : float
        Maximal relative spline error accepted at the self-check times.
    seed : int
        Seed for the self-check times.
    """

    include_lamb_shift: bool = False
    picture: str = "schrodinger"
    lamb_phase: bool = True
    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL
    interpolate_rates: bool = False
    n_knots: int = 400
    interp_check_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.picture not in ("schrodinger", "interaction"):
            raise ValueError(f"unknown picture {self.picture!r}")


def jump_operators(sys):
    """Jump operators keyed by frequency label.

    ``A(w0) = conj(f) s-`` (label ``-``), ``A(-w0) = f s+`` (label ``+``)
    and ``A(0) = f3 sz`` (label ``z``) with ``f = f1 - i f2``.
    """
    f = sys.f
    return {
        "-": np.conj(f) * SIGMA_MINUS,
        "+": f * SIGMA_PLUS,
        "z": sys.f3 * SIGMA_Z,
    }


def vec(rho):
    """Row-major vectorization; ``vec(A X B) = kron(A, B.T) vec(X)``."""
    return np.asarray(rho).reshape(-1)


def unvec(v, d=2):
    return np.asarray(v).reshape(d, d)


def _left(a):
    return np.kron(a, _I2)


def _right(b):
    return np.kron(_I2, b.T)


def lamb_shift_hamiltonian(sys, table, phased=True):
    """Lambda(t) = sum_{ab} xi_ab A_a^dag A_b with the identity part removed.

    For real symmetric xi (``phased=False``) this reduces to
    ``(|f|^2/2)(xi_-- - xi_++) sz + f3 (xi_z+ - xi_z-)(f1 sx + f2 sy)``.
    """
    ops = jump_operators(sys)
    lam = np.zeros((2, 2), dtype=complex)
    for a in _KEYS:
        for b in _KEYS:
            x = table.xi_phased(a, b) if phased else table.xi[(a, b)]
            if x != 0:
                lam += x * ops[a].conj().T @ ops[b]
    lam -= 0.5 * np.trace(lam) * _I2
    return 0.5 * (lam + lam.conj().T)


def build_superoperator(sys, table, opts=None):
    """Liouville matrix of K_t acting on row-major vectorized states."""
    opts = opts or CumulantOptions()
    ops = jump_operators(sys)
    K = np.zeros((4, 4), dtype=complex)
    for a in _KEYS:
        adag = ops[a].conj().T
        for b in _KEYS:
            g = table.gamma[(a, b)]
            if g == 0:
                continue
            ab = adag @ ops[b]
            K += g * (np.kron(ops[b], adag.T) - 0.5 * _left(ab) - 0.5 * _right(ab))
    if opts.include_lamb_shift:
        lam = lamb_shift_hamiltonian(sys, table, phased=opts.lamb_phase)
        K += -1j * (_left(lam) - _right(lam))
    return K


def _apply(K, rho):
    return unvec(K @ vec(rho))


def project_generator(K, t=0.0, tol=1e-10):
    """Affine (M, r) representation of a trace-preserving Liouville matrix.

    ``K[I/2] = r . sigma`` and ``K[s_j] = sum_i M_ij s_i`` with the Pauli
    ordering (z, x, y).

    Raises
    ------
    ValueError
        If K does not preserve the trace.
    """
    K = np.asarray(K)
    trace_row = vec(_I2) @ K
    if np.max(np.abs(trace_row)) > tol * max(1.0, np.max(np.abs(K))):
        raise ValueError("generator is not trace preserving")
    r = np.array([0.5 * np.trace(s @ _apply(K, 0.5 * _I2)) for s in PAULI_ZXY])
    M = np.array([[0.5 * np.trace(si @ _apply(K, sj)) for sj in PAULI_ZXY]
                  for si in PAULI_ZXY])
    return AffineGenerator(np.real(M), np.real(r), t)


def closed_form_generator(sys, table, opts=None):
    """Affine generator written out in terms of the rate shorthand.

    With ``G = Gamma_-- + Gamma_++``, ``Gz- = f3 f (Gamma_-z - Gamma_z+)``,
    ``Gz+ = f3 f (Gamma_-z + Gamma_z+)``, ``xi = xi_++ - xi_--``,
    ``xiz = f3 (xi_z+ - xi_z-)`` and ``g = f^2 Gamma_-+``, in the ordering
    (z, x, y)::

        M = [[-|f|^2 G,        Re Gz+ - 2 f2 xiz,   -Im Gz+ + 2 f1 xiz],
             [Re Gz+ + 2 f2 xiz, -D + Re g,          -Im g + |f|^2 xi],
             [-Im Gz+ - 2 f1 xiz, -Im g - |f|^2 xi,   -D - Re g]]
        r = (|f|^2 (Gamma_++ - Gamma_--) / 2, Re Gz-, -Im Gz-)

    where ``D = |f|^2 G / 2 + 2 f3^2 Gamma_zz``. The xi are taken real and
    symmetric (no ``exp(i (w - w') t / 2)`` phase). This equals the
    projection of :func:`build_superoperator` with ``lamb_phase=False``.
    """
    opts = opts or CumulantOptions()
    g = table.gamma
    f = sys.f
    f1, f2, f3 = sys.f1, sys.f2, sys.f3
    af2 = abs(f) ** 2
    G = (g[("-", "-")] + g[("+", "+")]).real
    gzm = f3 * f * (g[("-", "z")] - g[("z", "+")])
    gzp = f3 * f * (g[("-", "z")] + g[("z", "+")])
    gmp = f ** 2 * g[("-", "+")]
    D = 0.5 * af2 * G + 2.0 * f3 ** 2 * g[("z", "z")].real
    if opts.include_lamb_shift:
        x = table.xi
        xi = x[("+", "+")] - x[("-", "-")]
        xiz = f3 * (x[("z", "+")] - x[("z", "-")])
    else:
        xi = xiz = 0.0
    M = np.array([
        [-af2 * G, gzp.real - 2 * f2 * xiz, -gzp.imag + 2 * f1 * xiz],
        [gzp.real + 2 * f2 * xiz, -D + gmp.real, -gmp.imag + af2 * xi],
        [-gzp.imag - 2 * f1 * xiz, -gmp.imag - af2 * xi, -D - gmp.real],
    ])
    r = np.array([0.5 * af2 * (g[("+", "+")] - g[("-", "-")]).real,
                  gzm.real, -gzm.imag])
    return AffineGenerator(M, r, table.t)


def asymptotic_table(sys, bath):
    """Long-time rate densities ``lim Gamma/t`` and ``lim xi/t``.

    The sinc products tend to ``2 pi t delta(w - nu)`` so only equal
    frequencies survive: ``Gamma_aa / t -> 2 pi S(w_a)`` and
    ``xi_aa / t -> P(w_a)``, the principal value of the spectrum.
    """
    g, x = {}, {}
    for a in _KEYS:
        wa = FreqLabel(a).frequency(sys.omega0)
        for b in _KEYS:
            if a == b:
                g[(a, b)] = complex(2.0 * np.pi * thermal_spectrum(wa, bath))
                x[(a, b)] = half_fourier_kernel(wa, np.inf, bath).imag
            else:
                g[(a, b)] = 0j
                x[(a, b)] = 0.0
    return RateTable(np.inf, sys.omega0, g, x, 0.0, bath)


def steady_state(sys, bath, opts=None):
    """Long-time state ``I/2 - (M^-1 r) . sigma`` from the asymptotic rates.

    Raises
    ------
    ValueError
        For pure dephasing (f1 = f2 = 0) where the asymptotic M is singular.
    """
    if sys.f1 == 0 and sys.f2 == 0:
        raise ValueError("pure dephasing has no unique steady state; use "
                         "dephasing_coherence for the exact solution")
    opts = opts or CumulantOptions()
    table = asymptotic_table(sys, bath)
    K = build_superoperator(sys, table, CumulantOptions(
        include_lamb_shift=opts.include_lamb_shift, lamb_phase=False))
    gen = project_generator(K)
    x = -2.0 * np.linalg.solve(gen.M, gen.r)
    return pauli_state(x)


def dephasing_coherence(t, f3, table):
    """Coherence factor ``exp(-2 f3^2 Gamma_zz(t))`` of pure dephasing."""
    if t == 0:
        return 1.0
    return float(np.exp(-2.0 * f3 ** 2 * table.gamma[("z", "z")].real))


def standard_sb_observables(t, table, x0):
    """Closed-form cumulant solution of the standard spin-boson model.

    Valid for ``f = (1, 0, 0)`` without Lamb shift, in the interaction
    picture. With ``G = Gamma_-- + Gamma_++`` and ``g = Gamma_-+``::

        <sz(t)> = exp(-G) <sz(0)> - (exp(-G) - 1)(Gamma_++ - Gamma_--) / G
        <s+(t)> = exp(-G/2) (cosh|g| <s+(0)> + conj(g)/|g| sinh|g| <s-(0)>)

    with ``<s+-> = Tr(s+- rho)``. For ``g = 0`` the coherences decay as
    ``exp(-G/2)``.

    Parameters
    ----------
    t : float
    table : RateTable
    x0 : tuple
        ``(<sz(0)>, <s+(0)>, <s-(0)>)``.

    Returns
    -------
    tuple of (float, complex, complex)
    """
    sz0, sp0, sm0 = x0
    if t == 0:
        return float(np.real(sz0)), complex(sp0), complex(sm0)
    gm = table.gamma
    G = (gm[("-", "-")] + gm[("+", "+")]).real
    d = (gm[("+", "+")] - gm[("-", "-")]).real
    eg = np.exp(-G)
    sz = eg * sz0 - (eg - 1.0) * d / G if G != 0 else sz0
    g = complex(gm[("-", "+")])
    a = abs(g)
    damp = np.exp(-0.5 * G)
    if a == 0:
        return float(np.real(sz)), damp * complex(sp0), damp * complex(sm0)
    ch, sh = np.cosh(a), np.sinh(a)
    sp = damp * (ch * sp0 + np.conj(g) / a * sh * sm0)
    sm = damp * (ch * sm0 + g / a * sh * sp0)
    return float(np.real(sz)), complex(sp), complex(sm)


def liouville_to_choi(L):
    """Choi matrix ``sum_ij |i><j| x E(|i><j|)`` of a row-major Liouville map."""
    d = int(round(np.sqrt(L.shape[0])))
    # L[(a,b),(i,j)] = <a|E(|i><j|)|b>; Choi[(i,a),(j,b)]
    return L.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def generator_at(sys, bath, t, opts=None):
    """Rate table, Liouville matrix and affine generator at time t."""
    opts = opts or CumulantOptions()
    table = rate_table(t, sys.omega0, bath, with_xi=opts.include_lamb_shift,
                       atol=opts.atol, rtol=opts.rtol, labels=active_labels(sys))
    K = build_superoperator(sys, table, opts)
    return table, K, project_generator(K, t)


def active_labels(sys):
    """Labels whose jump operator is nonzero."""
    return tuple(k for k, a in jump_operators(sys).items() if np.any(a != 0))


def _tables(sys, bath, opts, times, workers):
    ts = [float(t) for t in times]
    labels = active_labels(sys)
    if workers and workers > 1 and len(ts) > 1:
        chunks = np.array_split(np.arange(len(ts)), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_table_chunk, [ts[i] for i in c], sys.omega0, bath,
                                opts, labels) for c in chunks if len(c)]
            out = []
            for fu in futs:
                out.extend(fu.result())
        return out
    return _table_chunk(ts, sys.omega0, bath, opts, labels)


def _table_chunk(ts, omega0, bath, opts, labels=None):
    return [rate_table(t, omega0, bath, with_xi=opts.include_lamb_shift,
                       atol=opts.atol, rtol=opts.rtol, labels=labels) for t in ts]


def _interpolated_tables(sys, bath, opts, times, workers):
    tmax = float(np.max(times))
    knots = np.linspace(0.0, tmax, max(4, opts.n_knots))
    tabs = _tables(sys, bath, opts, knots, workers)
    keys = list(tabs[0].gamma)
    gvals = np.array([[tb.gamma[k] for k in keys] for tb in tabs])
    xvals = np.array([[tb.xi[k] for k in keys] for tb in tabs])
    gs = interpolate.CubicSpline(knots, gvals, axis=0)
    xs = interpolate.CubicSpline(knots, xvals, axis=0)

    def make(t):
        gv = gs(t)
        xv = xs(t)
        return RateTable(float(t), sys.omega0, dict(zip(keys, gv)),
                         dict(zip(keys, xv.real)), 0.0, bath)

    # accuracy self-check against direct evaluation
    rng = np.random.default_rng(opts.seed)
    worst = 0.0
    for t in rng.uniform(0.0, tmax, 3):
        direct = rate_table(t, sys.omega0, bath, with_xi=opts.include_lamb_shift,
                            atol=opts.atol, rtol=opts.rtol, labels=active_labels(sys))
        approx = make(t)
        scale = max(abs(v) for v in direct.gamma.values()) or 1.0
        for k in keys:
            worst = max(worst, abs(approx.gamma[k] - direct.gamma[k]) / scale,
                        abs(approx.xi[k] - direct.xi[k]) / scale)
    if worst > opts.interp_check_tol:
        raise RuntimeError(f"rate interpolation self-check failed: relative "
                           f"error {worst:.2e} > {opts.interp_check_tol:.1e}")
    return [make(t) for t in times], worst


def _clamp_state(rho, tol=1e-10):
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    if w.min() < -tol:
        raise ValueError(f"cumulant state not positive: eigenvalue {w.min():.3e}")
    if w.min() < 0:
        log.debug("clamping eigenvalue %.3e of cumulant state", w.min())
        w = np.clip(w, 0.0, None)
        rho = (v * w) @ v.conj().T
        rho /= np.trace(rho).real
        return rho, True
    return rho, False


def evolve(sys, bath, opts, rho0, times, workers=None):
    """Cumulant evolution ``rho(t) = exp(K_t)[rho0]`` on a time grid.

    Parameters
    ----------
    sys : SystemParams
    bath : BathParams
    opts : CumulantOptions or None
    rho0 : array_like, shape (2, 2)
    times : array_like
        Sorted, non-negative output times.
    workers : int, optional
        Number of processes used for the rate tables.

    Returns
    -------
    Trajectory
    """
    opts = opts or CumulantOptions()
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted and non-negative")
    rho0 = np.asarray(rho0, dtype=complex)
    x0 = pauli_vector(rho0)
    diag = {"clamped": 0, "max_rate_error": 0.0}
    if opts.interpolate_rates:
        tables, worst = _interpolated_tables(sys, bath, opts, times, workers)
        diag["interp_self_check"] = worst
    else:
        tables = _tables(sys, bath, opts, times, workers)
    states = np.empty((times.size, 2, 2), dtype=complex)
    for n, (t, table) in enumerate(zip(times, tables)):
        if t == 0:
            states[n] = rho0
            continue
        diag["max_rate_error"] = max(diag["max_rate_error"], table.error)
        gen = project_generator(build_superoperator(sys, table, opts), t)
        rho, clamped = _clamp_state(pauli_state(exp_affine(gen.M, gen.r, x0)))
        diag["clamped"] += int(clamped)
        states[n] = rho
    picture = "interaction"
    if opts.picture == "schrodinger":
        states = rotate_picture(states, times, sys.omega0, -1.0)
        picture = "schrodinger"
    options = asdict(opts)
    options.update(system=asdict(sys), bath=asdict(bath))
    return Trajectory(times, states, "cumulant", picture, options, diag)
