import dataclasses

import numpy as np
import pytest
from scipy import linalg

from spinboson.bath import BathParams
from spinboson.bloch import SIGMA_X, SIGMA_Y, SIGMA_Z, exp_affine, pauli_state, pauli_vector
from spinboson.cumulant import (CumulantOptions, SystemParams, active_labels,
                                build_superoperator, closed_form_generator, dephasing_coherence,
                                evolve, generator_at, jump_operators, lamb_shift_hamiltonian,
                                liouville_to_choi, project_generator, standard_sb_observables,
                                steady_state, unvec, vec)
from spinboson.rates import rate_table
from spinboson.refsolvers.dephasing import exact_dephasing

from .conftest import PLUS, random_state

GENERIC = SystemParams(1.0, 0.8, -0.5, 0.6)
BATH = BathParams.from_ratios(0.05, 5.0, 2.0)


def test_jump_operators():
    ops = jump_operators(GENERIC)
    f = complex(0.8, 0.5)
    sp = np.array([[0, 1], [0, 0]])
    np.testing.assert_allclose(ops["-"], np.conj(f) * sp.T)
    np.testing.assert_allclose(ops["+"], f * sp)
    np.testing.assert_allclose(ops["z"], 0.6 * SIGMA_Z)
    # A(w0) + A(-w0) + A(0) is the coupling operator
    np.testing.assert_allclose(sum(ops.values()), GENERIC.coupling, atol=1e-15)
    assert active_labels(SystemParams(1.0, 0, 0, 1)) == ("z",)
    assert active_labels(SystemParams(1.0, 1, 0, 0)) == ("-", "+")
    with pytest.raises(ValueError):
        SystemParams(0.0, 1.0)


def test_options_validation():
    with pytest.raises(ValueError):
        CumulantOptions(picture="heisenberg")


@pytest.mark.parametrize("t", [0.5, 3.0, 12.0])
def test_lamb_shift_reduces(t):
    tab = rate_table(t, 1.0, BATH)
    f1, f2, f3 = GENERIC.f1, GENERIC.f2, GENERIC.f3
    x = tab.xi
    af2 = f1 ** 2 + f2 ** 2
    expect = (0.5 * af2 * (x[("-", "-")] - x[("+", "+")]) * SIGMA_Z
              + f3 * (x[("z", "+")] - x[("z", "-")]) * (f1 * SIGMA_X + f2 * SIGMA_Y))
    np.testing.assert_allclose(lamb_shift_hamiltonian(GENERIC, tab, phased=False), expect,
                               atol=1e-15)
    lam = lamb_shift_hamiltonian(GENERIC, tab)
    np.testing.assert_allclose(lam, lam.conj().T)
    assert abs(np.trace(lam)) < 1e-15


def test_lamb_shift_definition():
    # sum_ab xi_ab A_a^dag A_b, trace removed
    tab = rate_table(2.0, 1.0, BATH)
    ops = jump_operators(GENERIC)
    full = sum(tab.xi_phased(a, b) * ops[a].conj().T @ ops[b] for a in "-+z" for b in "-+z")
    full = 0.5 * (full + full.conj().T)
    full -= 0.5 * np.trace(full) * np.eye(2)
    np.testing.assert_allclose(lamb_shift_hamiltonian(GENERIC, tab), full, atol=1e-15)


def _direct_generator(sys, tab, lamb):
    # K[rho] = sum_ab Gamma_ab (A_b rho A_a^dag - {A_a^dag A_b, rho}/2) - i[Lambda, rho]
    ops = jump_operators(sys)

    def K(rho):
        out = np.zeros((2, 2), dtype=complex)
        for a in "-+z":
            for b in "-+z":
                ad = ops[a].conj().T
                ab = ad @ ops[b]
                out += tab.gamma[(a, b)] * (ops[b] @ rho @ ad - 0.5 * (ab @ rho + rho @ ab))
        if lamb:
            h = lamb_shift_hamiltonian(sys, tab)
            out += -1j * (h @ rho - rho @ h)
        return out
    return K


@pytest.mark.parametrize("lamb", [False, True])
def test_superoperator_matches_direct(rng, lamb):
    tab = rate_table(1.7, 1.0, BATH)
    K = build_superoperator(GENERIC, tab, CumulantOptions(include_lamb_shift=lamb))
    direct = _direct_generator(GENERIC, tab, lamb)
    for _ in range(3):
        rho = random_state(rng)
        np.testing.assert_allclose(unvec(K @ vec(rho)), direct(rho), atol=1e-14)


@pytest.mark.parametrize("sys", [GENERIC, SystemParams(1.0, 1.0), SystemParams(1.0, 1.0, 0, 1.0),
                                 SystemParams(1.0, 0, 0, 1.0), SystemParams(2.0, 0.3, 1.2, -0.7)])
@pytest.mark.parametrize("t", [0.4, 2.5, 9.0])
@pytest.mark.parametrize("lamb", [False, True])
def test_closed_form_vs_projection(sys, t, lamb):
    tab = rate_table(t, sys.omega0, BATH)
    opts = CumulantOptions(include_lamb_shift=lamb, lamb_phase=False)
    proj = project_generator(build_superoperator(sys, tab, opts))
    closed = closed_form_generator(sys, tab, opts)
    np.testing.assert_allclose(closed.M, proj.M, rtol=0, atol=1e-12)
    np.testing.assert_allclose(closed.r, proj.r, rtol=0, atol=1e-12)


def test_generator_sign_resolution():
    """The resolved closed form and the two rejected readings.

    Rejected: Lambda with the opposite overall sign, and the zero
    frequency cross rate Gz+ built from the difference Gamma_-z - Gamma_z+.
    """
    tab = rate_table(2.5, 1.0, BATH)
    opts = CumulantOptions(include_lamb_shift=True, lamb_phase=False)
    proj = project_generator(build_superoperator(GENERIC, tab, opts))
    closed = closed_form_generator(GENERIC, tab, opts)
    assert np.max(np.abs(closed.M - proj.M)) < 1e-12

    flipped = dataclasses.replace(tab, xi={k: -v for k, v in tab.xi.items()})
    alt = closed_form_generator(GENERIC, flipped, opts)
    assert np.max(np.abs(alt.M - proj.M)) > 1e-3

    g = tab.gamma
    f, f3 = GENERIC.f, GENERIC.f3
    gzp_alt = f3 * f * (g[("-", "z")] - g[("z", "+")])
    assert abs(gzp_alt.real - proj.M[0, 1] - 2 * GENERIC.f2 * f3
               * (tab.xi[("z", "+")] - tab.xi[("z", "-")])) > 1e-3

    # the form with sz and cross terms written the other way round is minus the definition
    reversed_form = (0.5 * abs(f) ** 2 * (tab.xi[("+", "+")] - tab.xi[("-", "-")]) * SIGMA_Z
               + f3 * (tab.xi[("z", "-")] - tab.xi[("z", "+")])
               * (GENERIC.f1 * SIGMA_X + GENERIC.f2 * SIGMA_Y))
    np.testing.assert_allclose(reversed_form, -lamb_shift_hamiltonian(GENERIC, tab, phased=False),
                               atol=1e-15)


def test_lamb_phase_changes_generator():
    tab = rate_table(2.5, 1.0, BATH)
    a = build_superoperator(GENERIC, tab, CumulantOptions(True, lamb_phase=True))
    b = build_superoperator(GENERIC, tab, CumulantOptions(True, lamb_phase=False))
    assert np.max(np.abs(a - b)) > 1e-6
    # without the Lamb shift the phase plays no role
    c = build_superoperator(GENERIC, tab, CumulantOptions(False, lamb_phase=True))
    d = build_superoperator(GENERIC, tab, CumulantOptions(False, lamb_phase=False))
    np.testing.assert_array_equal(c, d)


@pytest.mark.parametrize("lamb", [False, True])
@pytest.mark.parametrize("t", [0.2, 4.0, 30.0])
def test_complete_positivity_and_trace(t, lamb):
    tab = rate_table(t, 1.0, BATH)
    K = build_superoperator(GENERIC, tab, CumulantOptions(include_lamb_shift=lamb))
    np.testing.assert_allclose(vec(np.eye(2)) @ K, 0, atol=1e-14)
    choi = liouville_to_choi(linalg.expm(K))
    np.testing.assert_allclose(choi, choi.conj().T, atol=1e-14)
    assert np.linalg.eigvalsh(choi).min() > -1e-12
    # the Choi matrix of the identity map is the unnormalized maximally entangled state
    phi = np.zeros(4)
    phi[[0, 3]] = 1
    np.testing.assert_allclose(liouville_to_choi(np.eye(4)), np.outer(phi, phi))


def test_project_rejects_non_trace_preserving():
    with pytest.raises(ValueError):
        project_generator(np.eye(4))


def test_gibbs_steady_state():
    sys = SystemParams(1.0, 1.0)
    bath = BathParams.from_ratios(0.01, 5.0, 2.0)
    rho = steady_state(sys, bath)
    H = sys.hamiltonian
    gibbs = linalg.expm(-bath.beta * H)
    gibbs /= np.trace(gibbs)
    np.testing.assert_allclose(rho, gibbs, atol=1e-12)
    # the half-angle form (I - tanh(beta w0 / 2) sz) / 2
    np.testing.assert_allclose(rho, 0.5 * (np.eye(2) - np.tanh(bath.beta / 2) * SIGMA_Z),
                               atol=1e-12)
    # independent of the Lamb shift for sx coupling
    np.testing.assert_allclose(steady_state(sys, bath, CumulantOptions(True)), gibbs, atol=1e-12)


def test_plus_tanh_state_is_anti_gibbs():
    bath = BathParams.from_ratios(0.01, 5.0, 2.0)
    anti = 0.5 * (np.eye(2) + np.tanh(bath.beta / 2) * SIGMA_Z)
    rho = steady_state(SystemParams(1.0, 1.0), bath)
    np.testing.assert_allclose(SIGMA_X @ anti @ SIGMA_X, rho, atol=1e-12)
    assert np.max(np.abs(anti - rho)) > 0.5


def test_composite_steady_state_has_coherence():
    rho = steady_state(SystemParams(1.0, 1.0, 0, 1.0), BathParams.from_ratios(0.01, 5.0, 2.0))
    assert np.all(np.linalg.eigvalsh(rho) > 0)
    assert abs(np.trace(rho) - 1) < 1e-14
    with pytest.raises(ValueError):
        steady_state(SystemParams(1.0, 0, 0, 1.0), BATH)


def test_standard_sb_closed_form():
    sys = SystemParams(1.0, 1.0)
    bath = BathParams.from_ratios(0.01, 5.0, 2.0)
    rho0 = np.array([[0.7, 0.2 - 0.3j], [0.2 + 0.3j, 0.3]])
    sp = np.array([[0, 1], [0, 0]])
    x0 = (np.trace(SIGMA_Z @ rho0).real, np.trace(sp @ rho0), np.trace(sp.T @ rho0))
    times = [0.0, 0.5, 3.0, 11.0]
    tr = evolve(sys, bath, CumulantOptions(picture="interaction"), rho0, times)
    for t, rho in zip(times, tr.states):
        sz, s_plus, s_minus = standard_sb_observables(t, rate_table(t, 1.0, bath), x0)
        assert sz == pytest.approx(np.trace(SIGMA_Z @ rho).real, abs=1e-9)
        assert abs(s_plus - np.trace(sp @ rho)) < 1e-9
        assert abs(s_minus - np.trace(sp.T @ rho)) < 1e-9


def test_dephasing_coherence(bath_dephasing):
    sys = SystemParams(1.0, 0, 0, 0.7)
    times = np.array([0.0, 0.3, 2.0])
    tr = evolve(sys, bath_dephasing, CumulantOptions(picture="interaction"), PLUS, times)
    for t, rho in zip(times, tr.states):
        exact = 0.5 * np.exp(-0.49 * exact_dephasing(bath_dephasing, t))
        assert abs(rho[0, 1] - exact) < 1e-10
        tab = rate_table(t, 1.0, bath_dephasing, labels=("z",))
        assert 0.5 * dephasing_coherence(t, 0.7, tab) == pytest.approx(exact.real, abs=1e-10)


def test_evolve_pictures_and_state_validity(rng):
    sys = SystemParams(1.0, 1.0, 0, 1.0)
    rho0 = random_state(rng)
    times = np.linspace(0, 4, 9)
    s = evolve(sys, BATH, CumulantOptions(picture="schrodinger"), rho0, times)
    i = evolve(sys, BATH, CumulantOptions(picture="interaction"), rho0, times)
    assert s.picture == "schrodinger" and i.picture == "interaction"
    np.testing.assert_allclose(i.in_picture("schrodinger", 1.0).states, s.states, atol=1e-15)
    np.testing.assert_allclose(s.states[0], rho0)
    for rho in s.states:
        assert np.linalg.eigvalsh(rho).min() >= -1e-12
        assert abs(np.trace(rho) - 1) < 1e-13
    assert s.diagnostics["max_rate_error"] < 1e-9
    assert s.options["system"]["f3"] == 1.0
    with pytest.raises(ValueError):
        evolve(sys, BATH, None, rho0, [1.0, 0.5])


def test_evolve_matches_generator(rng):
    sys = GENERIC
    rho0 = random_state(rng)
    opts = CumulantOptions(include_lamb_shift=True, picture="interaction")
    tr = evolve(sys, BATH, opts, rho0, [1.3])
    _, K, gen = generator_at(sys, BATH, 1.3, opts)
    np.testing.assert_allclose(tr.states[0], unvec(linalg.expm(K) @ vec(rho0)), atol=1e-13)
    np.testing.assert_allclose(pauli_vector(tr.states[0]),
                               exp_affine(gen.M, gen.r, pauli_vector(rho0)), atol=1e-13)


def test_workers_deterministic():
    sys = SystemParams(1.0, 1.0, 0, 1.0)
    times = np.linspace(0, 3, 7)
    a = evolve(sys, BATH, None, PLUS, times, workers=1)
    b = evolve(sys, BATH, None, PLUS, times, workers=2)
    np.testing.assert_array_equal(a.states, b.states)


def test_interpolated_rates():
    sys = SystemParams(1.0, 1.0, 0, 1.0)
    times = np.linspace(0, 10, 41)
    direct = evolve(sys, BATH, None, PLUS, times)
    opts = CumulantOptions(interpolate_rates=True, n_knots=200)
    fast = evolve(sys, BATH, opts, PLUS, times)
    assert fast.diagnostics["interp_self_check"] < 1e-6
    assert np.max(np.abs(fast.states - direct.states)) < 1e-6
    with pytest.raises(RuntimeError):
        evolve(sys, BATH, CumulantOptions(interpolate_rates=True, n_knots=8), PLUS, times)


def test_trivial_coupling_is_free_evolution():
    sys = SystemParams(1.0, 0.0)
    times = np.linspace(0, 2, 5)
    tr = evolve(sys, BATH, None, PLUS, times)
    np.testing.assert_allclose(tr.coherence, 0.5 * np.exp(-1j * times), atol=1e-15)
    np.testing.assert_allclose(pauli_state(pauli_vector(PLUS)), PLUS)
