import logging
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from spinboson.bath import (TWO_POINT_SCALE, BathParams, MatsubaraConvergenceWarning,
                            bose_einstein, correlation_function, half_fourier_kernel,
                            matsubara_expansion, pade_expansion, spectral_density,
                            thermal_spectrum, two_point_function)

pos = st.floats(0.05, 20.0)


def test_params_validation():
    with pytest.raises(ValueError):
        BathParams(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        BathParams(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        BathParams(1.0, 1.0, 0.0)
    p = BathParams.from_ratios(0.25, 5.0, 4.0)
    assert p.lam == pytest.approx(1.25)


def test_spectral_density_values(bath_weak):
    assert spectral_density(0.0, bath_weak) == 0.0
    assert spectral_density(bath_weak.gamma, bath_weak) == pytest.approx(bath_weak.lam, rel=1e-15)


@given(w=st.floats(-50, 50), lam=pos, gam=pos)
def test_spectral_density_odd_and_positive(w, lam, gam):
    p = BathParams(lam, gam, 1.0)
    assert spectral_density(-w, p) == -spectral_density(w, p)
    if w > 0:
        assert spectral_density(w, p) > 0


def test_bose_einstein():
    assert bose_einstein(np.log(2.0), 1.0) == pytest.approx(1.0, rel=1e-15)
    assert bose_einstein(100.0, 1.0) < 1e-40
    nu = np.linspace(0.01, 30, 200)
    assert np.max(np.abs(2 * bose_einstein(nu, 0.7) + 1 - 1 / np.tanh(0.35 * nu))) < 1e-14 * 300
    with pytest.raises(ValueError):
        bose_einstein(0.0, 1.0)
    with pytest.raises(ValueError):
        bose_einstein(-1.0, 1.0)


@given(nu=st.floats(0.01, 30), beta=st.floats(0.05, 5))
def test_thermal_spectrum_detailed_balance(nu, beta):
    p = BathParams(0.1, 2.0, beta)
    ratio = thermal_spectrum(nu, p) / thermal_spectrum(-nu, p)
    assert ratio == pytest.approx(np.exp(beta * nu), rel=1e-12)


def test_thermal_spectrum_zero_limit(bath_weak):
    p = bath_weak
    s0 = 2 * p.lam / (p.beta * p.gamma)
    assert thermal_spectrum(0.0, p) == pytest.approx(s0, rel=1e-15)
    assert thermal_spectrum(1e-7, p) == pytest.approx(s0, rel=1e-6)
    assert np.isfinite(thermal_spectrum(-800.0, p))


def _oracle_c(t, p):
    # (1/pi) int_0^inf J [coth cos - i sin] by QUADPACK Fourier integrals
    def jc(w):
        return spectral_density(w, p) / np.tanh(0.5 * p.beta * w) if w > 0 else 2 * p.lam / (p.beta * p.gamma)

    re = integrate.quad(jc, 0, np.inf, weight="cos", wvar=t, limlst=200)[0]
    im = integrate.quad(lambda w: spectral_density(w, p), 0, np.inf, weight="sin", wvar=t,
                        limlst=200)[0]
    return (re - 1j * im) / np.pi


@pytest.mark.parametrize("t_gamma", [0.3, 1.0, 4.0])
def test_correlation_function_vs_quadrature(bath_weak, t_gamma):
    t = t_gamma / bath_weak.gamma
    c = correlation_function(t, bath_weak)
    ref = _oracle_c(t, bath_weak)
    assert abs(c - ref) / abs(ref) < 1e-6


@given(t=st.floats(0.01, 20.0))
def test_correlation_function_conjugation(t):
    p = BathParams.from_ratios(0.1, 2.0, 1.5)
    assert correlation_function(-t, p) == pytest.approx(np.conj(correlation_function(t, p)),
                                                        rel=1e-14, abs=0)


def test_correlation_function_diagnostics(bath_weak):
    val, info = correlation_function(0.5, bath_weak, full_output=True)
    assert info["converged"] and info["tail_estimate"] <= 1e-12
    assert np.isinf(correlation_function(0.0, bath_weak).real)
    with pytest.raises(ValueError):
        correlation_function(1.0, bath_weak, n_matsubara=0)
    with pytest.warns(MatsubaraConvergenceWarning):
        correlation_function(1e-3, bath_weak, tol=1e-30, max_terms=64)
    assert two_point_function(0.5, bath_weak) == pytest.approx(TWO_POINT_SCALE * val)


def test_high_temperature_limit():
    p = BathParams(0.3, 1.0, 0.01)
    c0 = matsubara_expansion(p, 8)(0.0)
    assert abs(c0.real / (2 * p.lam / p.beta) - 1) < 0.01


def test_low_temperature_warning(caplog):
    p = BathParams(0.1, 10.0, 10.0)
    with caplog.at_level(logging.WARNING, logger="spinboson.bath"):
        matsubara_expansion(p, 8)
    assert "beta*gamma" in caplog.text


@pytest.mark.parametrize("make", [matsubara_expansion, pade_expansion])
def test_expansions(bath_weak, make):
    exp = make(bath_weak, 8)
    assert np.all(exp.rates > 0)
    assert exp.amplitudes.size == 9
    t = np.array([0.2, 1.0, 3.0])
    ref = correlation_function(t, bath_weak)
    err = np.max(np.abs(exp(t) - ref) / np.abs(ref))
    # the terminator accounts for the zero-frequency weight of the dropped terms
    total = np.sum((exp.amplitudes / exp.rates).real) + exp.terminator
    assert total == pytest.approx(2 * bath_weak.lam / (bath_weak.beta * bath_weak.gamma), rel=1e-12)
    assert err < 0.05
    np.testing.assert_allclose(exp(-t), np.conj(exp(t)))
    scaled = exp.scaled(np.pi)
    np.testing.assert_allclose(scaled(t), np.pi * exp(t))


def test_pade_beats_matsubara():
    p = BathParams.from_ratios(0.25, 5.0, 4.0)
    t = np.linspace(0.2, 3.0, 30)
    ref = correlation_function(t, p)
    e_m = np.max(np.abs(matsubara_expansion(p, 8)(t) - ref))
    e_p = np.max(np.abs(pade_expansion(p, 8)(t) - ref))
    assert e_p < 0.01 * e_m


def test_expansion_rejects_bad_rates(bath_weak):
    exp = matsubara_expansion(bath_weak, 2)
    with pytest.raises(ValueError):
        type(exp)(exp.amplitudes, -exp.rates, 2)


@pytest.mark.parametrize("w", [-3.0, -1.0, 0.0, 1.0, 3.0])
def test_markov_kernel_real_part(bath_weak, w):
    k = half_fourier_kernel(w, np.inf, bath_weak)
    assert k.real == pytest.approx(np.pi * thermal_spectrum(w, bath_weak), rel=1e-10)


def test_markov_kernel_detailed_balance(bath_weak):
    kp = half_fourier_kernel(1.0, np.inf, bath_weak).real
    km = half_fourier_kernel(-1.0, np.inf, bath_weak).real
    assert kp / km == pytest.approx(np.exp(bath_weak.beta), rel=1e-10)


@pytest.mark.parametrize("t", [0.5, 2.0, 7.0])
def test_half_fourier_kernel_finite_t(bath_weak, t):
    w = 1.0

    def f(s, part):
        v = np.exp(1j * w * s) * two_point_function(s, bath_weak)
        return v.real if part == 0 else v.imag

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        re = integrate.quad(f, 0, t, args=(0,), limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        im = integrate.quad(f, 0, t, args=(1,), limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    k = half_fourier_kernel(w, t, bath_weak)
    assert abs(k - (re + 1j * im)) < 1e-9
