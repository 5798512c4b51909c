import numpy as np
import pytest
from scipy import linalg

from spinboson.bath import TWO_POINT_SCALE, BathParams, pade_expansion
from spinboson.cumulant import CumulantOptions, SystemParams, evolve
from spinboson.metrics import trace_distance_series
from spinboson.refsolvers.dephasing import exact_dephasing_trajectory
from spinboson.refsolvers.heom import (HeomConfig, HeomConvergenceError, heom_generator,
                                       heom_self_convergence, heom_solve, hierarchy_size)

from .conftest import PLUS

DEPH = SystemParams(1.0, 0, 0, 1.0)


def expansion_dephasing(bath, n_exp, times, terminator=True):
    """Exact coherence for a correlation function that *is* the finite expansion."""
    e = pade_expansion(bath, n_exp).scaled(TWO_POINT_SCALE)
    c, nu = e.amplitudes, e.rates
    t = np.asarray(times)[:, None]
    phi = 4 * np.real(np.sum(c * (t / nu + np.expm1(-nu * t) / nu ** 2), axis=1))
    if terminator:
        phi = phi + 4 * e.terminator * times
    return 0.5 * np.exp(-1j * times - phi)


def test_config_validation():
    with pytest.raises(ValueError):
        HeomConfig(n_matsubara=0)
    with pytest.raises(ValueError):
        HeomConfig(depth=0)
    with pytest.raises(ValueError):
        HeomConfig(expansion="fourier")
    assert hierarchy_size(9, 8) == 24310


def test_max_ados(bath_weak):
    with pytest.raises(ValueError, match="max_ados"):
        heom_generator(DEPH, bath_weak, HeomConfig(8, 8, max_ados=1000))


def test_generator_structure(bath_weak):
    L, labels, exp = heom_generator(SystemParams(1.0, 1.0), bath_weak, HeomConfig(2, 3))
    assert len(labels) == hierarchy_size(3, 3)
    assert labels[0] == (0, 0, 0) and L.shape == (4 * len(labels),) * 2
    assert all(sum(n) <= 3 for n in labels)
    # the system block is trace preserving on its own
    tr = np.eye(2).reshape(-1)
    assert np.max(np.abs(tr @ L[:4, :4].toarray())) < 1e-14


def test_free_evolution():
    bath = BathParams(0.0, 5.0, 2.0)
    times = np.linspace(0, 3, 7)
    tr = heom_solve(SystemParams(1.0, 1.0), bath, HeomConfig(2, 2), PLUS, times)
    np.testing.assert_allclose(tr.coherence, 0.5 * np.exp(-1j * times), atol=1e-9)


@pytest.mark.parametrize("n_exp,terminator", [(2, True), (3, False), (6, True)])
def test_depth_convergence_to_expansion_oracle(n_exp, terminator):
    bath_dephasing = BathParams.from_ratios(0.05, 5.0, 4.0)
    times = np.linspace(0, 4, 41)
    ref = expansion_dephasing(bath_dephasing, n_exp, times, terminator)
    assert np.all(np.isfinite(ref))
    errs = []
    for depth in (2, 4, 6):
        cfg = HeomConfig(n_exp, depth, "pade", terminator)
        tr = heom_solve(DEPH, bath_dephasing, cfg, PLUS, times)
        errs.append(np.max(np.abs(tr.coherence - ref)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_weak_coupling_dephasing_vs_exact():
    bath = BathParams.from_ratios(0.01, 5.0, 2.0)
    times = np.linspace(0, 5, 26)
    ex = exact_dephasing_trajectory(bath, 1.0, 1.0, PLUS, times)
    # the error is set by the expansion, not the depth
    errs = [np.max(np.abs(heom_solve(DEPH, bath, HeomConfig(nk, 4, "pade", True), PLUS,
                                     times).coherence - ex.coherence)) for nk in (2, 4, 8)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 5e-5
    tr = heom_solve(DEPH, bath, HeomConfig(8, 4, "pade", True), PLUS, times)
    assert tr.diagnostics["trace_drift"] < 1e-10


def test_pruning_is_exact(bath_weak):
    # integrate the full hierarchy and compare with the pruned one
    sys = SystemParams(1.0, 0, 0, 1.0)
    cfg = HeomConfig(2, 3, "pade", True)
    times = np.array([0.0, 0.7, 1.5])
    tr = heom_solve(sys, bath_weak, cfg, PLUS, times)
    assert tr.diagnostics["dim_integrated"] < tr.diagnostics["dim"]
    L, _, _ = heom_generator(sys, bath_weak, cfg)
    y0 = np.zeros(L.shape[0], dtype=complex)
    y0[:4] = PLUS.reshape(-1)
    full = np.array([linalg.expm(L.toarray() * t) @ y0 for t in times])[:, :4]
    np.testing.assert_allclose(tr.states.reshape(-1, 4), full, atol=1e-9)


def test_heom_vs_cumulant_very_weak_coupling():
    bath = BathParams.from_ratios(1e-4, 5.0, 2.0)
    sys = SystemParams(1.0, 1.0)
    times = np.linspace(0, 10, 21)
    h = heom_solve(sys, bath, HeomConfig(8, 2, "pade", True), PLUS, times)
    c = evolve(sys, bath, CumulantOptions(include_lamb_shift=True), PLUS, times)
    d = trace_distance_series(h, c)
    assert d.max() < 1e-5
    assert d.max() > 0


def test_self_convergence(bath_weak):
    times = np.linspace(0, 2, 5)
    cfg = HeomConfig(2, 2, "pade", True)
    tr, report = heom_self_convergence(DEPH, bath_weak, cfg, PLUS, times, tol=1e-3)
    assert set(report) == {"depth"} and tr.diagnostics["self_convergence"] == report
    with pytest.raises(HeomConvergenceError):
        heom_self_convergence(DEPH, BathParams.from_ratios(0.5, 5.0, 4.0), HeomConfig(2, 1),
                              PLUS, times, tol=1e-12, refine=("depth", "n_matsubara"))
    with pytest.raises(ValueError):
        heom_self_convergence(DEPH, bath_weak, cfg, PLUS, times, refine=("time",))
