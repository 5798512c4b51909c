import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinboson.bath import BathParams
from spinboson.cumulant import SystemParams
from spinboson.metrics import (compare, fidelity, fidelity_general, fidelity_series,
                               min_fidelity, nm_witness, nm_witness_from_trajectories,
                               trace_distance, trace_distance_series)
from spinboson.refsolvers.davies import davies_gkls
from spinboson.refsolvers.ode import propagate_static
from spinboson.trajectory import Trajectory

from .conftest import PLUS, random_state

seeds = st.integers(0, 2 ** 32 - 1)
NM_A = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
NM_B = np.array([[0.5, -0.5j], [0.5j, 0.5]])


def _pure(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_axioms(seed, ra, rb):
    rng = np.random.default_rng(seed)
    a, b = random_state(rng, rank=ra), random_state(rng, rank=rb)
    F, D = fidelity(a, b), trace_distance(a, b)
    assert 0 <= F <= 1 and 0 <= D <= 1
    assert F == pytest.approx(fidelity(b, a), abs=1e-12)
    assert D == pytest.approx(trace_distance(b, a), abs=1e-15)
    assert 1 - np.sqrt(F) <= D + 1e-10
    assert D <= np.sqrt(max(1 - F, 0)) + 1e-10
    assert fidelity(a, a) == pytest.approx(1, abs=1e-7)
    assert trace_distance(a, a) == 0
    assert F == pytest.approx(fidelity_general(a, b), abs=1e-7)


@given(seeds)
def test_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_state(rng) for _ in range(3))
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-14


def test_pure_states():
    psi, phi = [1, 0], [np.cos(0.3), np.exp(0.2j) * np.sin(0.3)]
    a, b = _pure(psi), _pure(phi)
    assert fidelity(a, b) == pytest.approx(np.cos(0.3) ** 2, rel=1e-12)
    assert trace_distance(a, b) == pytest.approx(np.sin(0.3), rel=1e-12)
    assert fidelity(_pure([1, 0]), _pure([0, 1])) == 0
    assert trace_distance(_pure([1, 0]), _pure([0, 1])) == pytest.approx(1)


def test_higher_dimension(rng):
    a, b = random_state(rng, 3), random_state(rng, 3)
    assert fidelity(a, b) == fidelity_general(a, b)
    assert 0 < fidelity(a, b) < 1
    assert fidelity_general(np.eye(3) / 3, np.eye(3) / 3) == pytest.approx(1)


def test_input_validation(caplog):
    with pytest.raises(ValueError, match="Hermitian"):
        fidelity(np.array([[0.5, 1], [0, 0.5]]), PLUS)
    with pytest.raises(ValueError, match="trace"):
        fidelity(np.eye(2), PLUS)
    with pytest.raises(ValueError, match="negative"):
        fidelity(np.diag([1.1, -0.1]), PLUS)
    with pytest.raises(ValueError, match="square"):
        fidelity_general(np.ones(3), PLUS)
    with pytest.raises(ValueError):
        trace_distance(np.array([[0, 1], [0, 0]]), PLUS)
    # tiny negative eigenvalues are clamped
    with caplog.at_level(logging.DEBUG, logger="spinboson.metrics"):
        assert fidelity(np.diag([1 + 1e-10, -1e-10]), np.diag([1.0, 0.0])) == pytest.approx(1)
    assert "clamping" in caplog.text


def _traj(states, times=None, name="x"):
    states = np.asarray(states)
    times = np.arange(len(states), dtype=float) if times is None else times
    return Trajectory(times, states, name)


def test_series_and_compare(rng):
    states = np.array([random_state(rng) for _ in range(6)])
    a = _traj(states)
    assert np.allclose(fidelity_series(a, a), 1, atol=1e-7)
    assert np.all(trace_distance_series(a, a) == 0)
    # time-shifted by one step
    b = _traj(np.concatenate([states[:1], states[:-1]]))
    res = compare(a, b)
    assert res.min_fidelity < 1
    i = int(np.argmin(res.fidelity[1:])) + 1
    assert res.argmin_time == a.times[i]
    assert res.annotations["valid"]
    assert res.rows().shape == (6, 3)
    assert min_fidelity(a, b) == (res.min_fidelity, res.argmin_time)
    np.testing.assert_allclose(res.fidelity, [fidelity(x, y) for x, y in zip(a.states, b.states)],
                               atol=1e-7)
    with pytest.raises(ValueError, match="grids"):
        compare(a, _traj(states, times=a.times + 0.1))


def test_compare_excludes_initial_time():
    a = _traj([np.diag([1.0, 0.0]), PLUS])
    b = _traj([np.diag([0.0, 1.0]), PLUS])
    res = compare(a, b)
    assert res.min_fidelity == pytest.approx(1) and res.argmin_time == 1.0


def test_compare_flags_negative_states():
    bad = np.array([[1.05, 0], [0, -0.05]], dtype=complex)
    res = compare(_traj([PLUS, bad]), _traj([PLUS, np.diag([1.0, 0.0])]))
    assert not res.annotations["valid"]
    assert res.annotations["min_eigenvalue"] == pytest.approx(-0.05)


def _davies_solver(params, rho0, times):
    sys, bath = params
    return propagate_static(davies_gkls(sys, bath), rho0, times)


def test_witness_davies_is_markovian():
    params = (SystemParams(1.0, 5.0, 0.0, 1.0), BathParams.from_ratios(0.01, 5.0, 1.0))
    times = np.linspace(0, 10, 2001)
    w = nm_witness(_davies_solver, params, NM_A, NM_B, times)
    assert not w.flag and w.measure == 0.0
    assert w.distance[0] == pytest.approx(1.0)
    assert np.all(np.diff(w.distance) <= 1e-12)


def test_witness_detects_revival():
    t = np.linspace(0, 2 * np.pi, 401)
    # distance 0.5 (1 + cos t) / 2 + ... built from diagonal states
    p = 0.5 * (1 + np.cos(t))
    a = _traj(np.array([np.diag([0.5 + x / 2, 0.5 - x / 2]) for x in p]), t)
    b = _traj(np.array([np.diag([0.5 - x / 2, 0.5 + x / 2]) for x in p]), t)
    w = nm_witness_from_trajectories(a, b)
    assert w.flag
    np.testing.assert_allclose(w.distance, p, atol=1e-12)
    # growth from 0 back to 1 over the second half period
    assert w.measure == pytest.approx(1.0, abs=1e-3)


def test_witness_validation(caplog):
    with pytest.raises(ValueError, match="uniform"):
        nm_witness(_davies_solver, None, NM_A, NM_B, [0.0, 1.0, 3.0])
    params = (SystemParams(1.0, 1.0), BathParams.from_ratios(0.01, 5.0, 1.0))
    with caplog.at_level(logging.WARNING, logger="spinboson.metrics"):
        nm_witness(_davies_solver, params, PLUS, PLUS, np.linspace(0, 1, 5))
    assert "orthogonal" in caplog.text
