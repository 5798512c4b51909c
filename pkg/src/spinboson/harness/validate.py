"""Fast invariant checks run by ``spinboson validate``.

Each check returns ``(ok, detail)``; :func:`run_validation` runs them all.
"""

import numpy as np
from scipy import linalg

from ..bath import BathParams
from ..bloch import expm_phi1, sun_basis
from ..cumulant import CumulantOptions, SystemParams, build_superoperator, liouville_to_choi
from ..metrics import fidelity, fidelity_general, trace_distance
from ..rates import rate_table
from ..refsolvers.davies import davies_gkls
from ..refsolvers.redfield import bloch_redfield, redfield_generator

__all__ = ["random_state", "CHECKS", "run_validation"]


def random_state(rng, d=2, rank=None):
    """Random density matrix from a Ginibre matrix of the given rank."""
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def check_sun(rng):
    worst = 0.0
    for N in (2, 3, 4):
        m = sun_basis(N).stack()
        gram = np.einsum("aij,bji->ab", m, m)
        worst = max(worst, np.max(np.abs(gram - 2 * np.eye(N * N - 1))),
                    np.max(np.abs(np.einsum("aii->a", m))))
    return worst < 1e-12, f"max Gram/trace deviation {worst:.1e}"


def _phi1_series(M, n_terms=40):
    term = np.eye(M.shape[0])
    out = term.copy()
    for n in range(2, n_terms):
        term = term @ M / n
        out = out + term
    return out


def check_phi1(rng):
    worst = 0.0
    for _ in range(20):
        M = rng.normal(size=(3, 3)) * rng.uniform(0.01, 2)
        E, P = expm_phi1(M)
        scale = max(1.0, np.max(np.abs(E)))
        worst = max(worst, np.max(np.abs(M @ P + np.eye(3) - E)) / scale,
                    np.max(np.abs(E - linalg.expm(M))) / scale,
                    np.max(np.abs(P - _phi1_series(M))) / scale)
    return worst < 1e-10, f"max |M phi1(M) + I - exp(M)| {worst:.1e}"


def check_metrics(rng, n_pairs=1000):
    bad = 0
    worst = 0.0
    for _ in range(n_pairs):
        a = random_state(rng, rank=rng.integers(1, 3))
        b = random_state(rng, rank=rng.integers(1, 3))
        F, D = fidelity(a, b), trace_distance(a, b)
        ok = (0 <= F <= 1 + 1e-12 and 0 <= D <= 1 + 1e-12
              and abs(F - fidelity(b, a)) < 1e-10
              and 1 - np.sqrt(F) <= D + 1e-10 and D <= np.sqrt(max(1 - F, 0)) + 1e-10)
        worst = max(worst, abs(F - fidelity_general(a, b)))
        bad += not ok
    # sqrt(det) of a rank-one state amplifies rounding to ~sqrt(eps)
    return bad == 0 and worst < 1e-7, f"{bad} violating pairs, closed form vs general {worst:.1e}"


def _generators():
    bath = BathParams.from_ratios(0.05, 5.0, 2.0)
    for f in ((1, 0, 0), (1, 0.5, 0.5), (0, 0, 1)):
        sys = SystemParams(1.0, *f)
        tab = rate_table(3.0, 1.0, bath, with_xi=True)
        yield f"cumulant{f}", build_superoperator(sys, tab, CumulantOptions(True))
        yield f"davies{f}", davies_gkls(sys, bath)
        yield f"bloch_redfield{f}", bloch_redfield(sys, bath, lamb_shift=True)
        yield f"redfield_td{f}", redfield_generator(sys, bath, 3.0, lamb_shift=True)


def check_trace_preservation(rng):
    tr = np.eye(2).reshape(-1)
    worst = max(np.max(np.abs(tr @ np.asarray(L))) for _, L in _generators())
    return worst < 1e-12, f"max |Tr L| {worst:.1e}"


def check_cumulant_cp(rng):
    bath = BathParams.from_ratios(0.01, 5.0, 2.0)
    worst = np.inf
    for f in ((1, 0, 0), (1, 0, 1)):
        sys = SystemParams(1.0, *f)
        for t in (0.5, 2.0, 10.0):
            K = build_superoperator(sys, rate_table(t, 1.0, bath), CumulantOptions(True))
            w = np.linalg.eigvalsh(liouville_to_choi(linalg.expm(K)))
            worst = min(worst, w.min())
    return worst >= -1e-10, f"min Choi eigenvalue {worst:.1e}"


CHECKS = {
    "sun_orthonormality": check_sun,
    "phi1_identities": check_phi1,
    "metric_axioms": check_metrics,
    "trace_preservation": check_trace_preservation,
    "cumulant_complete_positivity": check_cumulant_cp,
}


def run_validation(seed=0, checks=None):
    """Run the checks, returning a list of ``(name, ok, detail)``."""
    out = []
    for name in checks or CHECKS:
        rng = np.random.default_rng(seed)
        try:
            ok, detail = CHECKS[name](rng)
        except Exception as exc:  # noqa: BLE001 - a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
