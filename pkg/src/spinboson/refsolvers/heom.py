"""Hierarchical equations of motion for the Drude-Lorentz bath.

The two-point function is expanded as ``<B(t)B(0)> = sum_k c_k exp(-nu_k t)``
with real ``nu_k``. With ``Q = f1 sx + f2 sy + f3 sz`` the auxiliary density
operators (ADOs) ``rho_n``, labelled by multi-indices ``n`` with
``|n| <= depth``, obey

    d rho_n = -i [H_S, rho_n] - sum_k n_k nu_k rho_n - i sum_k [Q, rho_{n+e_k}]
              - i sum_k n_k (c_k Q rho_{n-e_k} - conj(c_k) rho_{n-e_k} Q)

and ``rho_0`` is the system state. The optional terminator adds
``-D [Q, [Q, rho_n]]`` to every ADO with ``D`` the weight of the discarded
exponentials.
"""

import itertools
import logging
from dataclasses import asdict, dataclass, field, replace
from math import comb

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ..bath import TWO_POINT_SCALE, matsubara_expansion, pade_expansion
from ..trajectory import Trajectory
from . import _liouville as lv
from .ode import OdeConfig, integrate_linear

__all__ = ["HeomConfig", "HeomConvergenceError", "heom_generator", "heom_solve",
           "heom_self_convergence", "hierarchy_size"]

log = logging.getLogger(__name__)


class HeomConvergenceError(RuntimeError):
    """The hierarchy did not converge under refinement."""


@dataclass(frozen=True)
class HeomConfig:
    """Hierarchy settings.

    Parameters
    ----------
    n_matsubara : int
        Exponentials beyond the Drude term.
    depth : int
        Maximal total excitation ``|n|`` of an ADO.
    expansion : str
        ``"matsubara"`` or ``"pade"``.
    terminator : bool
        Add the white-noise correction of the discarded exponentials.
    ode : OdeConfig
    max_ados : int
        Resource bound on the hierarchy size.
    """

    n_matsubara: int = 8
    depth: int = 8
    expansion: str = "matsubara"
    terminator: bool = False
    ode: OdeConfig = field(default_factory=lambda: OdeConfig(atol=1e-10, rtol=1e-9))
    max_ados: int = 200_000

    def __post_init__(self):
        if self.n_matsubara < 1 or self.depth < 1:
            raise ValueError("n_matsubara and depth must be >= 1")
        if self.expansion not in ("matsubara", "pade"):
            raise ValueError(f"unknown expansion {self.expansion!r}")


def hierarchy_size(n_exp, depth):
    return comb(n_exp + depth, depth)


def _multi_indices(n_exp, depth):
    # all n with |n| <= depth, ordered by level
    out = []
    for level in range(depth + 1):
        for c in itertools.combinations_with_replacement(range(n_exp), level):
            n = [0] * n_exp
            for k in c:
                n[k] += 1
            out.append(tuple(n))
    return out


def _expansion(bath, cfg):
    if cfg.expansion == "pade":
        exp = pade_expansion(bath, cfg.n_matsubara)
    else:
        exp = matsubara_expansion(bath, cfg.n_matsubara)
    return exp.scaled(TWO_POINT_SCALE)


def heom_generator(sys, bath, cfg):
    """Sparse HEOM Liouville matrix and the ADO labels.

    Returns
    -------
    L : scipy.sparse.csr_matrix
    labels : list of tuple
    """
    exp = _expansion(bath, cfg)
    ck = np.asarray(exp.amplitudes, dtype=complex)
    nuk = np.asarray(exp.rates, dtype=float)
    K = ck.size
    size = hierarchy_size(K, cfg.depth)
    if size > cfg.max_ados:
        raise ValueError(f"hierarchy with {size} ADOs exceeds max_ados={cfg.max_ados}")
    labels = _multi_indices(K, cfg.depth)
    index = {n: i for i, n in enumerate(labels)}
    N = len(labels)
    Q = sys.coupling
    H = sys.hamiltonian
    I4 = np.eye(4)
    lS = lv.commutator(H)
    if cfg.terminator and exp.terminator != 0:
        lS = lS - exp.terminator * (lv.left(Q) - lv.right(Q)) @ (lv.left(Q) - lv.right(Q))
    comm_q = -1j * (lv.left(Q) - lv.right(Q))
    lq, rq = lv.left(Q), lv.right(Q)

    damp = np.array([-np.dot(n, nuk) for n in labels])
    blocks = [sparse.kron(sparse.identity(N), lS), sparse.kron(sparse.diags(damp), I4)]
    arr = np.array(labels)
    for k in range(K):
        up = arr.copy()
        up[:, k] += 1
        rows, cols, nk = [], [], []
        for i, n in enumerate(map(tuple, up)):
            j = index.get(n)
            if j is not None:
                rows.append(i)
                cols.append(j)
        P = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(N, N))
        blocks.append(sparse.kron(P, comm_q))
        # lowering couplings are the transpose pattern weighted by n_k
        Pt = sparse.coo_matrix((arr[cols, k].astype(float), (cols, rows)), shape=(N, N))
        blocks.append(sparse.kron(Pt, -1j * (ck[k] * lq - np.conj(ck[k]) * rq)))
    L = sparse.csr_matrix(sum(b.tocsr() for b in blocks))
    L.eliminate_zeros()
    return L, labels, exp


def _relevant_components(L, y0, outputs):
    """Components reachable from the support of y0 that can influence outputs.

    Dropping the rest leaves the output components unchanged exactly:
    unreachable components stay zero and the others never feed back.
    """
    graph = (L != 0).astype(np.int8)
    # edge j -> i when y_j enters dy_i, i.e. L[i, j] != 0
    fwd = graph.T.tocsr()
    back = graph.tocsr()
    active = np.zeros(L.shape[0], dtype=bool)
    for s in np.flatnonzero(y0):
        if not active[s]:
            active[csgraph.breadth_first_order(fwd, s, return_predecessors=False)] = True
    needed = np.zeros(L.shape[0], dtype=bool)
    for s in outputs:
        if not needed[s]:
            needed[csgraph.breadth_first_order(back, s, return_predecessors=False)] = True
    keep = np.flatnonzero(active & needed)
    return keep


def heom_solve(sys, bath, cfg=None, rho0=None, times=None, ode=None):
    """HEOM trajectory in the Schrodinger picture.

    Parameters
    ----------
    sys : SystemParams
    bath : BathParams
    cfg : HeomConfig
    rho0 : array_like, shape (2, 2)
    times : array_like
    ode : OdeConfig, optional
        Overrides ``cfg.ode``.

    Returns
    -------
    Trajectory
    """
    cfg = cfg or HeomConfig()
    ode = ode or cfg.ode
    rho0 = np.asarray(rho0, dtype=complex)
    times = np.asarray(times, dtype=float)
    L, labels, exp = heom_generator(sys, bath, cfg)
    y0 = np.zeros(L.shape[0], dtype=complex)
    y0[:4] = rho0.reshape(-1)
    keep = _relevant_components(L, y0, range(4))
    sub = L[keep][:, keep].tocsr()
    root = np.flatnonzero(keep < 4)
    ys_sub, info = integrate_linear(sub, y0[keep], times, ode, components=root)
    ys = np.zeros((times.size, 4), dtype=complex)
    ys[:, keep[root]] = ys_sub
    states = ys.reshape(-1, 2, 2)
    herm = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    diag = {"n_ados": len(labels), "dim": L.shape[0], "dim_integrated": int(keep.size),
            "nnz": int(L.nnz),
            "nfev": info["nfev"],
            "hermiticity_drift": float(np.max(np.abs(states - herm))),
            "trace_drift": float(np.max(np.abs(np.einsum("nii->n", herm).real - 1.0))),
            "terminator": float(exp.terminator)}
    opts = asdict(cfg)
    opts["ode"] = asdict(ode)
    return Trajectory(times, herm, "heom", "schrodinger", opts, diag)


def heom_self_convergence(sys, bath, cfg, rho0, times, tol=1e-6, refine=("depth",),
                          step=2):
    """Compare ``cfg`` with refined hierarchies.

    Returns the trajectory of ``cfg`` and the maximal trace distance to
    each refinement.

    Raises
    ------
    HeomConvergenceError
        If any refinement changes the trajectory by more than ``tol``.
    """
    from ..metrics import trace_distance_series

    base = heom_solve(sys, bath, cfg, rho0, times)
    report = {}
    for what in refine:
        if what == "depth":
            finer = replace(cfg, depth=cfg.depth + step)
        elif what == "n_matsubara":
            finer = replace(cfg, n_matsubara=cfg.n_matsubara + step)
        else:
            raise ValueError(f"unknown refinement {what!r}")
        other = heom_solve(sys, bath, finer, rho0, times)
        report[what] = float(np.max(trace_distance_series(base, other)))
    base.diagnostics["self_convergence"] = report
    worst = max(report.values()) if report else 0.0
    if worst > tol:
        raise HeomConvergenceError(
            f"HEOM not converged (change {worst:.2e} > {tol:.1e} under {report}); "
            "increase depth or n_matsubara")
    return base, report
