"""Run a scenario: every requested solver, comparisons and file output."""

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..cumulant import CumulantOptions, evolve
from ..metrics import compare, nm_witness_from_trajectories
from ..refsolvers.davies import davies_gkls
from ..refsolvers.dephasing import exact_dephasing_trajectory
from ..refsolvers.heom import HeomConvergenceError, heom_self_convergence, heom_solve
from ..refsolvers.ode import propagate_static
from ..refsolvers.redfield import bloch_redfield, redfield_td
from . import io
from .scenarios import initial_state

__all__ = ["RunResult", "solve", "run_scenario", "write_outputs"]

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Trajectories, comparisons and per-solver failures of one scenario.

    ``comparisons`` maps a solver to its ComparisonResult against the
    reference; ``witness`` maps a solver to its NMWitness when the scenario
    names a second initial state.
    """

    scenario: object
    trajectories: dict = field(default_factory=dict)
    comparisons: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    reference: str = None

    def min_fidelities(self):
        return {k: c.min_fidelity for k, c in self.comparisons.items()}


def solve(name, s, rho0, times, workers=None, heom_check=False):
    """Trajectory of solver ``name`` for scenario ``s`` in the Schrodinger picture."""
    sys, bath = s.system, s.bath
    if name == "cumulant":
        opts = CumulantOptions(include_lamb_shift=s.lamb_shift)
        return evolve(sys, bath, opts, rho0, times, workers=workers)
    if name == "davies":
        return propagate_static(davies_gkls(sys, bath), rho0, times, solver="davies")
    if name == "bloch_redfield":
        return propagate_static(bloch_redfield(sys, bath, s.lamb_shift), rho0, times,
                                solver="bloch_redfield",
                                options={"lamb_shift": s.lamb_shift})
    if name == "redfield_td":
        return redfield_td(sys, bath, rho0, times, lamb_shift=s.lamb_shift)
    if name == "exact":
        return exact_dephasing_trajectory(bath, s.f3, sys.omega0, rho0, times)
    if name == "heom":
        if heom_check:
            try:
                traj, _ = heom_self_convergence(sys, bath, s.heom, rho0, times)
            except HeomConvergenceError as exc:
                # keep the run going; the report says what failed to converge
                log.warning("%s", exc)
                traj = heom_solve(sys, bath, s.heom, rho0, times)
                traj.diagnostics["self_convergence_error"] = str(exc)
            return traj
        return heom_solve(sys, bath, s.heom, rho0, times)
    raise ValueError(f"unknown solver {name!r}")


def _run_all(s, rho0, times, workers, heom_check, errors, timings, tag=""):
    out = {}
    for name in s.solvers:
        t0 = time.perf_counter()
        try:
            out[name] = solve(name, s, rho0, times, workers, heom_check)
        except Exception as exc:  # noqa: BLE001 - failures are reported per solver
            errors[name + tag] = f"{type(exc).__name__}: {exc}"
            log.error("solver %s failed: %s", name, exc)
        timings[name + tag] = time.perf_counter() - t0
    return out


def run_scenario(s, out=None, fmt="csv", workers=None, heom_check=False):
    """Run every solver of ``s``, compare against the reference and write files.

    Parameters
    ----------
    s : Scenario
    out : path-like, optional
        Output directory; nothing is written when omitted.
    fmt : {"csv", "svg", "both"}
    workers : int, optional
        Processes for the cumulant rate tables.
    heom_check : bool
        Refine the HEOM depth once and record the change.

    Returns
    -------
    RunResult
    """
    if fmt not in ("csv", "svg", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    times = s.times
    res = RunResult(s)
    trajs = _run_all(s, s.rho0, times, workers, heom_check, res.errors, res.timings)
    res.trajectories = {k: v.in_picture(s.picture, s.system.omega0) for k, v in trajs.items()}
    ref = s.reference
    if ref is not None and ref in res.trajectories:
        res.reference = ref
        for name, tr in res.trajectories.items():
            if name != ref:
                res.comparisons[name] = compare(tr, res.trajectories[ref])
    elif ref is not None:
        log.warning("reference solver %s failed; no comparisons", ref)
    if s.initial_state_b:
        second = _run_all(s, initial_state(s.initial_state_b), times, workers, heom_check,
                          res.errors, res.timings, tag="[b]")
        for name, b in second.items():
            if name in trajs:
                res.witness[name] = nm_witness_from_trajectories(trajs[name], b)
    if out is not None:
        write_outputs(res, out, fmt)
    return res


def _meta(res):
    s = res.scenario
    return {"scenario": s.name, "git": io.git_hash(), "reference": res.reference,
            "system": asdict(s.system), "bath": asdict(s.bath),
            "picture": s.picture, "lamb_shift": s.lamb_shift,
            "tolerances": {k: _tolerances(tr) for k, tr in res.trajectories.items()}}


def _tolerances(tr):
    if "ode" in tr.options:
        return tr.options["ode"]
    return {k: tr.options[k] for k in ("atol", "rtol") if k in tr.options}


def write_outputs(res, out, fmt="csv"):
    """Write the CSV contract files (and SVG plots) for a RunResult.

    Per solver ``trajectory_<solver>.csv`` holds the full state and
    ``fidelity_<solver>.csv`` the comparison with the reference. The
    combined tables ``population.csv``, ``coherence.csv`` and
    ``fidelity.csv`` hold one column group per solver.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    trajs = res.trajectories
    names = list(trajs)
    t = res.scenario.times
    written = []
    if fmt in ("csv", "both"):
        for name, tr in trajs.items():
            written.append(io.write_csv(out / f"trajectory_{name}.csv",
                                        io.TRAJECTORY_HEADER, tr.rows()))
        for name, c in res.comparisons.items():
            written.append(io.write_csv(out / f"fidelity_{name}.csv", io.METRIC_HEADER,
                                        c.rows()))
        pop = np.column_stack([t] + [trajs[n].populations[:, 0] for n in names])
        written.append(io.write_csv(out / "population.csv",
                                    ["t"] + [f"{n}_rho00" for n in names], pop))
        coh_cols, coh_head = [t], ["t"]
        for n in names:
            coh_cols += [trajs[n].coherence.real, trajs[n].coherence.imag]
            coh_head += [f"{n}_re_rho01", f"{n}_im_rho01"]
        written.append(io.write_csv(out / "coherence.csv", coh_head,
                                    np.column_stack(coh_cols)))
        fid_cols, fid_head = [t], ["t"]
        for n, c in res.comparisons.items():
            fid_cols += [c.fidelity, c.trace_distance]
            fid_head += [f"{n}_fidelity", f"{n}_trace_distance"]
        written.append(io.write_csv(out / "fidelity.csv", fid_head,
                                    np.column_stack(fid_cols)))
        if res.witness:
            rows = [(n, int(w.flag), w.measure) for n, w in res.witness.items()]
            written.append(io.write_csv(out / "witness.csv", ("solver", "flag", "measure"),
                                        rows))
            for n, w in res.witness.items():
                written.append(io.write_csv(out / f"witness_{n}.csv",
                                            ("t", "trace_distance", "derivative"),
                                            np.column_stack([w.times, w.distance,
                                                             w.derivative])))
    if fmt in ("svg", "both"):
        written.append(io.plot_trajectories(out / "trajectories.svg", trajs,
                                            res.comparisons, res.scenario.name, _meta(res)))
    summary = {"meta": _meta(res), "errors": res.errors, "timings": res.timings,
               "min_fidelity": {n: {"value": c.min_fidelity, "time": c.argmin_time,
                                    **c.annotations}
                                for n, c in res.comparisons.items()},
               "witness": {n: {"flag": w.flag, "measure": w.measure}
                           for n, w in res.witness.items()},
               "diagnostics": {n: tr.diagnostics for n, tr in trajs.items()}}
    written.append(io.write_json(out / "run.json", summary))
    return written

