"""Minimum-fidelity maps over (lambda/gamma, w0/T)."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import contourpy
import numpy as np

from . import io
from .run import run_scenario

__all__ = ["SweepResult", "sweep_point", "run_sweep", "zero_contours"]

log = logging.getLogger(__name__)


@dataclass
class SweepResult:
    """Grid values, indexed ``[i_temperature, i_lambda]``.

    Failed points are NaN and listed in ``errors``.
    """

    spec: object
    lambda_over_gamma: np.ndarray
    omega0_over_T: np.ndarray
    min_fidelity: dict
    differences: dict
    contours: dict
    errors: list = field(default_factory=list)


def sweep_point(spec, lam, bw):
    """Minimum fidelity of every swept solver against HEOM at one grid point.

    Returns
    -------
    values : dict
        Solver to minimum fidelity (NaN for failures).
    errors : dict
        Solver to message.
    """
    try:
        res = run_scenario(spec.scenario_at(lam, bw), workers=1)
    except Exception as exc:  # noqa: BLE001 - recorded as a missing point
        return {s: np.nan for s in spec.solvers}, {"point": f"{type(exc).__name__}: {exc}"}
    errors = dict(res.errors)
    if res.reference is None:
        errors.setdefault("heom", "reference unavailable")
    values = {s: res.comparisons[s].min_fidelity if s in res.comparisons else np.nan
              for s in spec.solvers}
    return values, errors


def _point_task(args):
    spec, lam, bw = args
    return sweep_point(spec, lam, bw)


def zero_contours(lam, temp, z):
    """Zero level polylines of ``z`` (shape ``(len(temp), len(lam))``).

    The contour is traced in ``log10(lambda)`` so segments follow the log
    grid; returned coordinates are plain ``(lambda/gamma, w0/T)``.
    """
    z = np.ma.masked_invalid(np.asarray(z, dtype=float))
    if z.count() < 4:
        return []
    gen = contourpy.contour_generator(np.log10(lam), temp, z,
                                      line_type=contourpy.LineType.Separate)
    out = []
    for seg in gen.lines(0.0):
        seg = np.array(seg, dtype=float)
        seg[:, 0] = 10.0 ** seg[:, 0]
        out.append(seg)
    return out


def run_sweep(spec, out=None, fmt="csv", workers=None):
    """Evaluate all grid points, in parallel when ``workers > 1``.

    Results do not depend on the worker count: points are independent and
    collected by grid index.
    """
    lam = spec.lambda_grid
    temp = spec.temperature_grid
    tasks = [(spec, float(l), float(b)) for b in temp for l in lam]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_task, tasks))
    else:
        results = [_point_task(t) for t in tasks]
    shape = (temp.size, lam.size)
    minfid = {s: np.full(shape, np.nan) for s in spec.solvers}
    errors = []
    for n, (vals, errs) in enumerate(results):
        i, j = divmod(n, lam.size)
        for s, v in vals.items():
            minfid[s][i, j] = v
        for what, msg in errs.items():
            errors.append({"lambda_over_gamma": lam[j], "omega0_over_T": temp[i],
                           "solver": what, "error": msg})
    diffs = {f"{a}-{b}": minfid[a] - minfid[b] for a, b in spec.pairs}
    contours = {k: zero_contours(lam, temp, d) for k, d in diffs.items()}
    res = SweepResult(spec, lam, temp, minfid, diffs, contours, errors)
    if out is not None:
        write_sweep(res, out, fmt)
    return res


def write_sweep(res, out, fmt="csv"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    lam, temp = res.lambda_over_gamma, res.omega0_over_T
    written = []
    if fmt in ("csv", "both"):
        rows = [(lam[j], temp[i], s, res.min_fidelity[s][i, j])
                for i in range(temp.size) for j in range(lam.size)
                for s in res.spec.solvers]
        written.append(io.write_csv(out / "minfid.csv", io.MINFID_HEADER, rows))
        rows = [(lam[j], temp[i], k, d[i, j]) for k, d in res.differences.items()
                for i in range(temp.size) for j in range(lam.size)]
        written.append(io.write_csv(out / "difference.csv", io.DIFFERENCE_HEADER, rows))
        rows = [(k, n, x, y) for k, segs in res.contours.items()
                for n, seg in enumerate(segs) for x, y in seg]
        written.append(io.write_csv(out / "contour.csv", io.CONTOUR_HEADER, rows))
    if fmt in ("svg", "both"):
        meta = {"sweep": res.spec.name, "git": io.git_hash(),
                "grid": [int(lam.size), int(temp.size)],
                "gamma_over_omega0": res.spec.gamma_over_omega0,
                "heom": io.to_jsonable(res.spec.heom)}
        for s, z in res.min_fidelity.items():
            written.append(io.plot_map(out / f"minfid_{s}.svg", lam, temp, z,
                                       f"{res.spec.name}: min fidelity {s}", meta))
        for k, d in res.differences.items():
            written.append(io.plot_map(out / f"difference_{k}.svg", lam, temp, d,
                                       f"{res.spec.name}: {k}", meta, res.contours[k]))
    written.append(io.write_json(out / "sweep.json", {
        "spec": res.spec, "errors": res.errors,
        "grid": {"lambda_over_gamma": lam, "omega0_over_T": temp}}))
    return written
