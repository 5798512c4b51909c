"""CSV, JSON and SVG emission.

CSV files are written with ``%.17g`` so reruns with the same configuration
are byte-identical.
"""

import json
import os
import subprocess
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

TRAJECTORY_HEADER = ("t", "re_rho00", "re_rho01", "im_rho01", "re_rho11")
METRIC_HEADER = ("t", "fidelity", "trace_distance")
MINFID_HEADER = ("lambda_over_gamma", "omega0_over_T", "solver", "min_fidelity")
DIFFERENCE_HEADER = ("lambda_over_gamma", "omega0_over_T", "pair", "difference")
CONTOUR_HEADER = ("pair", "segment", "lambda_over_gamma", "omega0_over_T")


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    return "%.17g" % x


def write_csv(path, header, rows):
    """Write rows (sequence of sequences or a 2D array) under a header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def read_csv(path):
    """Header tuple and list of rows (strings) of a CSV written by write_csv."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = tuple(lines[0].split(","))
    return header, [ln.split(",") for ln in lines[1:]]


def to_jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def git_hash():
    """Commit of the source checkout, or ``"unknown"``."""
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             cwd=os.path.dirname(__file__), capture_output=True,
                             text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 else "unknown"


def _svg_metadata(title, meta):
    return {"Title": title, "Description": json.dumps(to_jsonable(meta), sort_keys=True),
            "Date": None, "Creator": "spinboson"}


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "spinboson"
    return plt


def plot_trajectories(path, trajectories, comparisons, title, meta):
    """Populations, coherence and fidelity panels."""
    plt = _figure()
    n = 3 if comparisons else 2
    fig, axes = plt.subplots(n, 1, figsize=(6, 2.4 * n), sharex=True)
    for name, tr in trajectories.items():
        axes[0].plot(tr.times, tr.populations[:, 0], label=name)
        axes[1].plot(tr.times, np.abs(tr.coherence), label=name)
    axes[0].set_ylabel("rho_00")
    axes[1].set_ylabel("|rho_01|")
    axes[0].legend(fontsize="small")
    if comparisons:
        for name, c in comparisons.items():
            axes[2].plot(c.times, c.fidelity, label=name)
        axes[2].set_ylabel("fidelity")
        axes[2].legend(fontsize="small")
    axes[-1].set_xlabel("t w0")
    axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_svg_metadata(title, meta))
    plt.close(fig)
    return path


def plot_map(path, lam, temp, values, title, meta, contours=()):
    """Heat map over (lambda/gamma, w0/T) with optional zero contours."""
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(lam, temp, values, shading="nearest")
    fig.colorbar(mesh, ax=ax)
    for seg in contours:
        ax.plot(seg[:, 0], seg[:, 1], "k-")
    ax.set_xscale("log")
    ax.set_xlabel("lambda / gamma")
    ax.set_ylabel("w0 / T")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_svg_metadata(title, meta))
    plt.close(fig)
    return path
