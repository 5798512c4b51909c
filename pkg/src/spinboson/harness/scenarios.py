"""Scenario and sweep definitions, named presets and the INI config format.

All presets use ``w0 = 1`` as the frequency unit. Bath parameters are
given as ratios: ``lambda_over_gamma``, ``gamma_over_omega0`` and
``omega0_over_T`` (= beta w0).

Config files are INI files with a ``[scenario]`` or ``[sweep]`` section
and an optional ``[heom]`` section, e.g.::

    [scenario]
    name = my-run
    preset = fig3-sx            # optional base preset
    f1 = 1.0
    f3 = 0.5
    omega0_over_T = 2
    lambda_over_gamma = 0.01
    gamma_over_omega0 = 5
    solvers = cumulant, davies, bloch_redfield, heom
    lamb_shift = off
    picture = schrodinger
    initial_state = plus
    t_max = 40
    n_points = 800

    [heom]
    n_matsubara = 8
    depth = 8
    expansion = pade
    terminator = on
"""

import configparser
from dataclasses import dataclass, field, fields, replace

import numpy as np

from ..bath import BathParams
from ..cumulant import SystemParams
from ..refsolvers.heom import HeomConfig

# plain Matsubara sums are unstable at these temperatures; Pade with the
# white-noise terminator is accurate at N_k = 8
PADE_8_8 = HeomConfig(n_matsubara=8, depth=8, expansion="pade", terminator=True)

__all__ = ["SOLVERS", "INITIAL_STATES", "Scenario", "SweepSpec", "PRESETS", "SWEEPS",
           "get_preset", "get_sweep", "initial_state", "load_config", "ConfigError"]

SOLVERS = ("cumulant", "davies", "bloch_redfield", "redfield_td", "exact", "heom")

_PLUS = [[0.5, 0.5], [0.5, 0.5]]
_NM_A = [[0.5, 0.5j], [-0.5j, 0.5]]
_NM_B = [[0.5, -0.5j], [0.5j, 0.5]]

INITIAL_STATES = {
    "plus": _PLUS,
    "excited": [[1.0, 0.0], [0.0, 0.0]],
    "ground": [[0.0, 0.0], [0.0, 1.0]],
    "mixed": [[0.5, 0.0], [0.0, 0.5]],
    "nm-a": _NM_A,
    "nm-b": _NM_B,
}


class ConfigError(ValueError):
    """Malformed scenario or sweep configuration."""


def initial_state(spec):
    """Density matrix from a name in INITIAL_STATES or ``"a,b;c,d"`` with complex entries."""
    if isinstance(spec, str):
        if spec in INITIAL_STATES:
            return np.array(INITIAL_STATES[spec], dtype=complex)
        try:
            rows = [[complex(x.replace(" ", "")) for x in r.split(",")] for r in spec.split(";")]
        except ValueError as exc:
            raise ConfigError(f"cannot parse initial state {spec!r}") from exc
        rho = np.array(rows, dtype=complex)
    else:
        rho = np.asarray(spec, dtype=complex)
    if rho.shape != (2, 2) or np.max(np.abs(rho - rho.conj().T)) > 1e-12 \
            or abs(np.trace(rho) - 1) > 1e-12:
        raise ConfigError("initial state must be a Hermitian 2x2 matrix with unit trace")
    return rho


@dataclass(frozen=True)
class Scenario:
    """One simulation setup.

    ``initial_state`` names one entry of INITIAL_STATES (or a literal); for
    witness runs ``initial_state_b`` names the second, orthogonal state.
    """

    name: str
    f1: float = 1.0
    f2: float = 0.0
    f3: float = 0.0
    omega0_over_T: float = 2.0
    lambda_over_gamma: float = 0.01
    gamma_over_omega0: float = 5.0
    solvers: tuple = ("cumulant", "davies", "bloch_redfield", "heom")
    lamb_shift: bool = False
    picture: str = "schrodinger"
    initial_state: str = "plus"
    initial_state_b: str = ""
    t_max: float = 40.0
    n_points: int = 800
    heom: HeomConfig = PADE_8_8
    description: str = ""

    def __post_init__(self):
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise ConfigError(f"unknown solvers {sorted(unknown)}")
        if self.picture not in ("schrodinger", "interaction"):
            raise ConfigError(f"unknown picture {self.picture!r}")
        if self.n_points < 2 or not self.t_max > 0:
            raise ConfigError("need t_max > 0 and n_points >= 2")
        if "exact" in self.solvers and (self.f1 != 0 or self.f2 != 0):
            raise ConfigError("the exact solver needs pure dephasing (f1 = f2 = 0)")

    @property
    def system(self):
        return SystemParams(1.0, self.f1, self.f2, self.f3)

    @property
    def bath(self):
        return BathParams.from_ratios(self.lambda_over_gamma, self.gamma_over_omega0,
                                      self.omega0_over_T)

    @property
    def times(self):
        return np.linspace(0.0, self.t_max, self.n_points)

    @property
    def rho0(self):
        return initial_state(self.initial_state)

    @property
    def reference(self):
        """Solver used as the fidelity reference."""
        if "heom" in self.solvers:
            return "heom"
        if "exact" in self.solvers:
            return "exact"
        return None


@dataclass(frozen=True)
class SweepSpec:
    """Grid over ``(lambda/gamma, w0/T)`` with minimum fidelity against HEOM."""

    name: str
    f1: float = 1.0
    f2: float = 0.0
    f3: float = 0.0
    gamma_over_omega0: float = 1.0
    lambda_over_gamma: tuple = (1e-3, 1.0)
    omega0_over_T: tuple = (0.2, 6.0)
    n_lambda: int = 12
    n_temperature: int = 12
    log_lambda: bool = True
    solvers: tuple = ("cumulant", "bloch_redfield", "davies")
    pairs: tuple = (("cumulant", "bloch_redfield"), ("cumulant", "davies"))
    initial_state: str = "plus"
    t_max: float = 40.0
    n_points: int = 400
    heom: HeomConfig = HeomConfig(n_matsubara=8, depth=4, expansion="pade", terminator=True)
    description: str = ""

    def __post_init__(self):
        if self.n_lambda < 2 or self.n_temperature < 2:
            raise ConfigError("grid resolution must be >= 2 per axis")
        if "heom" in self.solvers:
            raise ConfigError("HEOM is the sweep reference, not a compared solver")
        for a, b in self.pairs:
            if a not in self.solvers or b not in self.solvers:
                raise ConfigError(f"pair ({a}, {b}) uses a solver that is not swept")

    @property
    def lambda_grid(self):
        lo, hi = self.lambda_over_gamma
        if self.log_lambda:
            return np.logspace(np.log10(lo), np.log10(hi), self.n_lambda)
        return np.linspace(lo, hi, self.n_lambda)

    @property
    def temperature_grid(self):
        lo, hi = self.omega0_over_T
        return np.linspace(lo, hi, self.n_temperature)

    def scenario_at(self, lam, bw):
        return Scenario(name=f"{self.name}@{lam:.4g},{bw:.4g}", f1=self.f1, f2=self.f2,
                        f3=self.f3, omega0_over_T=float(bw),
                        lambda_over_gamma=float(lam),
                        gamma_over_omega0=self.gamma_over_omega0,
                        solvers=tuple(self.solvers) + ("heom",),
                        initial_state=self.initial_state, t_max=self.t_max,
                        n_points=self.n_points, heom=self.heom)


PRESETS = {
    "fig2-dephasing": Scenario(
        "fig2-dephasing", f1=0.0, f3=1.0, omega0_over_T=4.0, lambda_over_gamma=0.25,
        gamma_over_omega0=5.0,
        solvers=("cumulant", "exact", "davies", "bloch_redfield", "redfield_td", "heom"),
        description="pure dephasing, coherence against the exact solution"),
    "fig3-sx": Scenario(
        "fig3-sx", f1=1.0, omega0_over_T=2.0, lambda_over_gamma=0.01,
        gamma_over_omega0=5.0,
        description="standard spin-boson coupling through sx"),
    "fig5-composite": Scenario(
        "fig5-composite", f1=1.0, f3=1.0, omega0_over_T=2.0, lambda_over_gamma=0.01,
        gamma_over_omega0=5.0,
        description="composite coupling sx + sz"),
    "fig8-lamb": Scenario(
        "fig8-lamb", f1=1.0, f3=1.0, omega0_over_T=2.0, lambda_over_gamma=0.01,
        gamma_over_omega0=5.0, lamb_shift=True,
        description="composite coupling with the Lamb shift included"),
    "fig8-lamb-sx": Scenario(
        "fig8-lamb-sx", f1=1.0, omega0_over_T=2.0, lambda_over_gamma=0.01,
        gamma_over_omega0=5.0, lamb_shift=True,
        description="sx coupling with the Lamb shift included"),
    "appC-nm": Scenario(
        "appC-nm", f1=5.0, f3=1.0, omega0_over_T=1.0, lambda_over_gamma=0.01,
        gamma_over_omega0=5.0, solvers=("cumulant", "bloch_redfield", "davies"),
        initial_state="nm-a", initial_state_b="nm-b", t_max=10.0, n_points=2000,
        description="trace-distance witness from two orthogonal states"),
    "appD-redfield": Scenario(
        "appD-redfield", f1=1.0, omega0_over_T=2.0, lambda_over_gamma=0.1,
        gamma_over_omega0=5.0,
        solvers=("cumulant", "bloch_redfield", "redfield_td", "heom"),
        description="time-dependent Redfield against the other approaches"),
}

SWEEPS = {
    "fig4": SweepSpec("fig4", f1=1.0, gamma_over_omega0=1.0,
                      description="sx coupling, gamma = w0"),
    "fig7": SweepSpec("fig7", f1=1.0, f3=1.0, gamma_over_omega0=1.0,
                      description="composite sx + sz coupling, gamma = w0"),
    "smoke": SweepSpec("smoke", f1=1.0, gamma_over_omega0=1.0, lambda_over_gamma=(1e-3, 1e-2),
                       omega0_over_T=(1.0, 3.0), n_lambda=3, n_temperature=3, t_max=10.0,
                       n_points=101,
                       heom=HeomConfig(n_matsubara=4, depth=3, expansion="pade", terminator=True),
                       description="3x3 grid for quick checks"),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; see list-presets") from None


def get_sweep(name):
    try:
        return SWEEPS[name]
    except KeyError:
        raise ConfigError(f"unknown sweep {name!r}; see list-presets") from None


def _parse_bool(v):
    s = str(v).strip().lower()
    if s in ("1", "on", "true", "yes"):
        return True
    if s in ("0", "off", "false", "no"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _parse_range(v):
    parts = [float(x) for x in str(v).replace(",", " ").split()]
    if len(parts) != 2:
        raise ConfigError(f"expected 'lo, hi', got {v!r}")
    return tuple(parts)


def _parse_pairs(v):
    out = []
    for item in str(v).split(";"):
        a, _, b = item.partition("-")
        if not b:
            raise ConfigError(f"pairs are written 'a-b; c-d', got {v!r}")
        out.append((a.strip(), b.strip()))
    return tuple(out)


def _coerce(cls, values):
    types = {f.name: f.type for f in fields(cls)}
    out = {}
    for key, raw in values.items():
        if key not in types or key == "heom":
            raise ConfigError(f"unknown key {key!r} for {cls.__name__} "
                              "(HEOM settings go in a [heom] section)")
        t = types[key]
        try:
            if key in ("solvers",):
                out[key] = tuple(s.strip() for s in raw.split(",") if s.strip())
            elif key == "pairs":
                out[key] = _parse_pairs(raw)
            elif key in ("lambda_over_gamma", "omega0_over_T") and cls is SweepSpec:
                out[key] = _parse_range(raw)
            elif t in (bool, "bool"):
                out[key] = _parse_bool(raw)
            elif t in (int, "int"):
                out[key] = int(raw)
            elif t in (float, "float"):
                out[key] = float(raw)
            else:
                out[key] = raw.strip()
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return out


def _heom_section(cp, base):
    if not cp.has_section("heom"):
        return base
    vals = dict(cp.items("heom"))
    kw = {}
    for key, raw in vals.items():
        if key in ("n_matsubara", "depth", "max_ados"):
            kw[key] = int(raw)
        elif key == "expansion":
            kw[key] = raw.strip()
        elif key == "terminator":
            kw[key] = _parse_bool(raw)
        else:
            raise ConfigError(f"unknown key {key!r} in [heom]")
    try:
        return replace(base, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    """Read a Scenario or SweepSpec from an INI file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    # keys are field names such as omega0_over_T
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if cp.has_section("scenario") == cp.has_section("sweep"):
        raise ConfigError("config needs exactly one [scenario] or [sweep] section")
    kind = "scenario" if cp.has_section("scenario") else "sweep"
    cls = Scenario if kind == "scenario" else SweepSpec
    vals = dict(cp.items(kind))
    base_name = vals.pop("preset", None)
    if base_name:
        base = get_preset(base_name) if kind == "scenario" else get_sweep(base_name)
    else:
        if "name" not in vals:
            raise ConfigError("config needs a name or a preset")
        base = None
    kw = _coerce(cls, vals)
    try:
        obj = replace(base, **kw) if base is not None else cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return replace(obj, heom=_heom_section(cp, obj.heom))
