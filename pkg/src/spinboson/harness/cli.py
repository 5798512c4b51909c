"""Command line interface: ``spinboson run|sweep|list-presets|validate``."""

import argparse
import logging
import os
import sys
from dataclasses import replace

from .scenarios import PRESETS, SWEEPS, ConfigError, Scenario, get_preset, get_sweep, load_config

log = logging.getLogger("spinboson")


def _on_off(v):
    s = v.lower()
    if s in ("on", "true", "1", "yes"):
        return True
    if s in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError("expected on or off")


def _workers(args):
    if args.workers is not None:
        return args.workers
    env = os.environ.get("SPINBOSON_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SPINBOSON_WORKERS must be an integer, got {env!r}") from None
    return 1


def build_parser():
    p = argparse.ArgumentParser(prog="spinboson",
                                description="Cumulant, Redfield, Davies and HEOM dynamics "
                                            "of the non-equilibrium spin-boson model.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("csv", "svg", "both"), default="csv")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: $SPINBOSON_WORKERS or 1)")
    common.add_argument("--config", help="INI file overriding the preset")
    common.add_argument("--heom-depth", type=int)
    common.add_argument("--heom-nk", type=int, help="exponentials beyond the Drude term")

    r = sub.add_parser("run", parents=[common], help="run a scenario preset")
    r.add_argument("scenario", nargs="?", help="preset name (or use --config)")
    r.add_argument("--lamb-shift", type=_on_off)
    r.add_argument("--picture", choices=("schrodinger", "interaction"))
    r.add_argument("--heom-check", action="store_true",
                   help="refine the HEOM depth once and record the change")

    s = sub.add_parser("sweep", parents=[common], help="run a (lambda/gamma, w0/T) sweep")
    s.add_argument("spec", nargs="?", help="sweep name (or use --config)")

    sub.add_parser("list-presets", help="list scenario and sweep presets")

    v = sub.add_parser("validate", help="run the invariant suite")
    v.add_argument("--seed", type=int, default=0, help="seed of the randomized checks")
    return p


def _heom_overrides(obj, args):
    heom = obj.heom
    if args.heom_depth is not None:
        heom = replace(heom, depth=args.heom_depth)
    if args.heom_nk is not None:
        heom = replace(heom, n_matsubara=args.heom_nk)
    return replace(obj, heom=heom)


def _resolve(name, args, getter, kind):
    if args.config:
        obj = load_config(args.config)
        if not isinstance(obj, kind):
            raise ConfigError(f"config {args.config} does not describe a {kind.__name__}")
    elif name:
        obj = getter(name)
    else:
        raise ConfigError("give a preset name or --config")
    return _heom_overrides(obj, args)


def cmd_run(args):
    from .run import run_scenario

    s = _resolve(args.scenario, args, get_preset, Scenario)
    kw = {}
    if args.lamb_shift is not None:
        kw["lamb_shift"] = args.lamb_shift
    if args.picture is not None:
        kw["picture"] = args.picture
    s = replace(s, **kw)
    res = run_scenario(s, out=args.out, fmt=args.format, workers=_workers(args),
                       heom_check=args.heom_check)
    for name, c in res.comparisons.items():
        print(f"{name}: min fidelity vs {res.reference} {c.min_fidelity:.10f} "
              f"at t = {c.argmin_time:.4g}")
    for name, w in res.witness.items():
        print(f"{name}: non-Markovianity flag {w.flag} measure {w.measure:.4e}")
    for name, msg in res.errors.items():
        print(f"{name}: FAILED {msg}", file=sys.stderr)
    print(f"output written to {args.out}")
    return 1 if res.errors else 0


def cmd_sweep(args):
    from .scenarios import SweepSpec
    from .sweep import run_sweep

    spec = _resolve(args.spec, args, get_sweep, SweepSpec)
    res = run_sweep(spec, out=args.out, fmt=args.format, workers=_workers(args))
    n_missing = sum(int(v.size - (v == v).sum()) for v in res.min_fidelity.values())
    print(f"{spec.name}: {res.lambda_over_gamma.size}x{res.omega0_over_T.size} grid, "
          f"{n_missing} missing values, output written to {args.out}")
    for e in res.errors:
        print(f"point ({e['lambda_over_gamma']:.4g}, {e['omega0_over_T']:.4g}) "
              f"{e['solver']}: {e['error']}", file=sys.stderr)
    return 0


def cmd_list(args):
    print("scenarios:")
    for name, s in PRESETS.items():
        print(f"  {name:16s} f=({s.f1:g},{s.f2:g},{s.f3:g}) w0/T={s.omega0_over_T:g} "
              f"lambda/gamma={s.lambda_over_gamma:g} gamma/w0={s.gamma_over_omega0:g}  "
              f"{s.description}")
    print("sweeps:")
    for name, s in SWEEPS.items():
        print(f"  {name:16s} {s.n_lambda}x{s.n_temperature} f=({s.f1:g},{s.f2:g},{s.f3:g}) "
              f"gamma/w0={s.gamma_over_omega0:g}  {s.description}")
    return 0


def cmd_validate(args):
    from .validate import run_validation

    results = run_validation(seed=args.seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "list-presets": cmd_list,
                "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
