"""Command-line entry point.

Exit codes: 0 success (and reference check passed), 1 usage or runtime
error, 2 a run finished but missed its reference values.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from pathlib import Path

from . import experiments
from .lattice_modes import Family, LatticeGeometry, dispersion_grid
from .zero_point import ChopSpec

OUT_ENV = "LATTICE_CASIMIR_OUT"
EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_out():
    return Path(os.environ.get(OUT_ENV, "results"))


def _default_threads():
    return os.cpu_count() or 1


def build_parser():
    p = _Parser(prog="lattice-casimir",
                description="Casimir forces between barriers in discrete scalar-field lattices.")
    p.add_argument("--config", help="key = value file mirroring the command-line flags")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list", help="show the preset catalog")

    run = sub.add_parser("run", help="run one preset")
    run.add_argument("name")
    run.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./results)")
    run.add_argument("--threads", type=int)

    sw = sub.add_parser("sweep", help="run a custom configuration")
    sw.add_argument("--family", required=True, choices=[f.value for f in Family])
    sw.add_argument("--Nx", type=int, default=2, help="periodic steps along the barrier (2D)")
    sw.add_argument("--Ny", type=int, required=True, help="steps between the end barriers (N for chains)")
    sw.add_argument("--n-start", type=int, required=True)
    sw.add_argument("--n-end", type=int, required=True)
    sw.add_argument("--step", type=int, default=5)
    sw.add_argument("--chop", type=float, default=0.0)
    sw.add_argument("--barrier-divisor", type=float, default=4.001)
    sw.add_argument("--perp-divisor", type=float, default=2.0)
    sw.add_argument("--derivative", choices=[m.value for m in experiments.DerivativeMethod],
                    default="not-a-knot")
    sw.add_argument("--name", default="sweep")
    sw.add_argument("--out", type=Path)
    sw.add_argument("--threads", type=int)

    sf = sub.add_parser("surface", help="export a dispersion surface as CSV")
    sf.add_argument("--family", required=True)
    sf.add_argument("--resolution", type=int, default=100)
    sf.add_argument("--out", type=Path, help="CSV path (default <outdir>/surface-<family>.csv)")

    cmp_ = sub.add_parser("compare", help="run presets and tabulate against references")
    cmp_.add_argument("--all", action="store_true", help="every preset (the default)")
    cmp_.add_argument("--presets", help="comma-separated subset of preset names")
    cmp_.add_argument("--out", type=Path, help="also write results and report here")
    cmp_.add_argument("--threads", type=int)
    return p


def _subparsers(parser):
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return action.choices


def _apply_config(parser, argv):
    # defaults from --config are applied to the chosen subparser, then argv wins
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    path = Path(known.config)
    if not path.exists():
        raise UsageError(f"config file {path} not found")
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string("[flags]\n" + path.read_text())
    values = {k.replace("-", "_"): v for k, v in cp["flags"].items()}
    for subparser in _subparsers(parser).values():
        dests = {a.dest: a for a in subparser._actions}
        unknown = set(values) - set(dests) - {"config", "verbose"}
        defaults = {}
        for key, raw in values.items():
            if key in dests:
                act = dests[key]
                conv = act.type or (lambda s: s)
                if isinstance(act, argparse._StoreTrueAction):
                    conv = lambda s: s.strip().lower() in ("1", "true", "yes", "on")
                defaults[key] = conv(raw)
                act.required = False  # supplied by the file
        subparser.set_defaults(**defaults)
        subparser._config_unknown = unknown


def _echo(prefix, flags):
    shown = " ".join(f"{k}={v}" for k, v in flags.items())
    print(f"{prefix} {shown}")


def _write_outputs(result, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    experiments.persist_result(result, out_dir / f"{result.name}.json")
    result.curve.write_csv(out_dir / f"{result.name}-curve.csv")


def _fit_line(result):
    f = result.fit
    passed = "n/a" if result.passed is None else str(result.passed).lower()
    return f"A={f.A:.6g} b={f.b:.6g} pass={passed}"


def _exit_for(result):
    return EXIT_MISMATCH if result.passed is False else EXIT_OK


def cmd_list(args):
    print(f"{'name':<18} {'family':<18} {'Nx':>6} {'Ny':>6} {'n range':<12} {'chop':>6} "
          f"{'A_ref':>8} {'b_ref':>6}")
    for p in sorted(experiments.catalog(), key=lambda p: p.name):
        ref = p.reference
        a_ref = "-" if ref is None or ref.A is None else f"{ref.A:g}"
        b_ref = "-" if ref is None else f"{ref.b:g}"
        if ref is not None and ref.b_min_gap is not None:
            b_ref = f"!={ref.b:g}"
        rng = f"{p.n_start}..{p.n_end}/{p.step}"
        print(f"{p.name:<18} {p.geom.family.value:<18} {p.geom.Nx:>6} {p.geom.Ny:>6} "
              f"{rng:<12} {p.chop.fraction:>6g} {a_ref:>8} {b_ref:>6}")
    return EXIT_OK


def cmd_run(args):
    try:
        preset = experiments.get_preset(args.name)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_ERROR
    threads = args.threads or _default_threads()
    flags = {"name": args.name, "threads": threads}
    _echo("run", flags)
    result = experiments.run_custom(preset, threads=threads, metadata=flags)
    _write_outputs(result, args.out or _default_out())
    print(_fit_line(result))
    return _exit_for(result)


def cmd_sweep(args):
    fam = Family.parse(args.family)
    try:
        geom = LatticeGeometry(fam, args.Nx, args.Ny, args.barrier_divisor, args.perp_divisor)
        preset = experiments.ExperimentPreset(
            args.name, geom, args.n_start, args.n_end, args.step, ChopSpec(args.chop),
            derivative=args.derivative, allow_sign_change=fam is Family.SPACETIME_SQUARE)
    except ValueError as exc:
        print(f"invalid sweep: {exc}", file=sys.stderr)
        return EXIT_ERROR
    threads = args.threads or _default_threads()
    flags = {"family": fam.value, "Nx": geom.Nx, "Ny": geom.Ny, "n_start": args.n_start,
             "n_end": args.n_end, "step": args.step, "chop": args.chop, "threads": threads}
    if fam is Family.SPACETIME_SQUARE:
        flags.update(barrier_divisor=args.barrier_divisor, perp_divisor=args.perp_divisor)
    _echo("sweep", flags)
    result = experiments.run_custom(preset, threads=threads, metadata=flags)
    _write_outputs(result, args.out or _default_out())
    print(_fit_line(result))
    return EXIT_OK


def cmd_surface(args):
    grid = dispersion_grid(Family.parse(args.family), args.resolution)
    out = args.out or _default_out() / f"surface-{grid.family.value}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    grid.write_csv(out)
    _echo("surface", {"family": grid.family.value, "resolution": args.resolution,
                      "rows": len(grid), "out": out})
    return EXIT_OK


def cmd_compare(args):
    names = [p.name for p in experiments.catalog()]
    if args.presets:
        names = [s.strip() for s in args.presets.split(",") if s.strip()]
    presets = [experiments.get_preset(n) for n in names]
    return compare_presets(presets, args.threads or _default_threads(), args.out)


def compare_presets(presets, threads, out_dir=None):
    results = [experiments.run_custom(p, threads=threads, metadata={"threads": threads})
               for p in presets]
    table = experiments.report_table(results)
    print(table)
    if out_dir is not None:
        for r in results:
            _write_outputs(r, out_dir)
        (out_dir / "report.csv").write_text(table + "\n")
    return EXIT_OK if all(r.passed is not False for r in results) else EXIT_MISMATCH


COMMANDS = {"list": cmd_list, "run": cmd_run, "sweep": cmd_sweep,
            "surface": cmd_surface, "compare": cmd_compare}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        unknown = getattr(_subparsers(parser)[args.command], "_config_unknown", set())
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(sorted(unknown))}")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
