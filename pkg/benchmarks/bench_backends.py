"""Time each preset's energy sweep on the numba and numpy backends.

    python3 benchmarks/bench_backends.py [--repeat 3] [--presets 2d-square,1d-base]
"""
import argparse
import time

from lattice_casimir import experiments
from lattice_casimir.kernels import BACKENDS, HAS_NUMBA, use_backend
from lattice_casimir.zero_point import energy_curve


def time_sweep(preset, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        curve = energy_curve(preset.geom, preset.n_start, preset.n_end, preset.step, preset.chop,
                             threads=1)
        best = min(best, time.perf_counter() - t0)
    return best, curve


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--presets", help="comma-separated names (default: all)")
    args = ap.parse_args(argv)
    presets = experiments.catalog()
    if args.presets:
        presets = [experiments.get_preset(n.strip()) for n in args.presets.split(",")]
    backends = [b for b in BACKENDS if b != "numba" or HAS_NUMBA]
    print(f"{'preset':<18}" + "".join(f"{b + ' [s]':>14}" for b in backends)
          + f"{'speedup':>10}{'max rel diff':>14}")
    for p in presets:
        times, curves = {}, {}
        for b in backends:
            with use_backend(b):
                time_sweep(p, 1)  # JIT compile / warm caches
                times[b], curves[b] = time_sweep(p, args.repeat)
        row = f"{p.name:<18}" + "".join(f"{times[b]:>14.4f}" for b in backends)
        if len(backends) == 2:
            ref, fast = curves["numpy"].energy, curves["numba"].energy
            diff = max(abs(x - y) / abs(x) for x, y in zip(ref, fast))
            row += f"{times['numpy'] / times['numba']:>9.1f}x{diff:>14.1e}"
        print(row)


if __name__ == "__main__":
    main()
