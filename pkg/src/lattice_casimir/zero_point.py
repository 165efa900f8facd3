"""Zero-point energies of a lattice split by a movable barrier.

A lattice of ``Ny`` steps between two fixed barriers is divided by a third,
movable barrier into a gap of ``n`` steps and an environment of ``Ny - n``
steps. Energies are ``sum(omega / 2)`` over the modes of both regions, in
units of hbar*c/d.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .lattice_modes import Family, LatticeGeometry

_LATTICE_KIND = {
    Family.SQUARE: kernels.SQUARE,
    Family.SQUARE_DIAGONAL: kernels.DIAGONAL,
    Family.TRIANGULAR: kernels.TRIANGULAR,
}


@dataclass(frozen=True)
class ChopSpec:
    """Truncation of the highest-index modes.

    For 2D families the barrier-direction index of both regions runs to
    ``floor((1 - fraction) * Nx)``. For the chain the cut is applied to the
    lattice length N bounding the environment sum: its upper limit becomes
    ``floor((1 - fraction) * N) - n`` while the gap sum is untouched.
    """

    fraction: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.fraction < 1.0:
            raise ValueError(f"chop fraction must lie in [0, 1), got {self.fraction}")

    def limit(self, upper):
        return int(math.floor((1.0 - self.fraction) * upper))


NO_CHOP = ChopSpec()


@dataclass(frozen=True)
class EnergySample:
    n: int
    energy: float


@dataclass(frozen=True)
class EnergyCurve:
    geom: LatticeGeometry
    samples: tuple
    chop: ChopSpec = NO_CHOP
    normalization: str = "total"

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        ns = [s.n for s in self.samples]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("energy samples must be strictly increasing in n")

    @property
    def n(self):
        return np.array([s.n for s in self.samples], dtype=np.float64)

    @property
    def energy(self):
        return np.array([s.energy for s in self.samples], dtype=np.float64)

    def __len__(self):
        return len(self.samples)

    def metadata(self):
        return {
            "geometry": self.geom.to_dict(),
            "chop": {"fraction": self.chop.fraction},
            "normalization": self.normalization,
            "units": "hbar*c/d",
        }

    def to_dict(self):
        d = self.metadata()
        d["n"] = [s.n for s in self.samples]
        d["energy"] = [s.energy for s in self.samples]
        return d

    @classmethod
    def from_dict(cls, d):
        samples = [EnergySample(int(n), float(u)) for n, u in zip(d["n"], d["energy"])]
        return cls(LatticeGeometry.from_dict(d["geometry"]), samples,
                   ChopSpec(d["chop"]["fraction"]), d["normalization"])

    def write_csv(self, path):
        """Write ``n,energy`` rows plus a ``.json`` sidecar with the metadata."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "energy"])
            for s in self.samples:
                w.writerow([s.n, repr(s.energy)])
        path.with_suffix(".json").write_text(json.dumps(self.metadata(), indent=2))
        return path

    @classmethod
    def read_csv(cls, path):
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        meta["n"] = [int(r["n"]) for r in rows]
        meta["energy"] = [float(r["energy"]) for r in rows]
        return cls.from_dict(meta)


# ---------------------------------------------------------------------------
# region energies
# ---------------------------------------------------------------------------

def _region_energy(geom, m, chop, perp_limit=None):
    # energy of a region m steps wide; perp_limit overrides the fixed-end index range
    fam = geom.family
    s_max = m if perp_limit is None else perp_limit
    if s_max <= 0:
        return 0.0
    if fam is Family.CHAIN:
        return kernels.sine_sum(s_max, m + 1)
    if fam not in _LATTICE_KIND:
        raise ValueError(f"{fam.value} has no mode-sum energy; use the spacetime closed forms")
    return kernels.lattice_sum(_LATTICE_KIND[fam], chop.limit(geom.Nx), s_max, m + 1, geom.Nx)


def gap_energy(geom, n, chop=NO_CHOP):
    """Zero-point energy of a region ``n`` steps wide.

    Examples
    --------
    >>> round(gap_energy(LatticeGeometry.chain(10), 2), 5)
    1.36603
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"gap width must be >= 1 step, got {n}")
    return _region_energy(geom, n, chop)


def environment_energy(geom, n, chop=NO_CHOP):
    """Energy of the ``Ny - n`` steps between the movable and the far barrier."""
    m = geom.Ny - int(n)
    if geom.family is Family.CHAIN and chop.fraction:
        return _region_energy(geom, m, chop, perp_limit=min(m, chop.limit(geom.Ny) - int(n)))
    return _region_energy(geom, m, chop)


def _check_split(n, N):
    if not 1 <= n <= N - 1:
        raise ValueError(f"movable barrier position n={n} outside 1..{N - 1}")


def system_energy(geom, n, chop=NO_CHOP):
    """Gap plus environment energy for a barrier ``n`` steps from one end."""
    n = int(n)
    _check_split(n, geom.Ny)
    return gap_energy(geom, n, chop) + environment_energy(geom, n, chop)


# ---------------------------------------------------------------------------
# 1D closed forms
# ---------------------------------------------------------------------------

def lagrange_gap_sum(n):
    """Exact ``sum_{r=1}^{n} sin(r*pi/(2(n+1)))`` via Lagrange's identity."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    x = math.pi / (4.0 * (n + 1))
    return math.sin(n * x) * math.sin(math.pi / 4.0) / math.sin(x)


def lagrange_gap_sum_asymptotic(n):
    """Large-``n`` form ``cot(pi/(4(n+1)))/2``; exceeds the exact sum by 1/2."""
    return 0.5 / math.tan(math.pi / (4.0 * (int(n) + 1)))


def system_energy_chain_closed(n, N):
    n, N = int(n), int(N)
    _check_split(n, N)
    return lagrange_gap_sum(n) + lagrange_gap_sum(N - n)


def chain_closed_derivative(n, N):
    """Analytic ``d/dn`` of :func:`system_energy_chain_closed` (n treated as real)."""
    def du(m):
        x = math.pi / (4.0 * (m + 1))
        return 0.5 * x / ((m + 1) * math.sin(x) ** 2)
    return du(n) - du(N - n)


def spacetime_chain_system_energy(n, N):
    """Discrete-spacetime chain: ``omega = k`` makes each region linear in its width.

    The total is ``pi*N/4`` whatever the barrier position, so the force
    vanishes identically.
    """
    n, N = int(n), int(N)
    _check_split(n, N)
    return math.pi * N / 4.0


def spacetime_chain_direct_sum(n, N):
    """Mode-by-mode sum of ``pi*r/(2(m+1))`` over both regions (oracle)."""
    n, N = int(n), int(N)
    _check_split(n, N)

    def region(m):
        return math.fsum(math.pi * r / (2.0 * (m + 1)) for r in range(1, m + 1))
    return region(n) + region(N - n)


# ---------------------------------------------------------------------------
# discrete spacetime, 2D
# ---------------------------------------------------------------------------

def spacetime_truncation(m, Nx, barrier_divisor=4.001, perp_divisor=2.0):
    """Index limits ``(perp_max, barrier_max)`` for a region ``m`` steps wide."""
    return int(math.floor(m / perp_divisor)), int(math.floor(Nx / barrier_divisor))


def spacetime_max_radicand(m, Nx, barrier_divisor=4.001, perp_divisor=2.0):
    """Largest ``sin^2 + sin^2`` reached inside the truncated index ranges."""
    s_max, g_max = spacetime_truncation(m, Nx, barrier_divisor, perp_divisor)
    s = np.arange(1, s_max + 1, dtype=np.float64)
    g = np.arange(1, g_max + 1, dtype=np.float64)
    a = np.max(np.sin(s * math.pi / (2.0 * (m + 1))) ** 2, initial=0.0)
    b = np.max(np.sin(g * math.pi / Nx) ** 2, initial=0.0)
    return float(a + b)


def spacetime_square_system_energy(n, Nx, Ny, barrier_divisor=4.001, perp_divisor=2.0):
    """Truncated fully-discrete square-lattice energy, divided by ``Nx``.

    Each mode contributes ``arcsin(sqrt(sin^2(s*pi/(2(m+1))) + sin^2(g*pi/Nx)))``
    with ``s`` up to ``floor(m/perp_divisor)`` and ``g`` up to
    ``floor(Nx/barrier_divisor)``; the divisors keep every argument inside the
    discrete-time cutoff.
    """
    n = int(n)
    _check_split(n, Ny)
    total = 0.0
    for m in (n, Ny - n):
        s_max, g_max = spacetime_truncation(m, Nx, barrier_divisor, perp_divisor)
        total += kernels.lattice_sum(kernels.SPACETIME, g_max, s_max, m + 1, Nx)
    return total / Nx


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def curve_energy(geom, n, chop=NO_CHOP):
    """The quantity sampled into an :class:`EnergyCurve` for one ``n``.

    2D energies are divided by ``Nx`` (per periodic barrier step).
    """
    fam = geom.family
    if fam is Family.SPACETIME_CHAIN:
        return spacetime_chain_system_energy(n, geom.Ny)
    if fam is Family.SPACETIME_SQUARE:
        if chop.fraction:
            raise ValueError("chopping is not defined for the spacetime families")
        return spacetime_square_system_energy(n, geom.Nx, geom.Ny,
                                              geom.barrier_divisor, geom.perp_divisor)
    u = system_energy(geom, n, chop)
    return u if fam.is_1d else u / geom.Nx


def sample_points(n_start, n_end, step):
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    if n_start >= n_end:
        raise ValueError(f"n_start={n_start} must be below n_end={n_end}")
    return list(range(int(n_start), int(n_end) + 1, int(step)))


def energy_curve(geom, n_start, n_end, step, chop=NO_CHOP, threads=None):
    """Sample the system energy at ``n_start, n_start+step, ..., <= n_end``.

    Samples are independent and may be computed on ``threads`` workers;
    each sum has a fixed reduction order, so the result does not depend
    on the worker count.
    """
    ns = sample_points(n_start, n_end, step)
    if len(ns) < 4:
        raise ValueError(f"{len(ns)} samples from n={n_start}..{n_end} step {step}; "
                         "the spline needs at least 4")
    _check_split(ns[0], geom.Ny)
    _check_split(ns[-1], geom.Ny)
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            energies = list(pool.map(lambda n: curve_energy(geom, n, chop), ns))
    else:
        energies = [curve_energy(geom, n, chop) for n in ns]
    normalization = "total" if geom.family.is_1d else "per_barrier_step"
    return EnergyCurve(geom, [EnergySample(n, u) for n, u in zip(ns, energies)],
                       chop, normalization)
