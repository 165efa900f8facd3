"""Dispersion relations, bounded-region mode spectra and group velocities.

Natural units throughout: hbar = c = d = 1, so wavevector components are
radians per lattice step and frequencies are in units of c/d.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .kernels import CLAMP_TOL, RadicandError

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
GROUP_VELOCITY_STEP = 1e-6
_ZONE_TOL = 1e-12


class Family(str, enum.Enum):
    CHAIN = "chain"
    SQUARE = "square"
    SQUARE_DIAGONAL = "diagonal"
    TRIANGULAR = "triangular"
    SPACETIME_CHAIN = "spacetime-chain"
    SPACETIME_SQUARE = "spacetime-square"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown lattice family {value!r} (choose from {names})") from None

    @property
    def is_1d(self):
        return self in (Family.CHAIN, Family.SPACETIME_CHAIN)

    @property
    def is_spacetime(self):
        return self in (Family.SPACETIME_CHAIN, Family.SPACETIME_SQUARE)


HAMILTONIAN_FAMILIES = (Family.CHAIN, Family.SQUARE, Family.SQUARE_DIAGONAL, Family.TRIANGULAR)


class Wavevector(NamedTuple):
    k1: float
    k2: float = 0.0


@dataclass(frozen=True)
class LatticeGeometry:
    """Lattice family and size.

    ``Nx`` counts periodic steps along the barriers and ``Ny`` the steps
    between the fixed end barriers. For the 1D families ``Ny`` is the chain
    length N and ``Nx`` is fixed at 1. The step length, barrier length and
    mode-overcount divisor are locked to the family and exposed as
    properties. The two divisors only matter for ``spacetime-square``,
    where they truncate the barrier and perpendicular index ranges.
    """

    family: Family
    Nx: int
    Ny: int
    barrier_divisor: float = 4.001
    perp_divisor: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.family.is_1d:
            object.__setattr__(self, "Nx", 1)
        elif int(self.Nx) != self.Nx or self.Nx < 2:
            raise ValueError(f"Nx must be an integer >= 2, got {self.Nx}")
        if int(self.Ny) != self.Ny or self.Ny < 2:
            raise ValueError(f"Ny must be an integer >= 2, got {self.Ny}")
        object.__setattr__(self, "Nx", int(self.Nx))
        object.__setattr__(self, "Ny", int(self.Ny))
        if self.barrier_divisor <= 0 or self.perp_divisor <= 0:
            raise ValueError("truncation divisors must be positive")

    @classmethod
    def chain(cls, N, spacetime=False):
        return cls(Family.SPACETIME_CHAIN if spacetime else Family.CHAIN, 1, N)

    @property
    def step_perp(self):
        if self.family is Family.SQUARE_DIAGONAL:
            return SQRT2 / 2.0
        if self.family is Family.TRIANGULAR:
            return SQRT3 / 2.0
        return 1.0

    @property
    def barrier_step(self):
        """Length of one periodic step along the barrier."""
        if self.family is Family.SQUARE_DIAGONAL:
            return SQRT2 / 2.0
        return 1.0

    @property
    def barrier_length(self):
        if self.family.is_1d:
            return 1.0
        return self.barrier_step * self.Nx

    @property
    def mode_overcount(self):
        return 2.0 if self.family is Family.SQUARE_DIAGONAL else 1.0

    def to_dict(self):
        d = {"family": self.family.value, "Nx": self.Nx, "Ny": self.Ny}
        if self.family is Family.SPACETIME_SQUARE:
            d["barrier_divisor"] = self.barrier_divisor
            d["perp_divisor"] = self.perp_divisor
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(Family.parse(d["family"]), d["Nx"], d["Ny"],
                   d.get("barrier_divisor", 4.001), d.get("perp_divisor", 2.0))


@dataclass(frozen=True)
class ModeSpectrum:
    family: Family
    frequencies: np.ndarray = field(repr=False)
    index_bounds: tuple

    def __post_init__(self):
        freqs = np.array(self.frequencies, dtype=np.float64)
        freqs.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)

    def __len__(self):
        return self.frequencies.size

    def zero_point_energy(self):
        return 0.5 * math.fsum(self.frequencies)


# ---------------------------------------------------------------------------
# dispersion relations
# ---------------------------------------------------------------------------

def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _clamp_radicand(rad, what):
    rad = np.asarray(rad, dtype=np.float64)
    if np.any(rad < -CLAMP_TOL):
        raise RadicandError(f"negative radicand in {what} dispersion (min {rad.min():.3g})")
    return np.maximum(rad, 0.0)


def _check_zone(*ks):
    for k in ks:
        if np.any(np.abs(np.asarray(k, dtype=np.float64)) > math.pi + _ZONE_TOL):
            raise ValueError("wavevector outside the first Brillouin zone (-pi, pi]")


def omega_chain(k):
    """Chain dispersion ``2 sin(|k|/2)``."""
    _check_zone(k)
    return _out(2.0 * np.abs(np.sin(np.asarray(k, dtype=np.float64) / 2.0)))


def omega_square(k1, k2):
    _check_zone(k1, k2)
    return _out(_omega_square_raw(np.asarray(k1, dtype=np.float64),
                                  np.asarray(k2, dtype=np.float64)))


def _omega_square_raw(k1, k2):
    return 2.0 * np.sqrt(np.sin(k1 / 2.0) ** 2 + np.sin(k2 / 2.0) ** 2)


def omega_diagonal(k_par, k_perp):
    """Square lattice with wavevector components taken along the diagonals."""
    k_par = np.asarray(k_par, dtype=np.float64)
    k_perp = np.asarray(k_perp, dtype=np.float64)
    rad = 1.0 - np.cos(k_par / SQRT2) * np.cos(k_perp / SQRT2)
    return _out(2.0 * np.sqrt(_clamp_radicand(rad, "diagonal")))


def omega_triangular(kx, ky):
    """Triangular lattice, Cartesian components, speed normalised to one."""
    kx = np.asarray(kx, dtype=np.float64)
    ky = np.asarray(ky, dtype=np.float64)
    rad = 3.0 - np.cos(kx) - 2.0 * np.cos(SQRT3 / 2.0 * ky) * np.cos(kx / 2.0)
    return _out(2.0 / SQRT3 * np.sqrt(_clamp_radicand(rad, "triangular")))


def spacetime_radicand(k1, k2):
    return np.sin(np.asarray(k1, dtype=np.float64) / 2.0) ** 2 + \
        np.sin(np.asarray(k2, dtype=np.float64) / 2.0) ** 2


def omega_spacetime_square(k1, k2):
    """Fully discrete square lattice: ``sin^2(w/2) = sin^2(k1/2) + sin^2(k2/2)``.

    Raises
    ------
    ValueError
        If the right-hand side exceeds one. Such wavevectors lie past the
        discrete-time high-energy cutoff (for ``k1 = k2`` the cutoff is
        ``|k_i| = pi/2``) and have no real frequency.
    """
    rad = spacetime_radicand(k1, k2)
    if np.any(rad > 1.0 + CLAMP_TOL):
        raise ValueError(
            "sin^2(k1/2) + sin^2(k2/2) > 1: wavevector beyond the discrete-time "
            "high-energy cutoff (k1/2 = k2/2 = pi/4 on the diagonal)")
    return _out(2.0 * np.arcsin(np.sqrt(np.minimum(rad, 1.0))))


def _raw_dispersion(family):
    # zone checks are skipped so finite differences may straddle the zone edge
    family = Family.parse(family)
    if family is Family.CHAIN:
        return lambda k1, k2: 2.0 * np.abs(np.sin(k1 / 2.0))
    if family is Family.SQUARE:
        return _omega_square_raw
    if family is Family.SQUARE_DIAGONAL:
        return omega_diagonal
    if family is Family.TRIANGULAR:
        return omega_triangular
    if family is Family.SPACETIME_SQUARE:
        return omega_spacetime_square
    raise ValueError(f"no dispersion relation is exposed for {family.value}")


def dispersion(family, k1, k2=0.0):
    """Evaluate the dispersion relation of ``family`` (arrays allowed)."""
    family = Family.parse(family)
    if family is Family.CHAIN:
        return omega_chain(k1)
    if family is Family.SQUARE:
        return omega_square(k1, k2)
    return _out(_raw_dispersion(family)(np.asarray(k1, dtype=np.float64),
                                        np.asarray(k2, dtype=np.float64)))


def group_velocity(family, k, h=GROUP_VELOCITY_STEP):
    """Group speed ``|grad_k omega|`` by central differences.

    ``k`` is a :class:`Wavevector` (or any ``(k1, k2)`` pair, components may
    be arrays). For the chain only ``k1`` is used.
    """
    family = Family.parse(family)
    f = _raw_dispersion(family)
    k1 = np.asarray(k[0], dtype=np.float64)
    k2 = np.asarray(k[1] if len(k) > 1 else 0.0, dtype=np.float64)
    d1 = (f(k1 + h, k2) - f(k1 - h, k2)) / (2.0 * h)
    if family is Family.CHAIN:
        return _out(np.abs(d1))
    d2 = (f(k1, k2 + h) - f(k1, k2 - h)) / (2.0 * h)
    return _out(np.hypot(d1, d2))


# ---------------------------------------------------------------------------
# zones and grids
# ---------------------------------------------------------------------------

def zone_bounds(family):
    """Bounding box ``((k1_lo, k1_hi), (k2_lo, k2_hi))`` of the first zone."""
    family = Family.parse(family)
    if family is Family.TRIANGULAR:
        return (-4.0 * math.pi / 3.0, 4.0 * math.pi / 3.0), \
            (-2.0 * math.pi / SQRT3, 2.0 * math.pi / SQRT3)
    if family is Family.SQUARE_DIAGONAL:
        return (-SQRT2 * math.pi, SQRT2 * math.pi), (-SQRT2 * math.pi, SQRT2 * math.pi)
    if family is Family.CHAIN:
        return (-math.pi, math.pi), (0.0, 0.0)
    return (-math.pi, math.pi), (-math.pi, math.pi)


def in_zone(family, k1, k2):
    """Membership of the first Brillouin zone (hexagonal for triangular)."""
    family = Family.parse(family)
    k1 = np.asarray(k1, dtype=np.float64)
    k2 = np.asarray(k2, dtype=np.float64)
    tol = 1e-12
    if family is Family.TRIANGULAR:
        edge = 2.0 * math.pi / SQRT3 + tol
        return (np.abs(k2) <= edge) & \
            (np.abs(SQRT3 / 2.0 * k1 + 0.5 * k2) <= edge) & \
            (np.abs(SQRT3 / 2.0 * k1 - 0.5 * k2) <= edge)
    if family is Family.SQUARE_DIAGONAL:
        return np.abs(k1) + np.abs(k2) <= SQRT2 * math.pi + tol
    return (np.abs(k1) <= math.pi + tol) & (np.abs(k2) <= math.pi + tol)


@dataclass(frozen=True)
class DispersionGrid:
    family: Family
    k1: np.ndarray
    k2: np.ndarray
    omega: np.ndarray
    vg: np.ndarray
    in_domain: np.ndarray

    def __len__(self):
        return self.k1.size

    def rows(self):
        for row in zip(self.k1, self.k2, self.omega, self.vg, self.in_domain):
            yield float(row[0]), float(row[1]), float(row[2]), float(row[3]), bool(row[4])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k1", "k2", "omega", "vg", "in_domain"])
            for k1, k2, om, vg, ok in self.rows():
                w.writerow([repr(k1), repr(k2), repr(om), repr(vg), int(ok)])


def dispersion_grid(family, resolution):
    """Uniform sampling of the zone's bounding box, endpoints included.

    ``in_domain`` marks first-zone membership; for ``spacetime-square`` it
    additionally requires a real frequency, and out-of-domain rows carry
    NaN for ``omega`` and ``vg``. Chains are sampled along ``k1`` only.
    """
    family = Family.parse(family)
    if family is Family.SPACETIME_CHAIN:
        raise ValueError("spacetime-chain has no dispersion surface (omega = k exactly)")
    resolution = int(resolution)
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    (a0, a1), (b0, b1) = zone_bounds(family)
    if family is Family.CHAIN:
        k1 = np.linspace(a0, a1, resolution)
        k2 = np.zeros_like(k1)
    else:
        g1, g2 = np.meshgrid(np.linspace(a0, a1, resolution),
                             np.linspace(b0, b1, resolution), indexing="ij")
        k1, k2 = g1.ravel(), g2.ravel()
    inside = in_zone(family, k1, k2)
    if family is Family.SPACETIME_SQUARE:
        inside = inside & (spacetime_radicand(k1, k2) <= 1.0 + CLAMP_TOL)
        omega = np.full(k1.shape, np.nan)
        vg = np.full(k1.shape, np.nan)
        if inside.any():
            omega[inside] = omega_spacetime_square(k1[inside], k2[inside])
            # finite differences need both neighbours inside the cutoff
            with np.errstate(invalid="ignore"):
                vg[inside] = _spacetime_vg_safe(k1[inside], k2[inside])
    else:
        f = _raw_dispersion(family)
        omega = np.asarray(f(k1, k2), dtype=np.float64)
        vg = np.asarray(group_velocity(family, (k1, k2)), dtype=np.float64)
    return DispersionGrid(family, k1, k2, omega, vg, inside)


def _spacetime_vg_safe(k1, k2, h=GROUP_VELOCITY_STEP):
    def f(a, b):
        rad = spacetime_radicand(a, b)
        return np.where(rad <= 1.0, 2.0 * np.arcsin(np.sqrt(np.minimum(rad, 1.0))), np.nan)
    d1 = (f(k1 + h, k2) - f(k1 - h, k2)) / (2.0 * h)
    d2 = (f(k1, k2 + h) - f(k1, k2 - h)) / (2.0 * h)
    return np.hypot(d1, d2)


# ---------------------------------------------------------------------------
# bounded-region spectra
# ---------------------------------------------------------------------------

def quantized_wavevectors(geom, gap_steps):
    """Wavevectors of the bounded region, in the family's coordinates.

    Returned as ``(k1, k2)`` arrays laid out like :func:`mode_spectrum`
    (barrier index outer). For chains ``k2`` is all zeros.
    """
    n = int(gap_steps)
    fam = geom.family
    if fam is Family.CHAIN:
        r = np.arange(1, n + 1, dtype=np.float64)
        return r * math.pi / (n + 1), np.zeros(n)
    r, s = np.meshgrid(np.arange(1, geom.Nx + 1, dtype=np.float64),
                       np.arange(1, n + 1, dtype=np.float64), indexing="ij")
    r, s = r.ravel(), s.ravel()
    if fam is Family.SQUARE:
        return 2.0 * math.pi * r / geom.Nx, math.pi * s / (n + 1)
    if fam is Family.SQUARE_DIAGONAL:
        return SQRT2 * 2.0 * math.pi * r / geom.Nx, SQRT2 * math.pi * s / (n + 1)
    if fam is Family.TRIANGULAR:
        return 2.0 * math.pi * r / geom.Nx, 2.0 * math.pi * s / (SQRT3 * (n + 1))
    raise ValueError(f"no mode spectrum for {fam.value}")


def mode_spectrum(geom, gap_steps):
    """All allowed frequencies of a region ``gap_steps`` steps wide.

    Periodic along the barrier (``Nx`` steps), fixed ends across it.
    """
    n = int(gap_steps)
    if n < 1:
        raise ValueError("gap_steps must be >= 1")
    fam = geom.family
    if fam.is_spacetime:
        raise ValueError(f"{fam.value} energies come from dedicated closed forms, not spectra")
    if fam is Family.CHAIN:
        r = np.arange(1, n + 1, dtype=np.float64)
        return ModeSpectrum(fam, 2.0 * np.sin(r * math.pi / (2.0 * (n + 1))), (n, 1))
    Nx = geom.Nx
    r = np.arange(1, Nx + 1, dtype=np.float64)[:, None]
    s = np.arange(1, n + 1, dtype=np.float64)[None, :]
    if fam is Family.SQUARE:
        w = 2.0 * np.sqrt(np.sin(r * math.pi / Nx) ** 2 + np.sin(s * math.pi / (2.0 * (n + 1))) ** 2)
    elif fam is Family.SQUARE_DIAGONAL:
        rad = 1.0 - np.cos(2.0 * math.pi * r / Nx) * np.cos(math.pi * s / (n + 1))
        w = 2.0 * np.sqrt(_clamp_radicand(rad, "diagonal"))
    else:
        rad = 3.0 - np.cos(2.0 * math.pi * r / Nx) - 2.0 * np.cos(s * math.pi / (n + 1)) * np.cos(math.pi * r / Nx)
        w = 2.0 / SQRT3 * np.sqrt(_clamp_radicand(rad, "triangular"))
    return ModeSpectrum(fam, w.ravel(), (Nx, n))
