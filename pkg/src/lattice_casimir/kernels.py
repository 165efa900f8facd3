"""Hot summation kernels for zero-point energies.

Two interchangeable implementations are provided for every kernel:

* ``numba``: explicit loops compiled with ``@njit``, Neumaier-compensated,
  barrier index outer and perpendicular index inner.
* ``numpy``: vectorised rows in fixed blocks, each row reduced with numpy's
  pairwise sum, row sums combined with :func:`math.fsum`.

Both orders are fixed, so every call is bit-reproducible for a given
backend. The default backend is chosen by the ``LATTICE_CASIMIR_BACKEND``
environment variable (``numba`` or ``numpy``); without it numba is used when
importable.
"""
from __future__ import annotations

import contextlib
import math
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


ENV_FLAG = "LATTICE_CASIMIR_BACKEND"
BACKENDS = ("numba", "numpy")

# Lattice-sum kinds; the integer codes are what the compiled kernel sees.
SQUARE = 0
DIAGONAL = 1
TRIANGULAR = 2
SPACETIME = 3

CLAMP_TOL = 1e-12
_ROW_BLOCK = 128
_INV_SQRT3 = 1.0 / math.sqrt(3.0)


class RadicandError(ValueError):
    """A square-root or arcsin argument fell outside its domain."""


def _default_backend():
    name = os.environ.get(ENV_FLAG, "").strip().lower()
    if not name:
        return "numba" if HAS_NUMBA else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"{ENV_FLAG}={name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAS_NUMBA:
        raise ImportError(f"{ENV_FLAG}=numba but numba is not installed")
    return name


_backend = _default_backend()


def get_backend():
    return _backend


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch the dispatch backend (benchmarks and tests)."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise ImportError("numba is not installed")
    previous, _backend = _backend, name
    try:
        yield
    finally:
        _backend = previous


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _sine_sum_loop(m, denom):
    # sum_{r=1}^{m} sin(r*pi / (2*denom))
    total = 0.0
    comp = 0.0
    theta = math.pi / (2.0 * denom)
    for r in range(1, m + 1):
        x = math.sin(r * theta)
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


@njit(cache=True, nogil=True)
def _index_tables(kind, g_max, s_max, denom, nb):
    # every dispersion is a function of per-index factors, so the
    # transcendental calls are O(g_max + s_max) rather than O(g_max * s_max)
    ga = np.empty(g_max + 1)
    gb = np.empty(g_max + 1)
    st = np.empty(s_max + 1)
    for g in range(1, g_max + 1):
        if kind == SQUARE or kind == SPACETIME:
            ga[g] = math.sin(g * math.pi / nb) ** 2
        elif kind == DIAGONAL:
            ga[g] = math.cos(2.0 * math.pi * g / nb)
        else:
            ga[g] = 3.0 - math.cos(2.0 * math.pi * g / nb)
            gb[g] = math.cos(g * math.pi / nb)
    for s in range(1, s_max + 1):
        if kind == SQUARE or kind == SPACETIME:
            st[s] = math.sin(s * math.pi / (2.0 * denom)) ** 2
        elif kind == DIAGONAL:
            st[s] = math.cos(math.pi * s / denom)
        else:
            st[s] = 2.0 * math.cos(s * math.pi / denom)
    return ga, gb, st


@njit(cache=True, nogil=True)
def _half_omega(kind, ga, gb, st):
    if kind == SQUARE:
        return math.sqrt(ga + st)
    if kind == DIAGONAL:
        rad = 1.0 - ga * st
        if rad < 0.0:
            if rad < -CLAMP_TOL:
                raise ValueError("negative radicand in diagonal dispersion")
            rad = 0.0
        return math.sqrt(rad)
    if kind == TRIANGULAR:
        rad = ga - st * gb
        if rad < 0.0:
            if rad < -CLAMP_TOL:
                raise ValueError("negative radicand in triangular dispersion")
            rad = 0.0
        return _INV_SQRT3 * math.sqrt(rad)
    # SPACETIME
    rad = st + ga
    if rad > 1.0:
        if rad > 1.0 + CLAMP_TOL:
            raise ValueError("wavevector beyond the discrete-time cutoff")
        rad = 1.0
    return math.asin(math.sqrt(rad))


@njit(cache=True, nogil=True)
def _lattice_sum_loop(kind, g_max, s_max, denom, nb):
    ga, gb, st = _index_tables(kind, g_max, s_max, denom, nb)
    total = 0.0
    comp = 0.0
    for g in range(1, g_max + 1):
        row = 0.0
        rcomp = 0.0
        for s in range(1, s_max + 1):
            x = _half_omega(kind, ga[g], gb[g], st[s])
            t = row + x
            if abs(row) >= abs(x):
                rcomp += (row - t) + x
            else:
                rcomp += (x - t) + row
            row = t
        row += rcomp
        t = total + row
        if abs(total) >= abs(row):
            comp += (total - t) + row
        else:
            comp += (row - t) + total
        total = t
    return total + comp


def numba_sine_sum(m, denom):
    if not HAS_NUMBA:
        raise ImportError("numba is not installed")
    return float(_sine_sum_loop(int(m), float(denom)))


def numba_lattice_sum(kind, g_max, s_max, denom, nb):
    if not HAS_NUMBA:
        raise ImportError("numba is not installed")
    try:
        return float(_lattice_sum_loop(int(kind), int(g_max), int(s_max),
                                       float(denom), float(nb)))
    except ValueError as exc:
        raise RadicandError(str(exc)) from None


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------

def numpy_sine_sum(m, denom):
    m = int(m)
    if m <= 0:
        return 0.0
    r = np.arange(1, m + 1, dtype=np.float64)
    return math.fsum(np.sin(r * (math.pi / (2.0 * denom))))


def _clamp_low(rad, what):
    if rad.size and rad.min() < -CLAMP_TOL:
        raise RadicandError(f"negative radicand in {what} dispersion")
    return np.maximum(rad, 0.0)


def _half_omega_block(kind, g, s, nb, denom):
    if kind == SQUARE:
        return np.sqrt(np.sin(g * math.pi / nb) ** 2
                       + np.sin(s * math.pi / (2.0 * denom)) ** 2)
    if kind == DIAGONAL:
        rad = 1.0 - np.cos(2.0 * math.pi * g / nb) * np.cos(math.pi * s / denom)
        return np.sqrt(_clamp_low(rad, "diagonal"))
    if kind == TRIANGULAR:
        rad = (3.0 - np.cos(2.0 * math.pi * g / nb)
               - 2.0 * np.cos(s * math.pi / denom) * np.cos(math.pi * g / nb))
        return _INV_SQRT3 * np.sqrt(_clamp_low(rad, "triangular"))
    if kind == SPACETIME:
        rad = np.sin(s * math.pi / (2.0 * denom)) ** 2 + np.sin(g * math.pi / nb) ** 2
        if rad.size and rad.max() > 1.0 + CLAMP_TOL:
            raise RadicandError("wavevector beyond the discrete-time cutoff")
        return np.arcsin(np.sqrt(np.minimum(rad, 1.0)))
    raise ValueError(f"unknown lattice-sum kind {kind}")


def numpy_lattice_sum(kind, g_max, s_max, denom, nb):
    g_max, s_max = int(g_max), int(s_max)
    if g_max <= 0 or s_max <= 0:
        return 0.0
    s = np.arange(1, s_max + 1, dtype=np.float64)[None, :]
    rows = []
    for start in range(1, g_max + 1, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, g_max + 1)
        g = np.arange(start, stop, dtype=np.float64)[:, None]
        rows.append(_half_omega_block(kind, g, s, float(nb), float(denom)).sum(axis=1))
    return math.fsum(np.concatenate(rows))


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def sine_sum(m, denom):
    """Sum of ``sin(r*pi/(2*denom))`` for ``r = 1..m``."""
    if _backend == "numba":
        return numba_sine_sum(m, denom)
    return numpy_sine_sum(m, denom)


def lattice_sum(kind, g_max, s_max, denom, nb):
    """Double sum of half-frequencies over ``g = 1..g_max``, ``s = 1..s_max``.

    Parameters
    ----------
    kind : int
        One of SQUARE, DIAGONAL, TRIANGULAR, SPACETIME.
    g_max, s_max : int
        Upper limits of the barrier-direction and perpendicular indices.
    denom : float
        Region size plus one (the fixed-end quantisation denominator).
    nb : float
        Periodic length along the barrier, in steps.
    """
    if _backend == "numba":
        return numba_lattice_sum(kind, g_max, s_max, denom, nb)
    return numpy_lattice_sum(kind, g_max, s_max, denom, nb)
