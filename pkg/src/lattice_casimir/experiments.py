"""Named lattice configurations, the sweep pipeline and result persistence."""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .force_extract import (Convention, DerivativeMethod, PowerLawFit,
                            centered_difference_derivative, fit_power_law,
                            spline_derivative)
from .lattice_modes import Family, LatticeGeometry
from .zero_point import NO_CHOP, ChopSpec, EnergyCurve, curve_energy, energy_curve

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Reference:
    """Expected fit and the rule for accepting a run.

    With ``A_rel_tol`` set, ``A`` must be within that relative distance of
    the reference; with ``A_ratio`` set, ``A/A_ref`` must fall in the range.
    ``b_min_gap`` inverts the exponent test: ``|b - b_ref|`` must exceed it,
    for configurations that are expected *not* to give the reference law.
    """

    A: float | None
    b: float
    b_tol: float | None = 0.01
    A_rel_tol: float | None = 0.02
    A_ratio: tuple | None = None
    b_min_gap: float | None = None

    def check(self, fit):
        if self.b_min_gap is not None:
            return bool(abs(fit.b - self.b) > self.b_min_gap)
        ok = abs(fit.b - self.b) <= self.b_tol
        if self.A_rel_tol is not None:
            ok = ok and abs(fit.A - self.A) <= self.A_rel_tol * self.A
        if self.A_ratio is not None:
            lo, hi = self.A_ratio
            ok = ok and lo <= fit.A / self.A <= hi
        return bool(ok)

    def to_dict(self):
        return {"A": self.A, "b": self.b, "b_tol": self.b_tol, "A_rel_tol": self.A_rel_tol,
                "A_ratio": list(self.A_ratio) if self.A_ratio else None,
                "b_min_gap": self.b_min_gap}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("A_ratio") is not None:
            d["A_ratio"] = tuple(d["A_ratio"])
        return cls(**d)


def _chopped_reference(A, b):
    return Reference(A, b, b_tol=0.05, A_rel_tol=None, A_ratio=(0.7, 1.4))


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    geom: LatticeGeometry
    n_start: int
    n_end: int
    step: int
    chop: ChopSpec = NO_CHOP
    convention: Convention | None = None
    reference: Reference | None = None
    derivative: DerivativeMethod = DerivativeMethod.NOT_A_KNOT
    allow_sign_change: bool = False
    description: str = ""

    def __post_init__(self):
        if self.convention is None:
            object.__setattr__(self, "convention", Convention.for_geometry(self.geom))
        object.__setattr__(self, "convention", Convention(self.convention))
        object.__setattr__(self, "derivative", DerivativeMethod(self.derivative))
        if self.step < 1:
            raise ValueError(f"step must be >= 1, got {self.step}")
        if self.n_start >= self.n_end:
            raise ValueError(f"n_start={self.n_start} must be below n_end={self.n_end}")
        if not (1 <= self.n_start and self.n_end <= self.geom.Ny - 1):
            raise ValueError(f"n range {self.n_start}..{self.n_end} must lie in 1..{self.geom.Ny - 1}")

    def to_dict(self):
        return {
            "name": self.name,
            "geometry": self.geom.to_dict(),
            "n_start": self.n_start, "n_end": self.n_end, "step": self.step,
            "chop": self.chop.fraction,
            "convention": self.convention.value,
            "reference": self.reference.to_dict() if self.reference else None,
            "derivative": self.derivative.value,
            "allow_sign_change": self.allow_sign_change,
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d):
        ref = d.get("reference")
        return cls(d["name"], LatticeGeometry.from_dict(d["geometry"]), d["n_start"], d["n_end"],
                   d["step"], ChopSpec(d["chop"]), Convention(d["convention"]),
                   Reference.from_dict(ref) if ref else None, DerivativeMethod(d["derivative"]),
                   d["allow_sign_change"], d.get("description", ""))


def catalog():
    """The lattice runs reported with reference force-law constants."""
    chain = LatticeGeometry.chain(17620)
    sq = LatticeGeometry(Family.SQUARE, 860, 860)
    return [
        ExperimentPreset("1d-base", chain, 600, 705, 5, reference=Reference(24.11, 2.00),
                         description="chain N=17620"),
        ExperimentPreset("1d-large", LatticeGeometry.chain(90000), 600, 705, 5,
                         reference=Reference(24.54, 1.997), description="chain N=90000"),
        ExperimentPreset("1d-chop2", chain, 600, 705, 5, ChopSpec(0.002),
                         reference=_chopped_reference(33.53, 1.945),
                         description="chain, top 0.2% of N chopped"),
        ExperimentPreset("1d-chop5", chain, 600, 705, 5, ChopSpec(0.005),
                         reference=_chopped_reference(759.0, 1.42),
                         description="chain, top 0.5% of N chopped"),
        ExperimentPreset("2d-square", sq, 150, 190, 5, reference=Reference(20.89, 3.00),
                         description="square lattice 860x860"),
        ExperimentPreset("2d-square-chop2", sq, 150, 190, 5, ChopSpec(0.002),
                         reference=_chopped_reference(0.13, 4.22),
                         description="square lattice, top 0.2% of Nx chopped"),
        ExperimentPreset("2d-diagonal", LatticeGeometry(Family.SQUARE_DIAGONAL, 860, 860),
                         150, 190, 5, reference=Reference(20.90, 3.00),
                         description="square lattice, barriers at 45 degrees"),
        ExperimentPreset("2d-triangular", LatticeGeometry(Family.TRIANGULAR, 967, 967),
                         150, 190, 5, reference=Reference(20.91, 3.00),
                         description="triangular lattice 967x967"),
        ExperimentPreset("2d-spacetime", LatticeGeometry(Family.SPACETIME_SQUARE, 860, 860),
                         150, 190, 5, reference=Reference(None, 3.0, b_tol=None, A_rel_tol=None,
                                                          b_min_gap=0.5),
                         allow_sign_change=True,
                         description="discrete spacetime, wavevectors cut at pi/4"),
    ]


def get_preset(name):
    for p in catalog():
        if p.name == name:
            return p
    names = ", ".join(sorted(p.name for p in catalog()))
    raise KeyError(f"unknown preset {name!r} (available: {names})")


@dataclass(frozen=True)
class ExperimentResult:
    preset: ExperimentPreset
    fit: PowerLawFit
    curve: EnergyCurve
    wall_time: float
    passed: bool | None
    metadata: dict = field(default_factory=dict)

    @property
    def name(self):
        return self.preset.name

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "preset": self.preset.to_dict(),
            "fit": self.fit.to_dict(),
            "curve": self.curve.to_dict(),
            "wall_time": self.wall_time,
            "pass": self.passed,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d):
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaError(f"result schema version {version!r}, expected {SCHEMA_VERSION}")
        return cls(ExperimentPreset.from_dict(d["preset"]), PowerLawFit.from_dict(d["fit"]),
                   EnergyCurve.from_dict(d["curve"]), d["wall_time"], d["pass"],
                   d.get("metadata", {}))


def run_custom(preset, threads=None, metadata=None):
    """Energy sweep, derivative, power-law fit and reference check."""
    t0 = time.perf_counter()
    curve = energy_curve(preset.geom, preset.n_start, preset.n_end, preset.step,
                         preset.chop, threads=threads)
    derivs = spline_derivative(curve, preset.derivative)
    fit = fit_power_law(derivs, preset.geom, preset.convention, preset.allow_sign_change)
    wall = time.perf_counter() - t0
    passed = preset.reference.check(fit) if preset.reference else None
    log.info("%s: A=%.6g b=%.6g pass=%s (%.3fs)", preset.name, fit.A, fit.b, passed, wall)
    return ExperimentResult(preset, fit, curve, wall, passed, dict(metadata or {}))


def run_preset(name, threads=None, metadata=None):
    return run_custom(get_preset(name), threads=threads, metadata=metadata)


def finite_difference_fit(preset):
    """Same fit with centered differences of width ``2*step`` replacing the spline."""
    ns = np.arange(preset.n_start, preset.n_end + 1, preset.step)
    derivs = centered_difference_derivative(
        lambda n: curve_energy(preset.geom, n, preset.chop), ns, preset.step)
    return fit_power_law(derivs, preset.geom, preset.convention, preset.allow_sign_change)


def with_reference(preset, **changes):
    """Copy of ``preset`` with reference fields replaced (e.g. to force a failure)."""
    return replace(preset, reference=replace(preset.reference, **changes))


# ---------------------------------------------------------------------------
# persistence and reporting
# ---------------------------------------------------------------------------

def persist_result(result, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(result.to_dict(), indent=2))
    return path


def load_result(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no result file at {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None
    return ExperimentResult.from_dict(data)


REPORT_HEADER = "preset,A,b,A_ref,b_ref,pass,wall_time"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return f"{x:.6g}"


def report_table(results):
    lines = [REPORT_HEADER]
    for r in results:
        ref = r.preset.reference
        lines.append(",".join([
            r.name, _fmt(r.fit.A), _fmt(r.fit.b),
            _fmt(ref.A if ref else None), _fmt(ref.b if ref else None),
            _fmt(r.passed), f"{r.wall_time:.3f}",
        ]))
    return "\n".join(lines)
