"""From an energy curve to a fitted Casimir force law ``F = -(1/A) / y**b``.

The derivative ``dU/dn`` is taken from a cubic interpolant through the
sampled energies, converted to a force per unit barrier length and fitted
by least squares on ``(ln y, -ln F)``: the slope is ``b``, the intercept
``ln A`` (``ln(A/pi)`` under the 1D convention ``F = -(pi/A) / y**b``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma, zeta


# zeta(-1), the regularised value of 1 + 2 + 3 + ...
ZETA_MINUS_ONE = -1.0 / 12.0


class Convention(str, enum.Enum):
    ONE_D_WITH_PI = "OneD_with_pi"
    TWO_D_PER_LENGTH = "TwoD_per_length"

    @classmethod
    def for_geometry(cls, geom):
        return cls.ONE_D_WITH_PI if geom.family.is_1d else cls.TWO_D_PER_LENGTH


class DerivativeMethod(str, enum.Enum):
    NOT_A_KNOT = "not-a-knot"
    LOCAL_CUBIC = "local-cubic"


@dataclass(frozen=True)
class GeometryFactors:
    """Conversion from ``dU/dn`` of a curve to force per unit barrier length.

    The curve is assumed already divided by ``Nx`` (2D), so the remaining
    length divisor is the length of one barrier step.
    """

    dn_dy: float
    per_length_divisor: float
    overcount_divisor: float

    @classmethod
    def from_geometry(cls, geom):
        if geom.family.is_1d:
            return cls(1.0, 1.0, 1.0)
        return cls(1.0 / geom.step_perp, geom.barrier_step, geom.mode_overcount)

    @property
    def force_scale(self):
        return self.dn_dy / (self.per_length_divisor * self.overcount_divisor)


@dataclass(frozen=True)
class PowerLawFit:
    A: float
    b: float
    intercept: float
    slope: float
    max_abs_residual: float
    convention: Convention
    geometry: dict = field(default_factory=dict)
    # set only when the derivative changes sign and the fit runs on complex logs
    imag_intercept: float | None = None
    imag_slope: float | None = None
    n_nonpositive: int = 0

    def force(self, y):
        """Fitted (negative, attractive) force at distance ``y``."""
        pre = math.pi if self.convention is Convention.ONE_D_WITH_PI else 1.0
        return -pre / (self.A * np.asarray(y, dtype=np.float64) ** self.b)

    def to_dict(self):
        d = asdict(self)
        d["convention"] = self.convention.value
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["convention"] = Convention(d["convention"])
        return cls(**d)


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------

def _as_arrays(curve):
    if hasattr(curve, "samples"):
        return curve.n, curve.energy
    n, u = curve
    return np.asarray(n, dtype=np.float64), np.asarray(u, dtype=np.float64)


def _local_cubic_derivative(n, u):
    # piecewise cubic through the four samples around each interval, evaluated
    # at each sample from the interval to its left (first sample: to its right)
    m = len(n)
    out = np.empty(m)
    for i in range(m):
        lo = min(max(i - 2, 0), m - 4)
        xs, ys = n[lo:lo + 4], u[lo:lo + 4]
        # centring both axes keeps the Vandermonde solve well conditioned
        out[i] = np.polyval(np.polyder(np.polyfit(xs - n[i], ys - ys.mean(), 3)), 0.0)
    return out


def spline_derivative(curve, method=DerivativeMethod.NOT_A_KNOT):
    """``dU/dn`` of an interpolant through the samples, at the samples.

    Parameters
    ----------
    curve : EnergyCurve or (n, U) pair
    method : DerivativeMethod
        ``not-a-knot`` is a global cubic spline. ``local-cubic`` is the
        interpolating cubic through the four samples bracketing each point.

    Returns
    -------
    ndarray, shape (m, 2)
        Columns ``n`` and ``dU/dn``.
    """
    n, u = _as_arrays(curve)
    if n.size < 4:
        raise ValueError("at least 4 samples are needed for a cubic interpolant")
    if np.unique(n).size != n.size:
        raise ValueError("duplicate n values in energy curve")
    order = np.argsort(n)
    n, u = n[order], u[order]
    method = DerivativeMethod(method)
    if method is DerivativeMethod.NOT_A_KNOT:
        d = CubicSpline(n, u, bc_type="not-a-knot")(n, 1)
    else:
        d = _local_cubic_derivative(n, u)
    return np.column_stack([n, d])


def centered_difference_derivative(energy, ns, step):
    """``(U(n+step) - U(n-step)) / (2 step)`` for each ``n``; ``energy`` is a callable."""
    ns = np.asarray(ns)
    d = [(energy(int(n) + step) - energy(int(n) - step)) / (2.0 * step) for n in ns]
    return np.column_stack([ns.astype(np.float64), d])


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _ols(x, y):
    # explicit normal equations so complex ordinates work
    xm = x.mean()
    dx = x - xm
    slope = np.sum(dx * (y - y.mean())) / np.sum(dx * dx)
    return slope, y.mean() - slope * xm


def fit_power_law(derivs, geom, convention=None, allow_sign_change=False):
    """Fit ``-ln F = intercept + slope * ln y`` to derivative samples.

    Parameters
    ----------
    derivs : array-like, shape (m, 2)
        ``(n, dU/dn)`` rows, e.g. from :func:`spline_derivative`.
    geom : LatticeGeometry
    convention : Convention, optional
        Defaults to the geometry's convention.
    allow_sign_change : bool
        If true, nonpositive derivatives are accepted and the fit runs on
        complex logarithms; ``A``, ``b`` come from the real parts and the
        imaginary parts are kept on the result. Otherwise they are an error.
    """
    derivs = np.asarray(derivs, dtype=np.float64)
    if derivs.ndim != 2 or derivs.shape[1] != 2 or derivs.shape[0] < 3:
        raise ValueError("need at least 3 (n, dU/dn) rows")
    conv = Convention.for_geometry(geom) if convention is None else Convention(convention)
    n, d = derivs[:, 0], derivs[:, 1]
    force = d * GeometryFactors.from_geometry(geom).force_scale
    bad = int(np.sum(force <= 0))
    if bad and not allow_sign_change:
        raise ValueError(f"{bad} nonpositive derivative(s): no attractive power law to fit")
    x = np.log(geom.step_perp * n)
    if bad:
        y = -np.log(force.astype(np.complex128))
        slope_c, icept_c = _ols(x, y)
        slope, intercept = float(slope_c.real), float(icept_c.real)
        imag = (float(icept_c.imag), float(slope_c.imag))
        resid = y.real - (intercept + slope * x)
    else:
        y = -np.log(force)
        slope, intercept = (float(v) for v in _ols(x, y))
        imag = (None, None)
        resid = y - (intercept + slope * x)
    A = math.exp(intercept)
    if conv is Convention.ONE_D_WITH_PI:
        A *= math.pi
    return PowerLawFit(A, slope, intercept, slope, float(np.max(np.abs(resid))), conv,
                       geom.to_dict(), imag[0], imag[1], bad)


# ---------------------------------------------------------------------------
# reference forces
# ---------------------------------------------------------------------------

def zeta_force_1d(x):
    """Continuum 1D force ``-(d/dx) (pi/(2x)) * sum(r)`` with the sum set to zeta(-1)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("separation must be positive")
    out = math.pi / (2.0 * x ** 2) * ZETA_MINUS_ONE
    return float(out) if out.ndim == 0 else out


def chain_force_closed_form(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("separation must be positive")
    out = -math.pi / (24.0 * x ** 2)
    return float(out) if out.ndim == 0 else out


def dimreg_plate_force(D, a):
    """Dimensional-regularisation force per unit area between plates ``2a`` apart in D dimensions."""
    if D < 1 or a <= 0:
        raise ValueError("need D >= 1 and a > 0")
    return float(-D * gamma((D + 1) / 2.0) * zeta(D + 1)
                 / (math.pi ** ((D + 1) / 2.0) * 2.0 ** (D + 2) * a ** (D + 1)))
