"""Slope fits of entropy scans and comparison with analytic predictions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .asymptotics import AsymptoticPrediction
from .errors import ComparisonError, WindowError
from .spectral import ScanResult

#: Interval lengths below this are left out of fits by default.
DEFAULT_MIN_XLEN = 50
MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class LogFit:
    """Ordinary least squares ``S = slope * log|X| + intercept``."""

    slope: float
    intercept: float
    rms_residual: float
    window: tuple
    n_points: int
    slope_stderr: float

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "rms_residual": self.rms_residual,
            "window": list(self.window),
            "n_points": self.n_points,
            "slope_stderr": self.slope_stderr,
        }


def _resolve_window(window) -> tuple:
    if window is None:
        lo, hi = DEFAULT_MIN_XLEN, math.inf
    else:
        lo, hi = window
        lo = -math.inf if lo is None else lo
        hi = math.inf if hi is None else hi
    return lo, hi


def fit_log_slope(xlens, values, window=None) -> LogFit:
    """Fit ``values`` against ``log(xlens)`` over ``window = (min, max)`` (inclusive).

    Raises
    ------
    WindowError
        Fewer than four points inside the window.
    """
    xlens = np.asarray(xlens, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = _resolve_window(window)
    mask = (xlens >= lo) & (xlens <= hi)
    if mask.sum() < MIN_FIT_POINTS:
        raise WindowError(f"only {int(mask.sum())} points in window [{lo}, {hi}], need {MIN_FIT_POINTS}")
    x = np.log(xlens[mask])
    y = values[mask]
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([slope, intercept])
    dof = max(1, x.size - 2)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if sxx > 0 else math.inf
    used = xlens[mask]
    return LogFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))),
                  (int(used.min()), int(used.max())), int(mask.sum()), stderr)


def fit_entropy_slope(scan: ScanResult, window=None) -> LogFit:
    """Slope of ``S_alpha`` against ``log|X|``; default window drops ``|X| < 50``."""
    return fit_log_slope(scan.xlens, scan.entropies, window)


@dataclass(frozen=True)
class ComparisonReport:
    """Fitted against predicted slope.

    ``constant`` is the intercept that makes the predicted curve
    ``B log|X| + constant`` pass through the scan at the largest ``|X|`` of
    the window. ``rel_dev`` is ``None`` when the prediction is zero.
    """

    fitted_slope: float
    predicted_B: float
    abs_dev: float
    rel_dev: Optional[float]
    constant: float
    window: tuple
    fit: LogFit

    def to_dict(self) -> dict:
        return {
            "fitted_slope": self.fitted_slope,
            "predicted_B": self.predicted_B,
            "abs_dev": self.abs_dev,
            "rel_dev": self.rel_dev,
            "constant": self.constant,
            "window": list(self.window),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=1e-12)


def compare(scan: ScanResult, prediction: AsymptoticPrediction, window=None) -> ComparisonReport:
    """Fit the scan and report its deviation from the predicted slope.

    Raises
    ------
    ComparisonError
        If scan and prediction refer to different ``h, zeta, phi`` or ``alpha``.
    """
    p = scan.params
    pairs = [("h", p.h, prediction.h), ("zeta", p.zeta, prediction.zeta),
             ("phi", p.phi, prediction.phi), ("alpha", scan.alpha, prediction.alpha)]
    for name, a, b in pairs:
        if not _same(a, b):
            raise ComparisonError(f"{name} differs between scan ({a}) and prediction ({b})")
    fit = fit_entropy_slope(scan, window)
    b = prediction.total
    anchor = fit.window[1]
    s_anchor = float(scan.entropies[np.flatnonzero(scan.xlens == anchor)[0]])
    abs_dev = abs(fit.slope - b)
    rel_dev = abs_dev / abs(b) if b != 0.0 else None
    return ComparisonReport(fit.slope, b, abs_dev, rel_dev, s_anchor - b * math.log(anchor), fit.window, fit)
