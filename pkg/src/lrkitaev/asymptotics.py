"""Analytic logarithmic coefficients of the entanglement entropy.

At ``zeta = 1`` the symbol jumps at the pairing discontinuity, and the two
lateral limits do not commute. Each jump contributes a term
``B * log|X|`` to the entropy, where ``B`` depends on the jump only through
an angle: ``xi`` for the unmodulated chain, ``Delta xi / 2`` for the
modulated one. A gap closing at ``h = +-2`` adds the conformal term
``(alpha + 1) / (12 alpha)``. Off the ``zeta = 1`` line the coefficient is
``c (alpha + 1) / (6 alpha)`` with the effective central charge ``c`` from
:func:`lrkitaev.model.classify_regime`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BranchError, DomainError, UnsupportedModeError
from .model import CRITICAL_LINE, ChainParams, classify_regime, gap_closing_momentum
from .quadrature import tanh_sinh


@dataclass(frozen=True)
class JumpAngle:
    """Cosine and sine of the angle that parametrizes a non-commuting jump."""

    cos_xi: float
    sin_xi: float

    @property
    def angle(self) -> float:
        return math.atan2(self.sin_xi, self.cos_xi)

    @classmethod
    def from_angle(cls, angle: float) -> "JumpAngle":
        return cls(math.cos(angle), math.sin(angle))


class ModulatedJumpAngles(NamedTuple):
    xi_plus: float
    xi_minus: float
    delta_xi: float
    half_angle: JumpAngle


def jump_angle(h: float) -> JumpAngle:
    """Angle of the jump at ``theta = 0`` for the unmodulated chain at zeta = 1.

    ``cos xi = (h+2) / r`` and ``sin xi = pi / r`` with ``r = sqrt((h+2)**2 + pi**2)``.
    """
    r = math.hypot(h + 2.0, math.pi)
    return JumpAngle((h + 2.0) / r, math.pi / r)


def modulated_jump_angles(h: float, phi: float) -> ModulatedJumpAngles:
    """Angles ``xi+-`` on both sides of the jump at ``theta = phi``.

    The symbol there is ``cos(xi) sigma_z - sin(xi) sigma_y`` with
    ``tan(xi+) = (phi - pi) / (h + 2cos phi)`` and
    ``tan(xi-) = phi / (h + 2cos phi)``; the relevant angle of the jump is
    half of ``Delta xi = xi+ - xi-``.
    """
    if not 0.0 < phi < math.pi:
        raise DomainError(f"phi must lie in (0, pi), got {phi}")
    diag = h + 2.0 * math.cos(phi)
    xi_plus = math.atan2(phi - math.pi, diag)
    xi_minus = math.atan2(phi, diag)
    delta = xi_plus - xi_minus
    return ModulatedJumpAngles(xi_plus, xi_minus, delta, JumpAngle.from_angle(0.5 * delta))


def _check_off_cut(lam):
    lam = np.asarray(lam, dtype=complex)
    if np.any((lam.imag == 0.0) & (np.abs(lam.real) <= 1.0)):
        raise BranchError("lambda must lie off the segment [-1, 1]")
    return lam


def _scalar(x):
    return complex(x) if np.ndim(x) == 0 else x


def jump_coefficient(lam, angle: JumpAngle):
    """Log coefficient ``b_0(lambda)`` of ``log det(lambda - V_X)`` from one jump.

    ``(2/pi**2) log**2((sqrt(lambda**2 - cos**2 xi) + sin xi) / sqrt(lambda**2 - 1))``
    with principal branches.
    """
    lam = _check_off_cut(lam)
    c, s = abs(angle.cos_xi), abs(angle.sin_xi)
    ratio = (np.sqrt(lam * lam - c * c) + s) / np.sqrt(lam * lam - 1.0)
    return _scalar(2.0 / math.pi ** 2 * np.log(ratio) ** 2)


def eigenvalue_pair(lam, angle: JumpAngle):
    """Eigenvalues ``(mu+, mu-)`` of the jump ratio of ``lambda - symbol``.

    ``mu+- = (sqrt(lambda**2 - cos**2 xi) +- sin xi)**2 / (lambda**2 - 1)``,
    so that ``mu+ mu- = 1``.
    """
    lam = _check_off_cut(lam)
    c, s = abs(angle.cos_xi), abs(angle.sin_xi)
    root = np.sqrt(lam * lam - c * c)
    denom = lam * lam - 1.0
    return _scalar((root + s) ** 2 / denom), _scalar((root - s) ** 2 / denom)


def gap_closing_coefficient(lam):
    """Log coefficient ``b_pi(lambda) = (1/(2 pi**2)) log**2((lambda+1)/(lambda-1))``."""
    lam = _check_off_cut(lam)
    return _scalar(np.log((lam + 1.0) / (lam - 1.0)) ** 2 / (2.0 * math.pi ** 2))


def entropy_coefficient_quadrature(alpha: float, angle: JumpAngle, tol: float = 1e-12) -> float:
    """Entropy log coefficient of one jump, by tanh-sinh quadrature.

    Evaluates ``(2/pi**2) int_c^1 f_alpha'(x) log(sqrt(1-x**2) / (sqrt(x**2-c**2) + s)) dx``
    with ``c = |cos xi|`` and ``s = |sin xi|``. Valid for real ``alpha >= 1``.
    """
    alpha = float(alpha)
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    c, s = abs(angle.cos_xi), abs(angle.sin_xi)
    if s == 0.0:
        return 0.0

    def integrand(x, x_minus_c, one_minus_x):
        x = np.minimum(x, 1.0)
        if alpha == 1.0:
            deriv = -0.5 * np.log((1.0 + x) / one_minus_x)
        else:
            # f_alpha' written with the exact distance 1 - x.
            p = 1.0 + x
            deriv = alpha / (1.0 - alpha) * (p ** (alpha - 1) - one_minus_x ** (alpha - 1)) / (
                p ** alpha + one_minus_x ** alpha)
        num = np.sqrt(one_minus_x * (1.0 + x))
        den = np.sqrt(x_minus_c * (x + c)) + s
        return deriv * np.log(num / den)

    res = tanh_sinh(integrand, c, 1.0, tol=tol)
    return 2.0 / math.pi ** 2 * res.value


def entropy_coefficient_residues(alpha: int, angle: JumpAngle) -> float:
    """Entropy log coefficient of one jump for integer ``alpha >= 2``, in closed form.

    ``(1/(pi**2 (alpha-1))) sum_k arctan**2(s / sqrt(c**2 + tan**2(pi(2k-1)/(2 alpha))))``
    over ``k = 1 .. alpha``, skipping ``k = (alpha+1)/2`` for odd ``alpha``.
    """
    if int(alpha) != alpha or alpha < 2:
        raise DomainError(f"closed form needs an integer alpha >= 2, got {alpha}")
    alpha = int(alpha)
    c, s = abs(angle.cos_xi), abs(angle.sin_xi)
    total = 0.0
    for k in range(1, alpha + 1):
        if alpha % 2 == 1 and 2 * k == alpha + 1:
            continue
        pole = math.tan(math.pi * (2 * k - 1) / (2 * alpha))
        total += math.atan(s / math.sqrt(c * c + pole * pole)) ** 2
    return total / (math.pi ** 2 * (alpha - 1))


def entropy_coefficient(alpha: float, angle: JumpAngle) -> float:
    """Closed form for integer ``alpha >= 2``, quadrature otherwise."""
    if float(alpha).is_integer() and alpha >= 2:
        return entropy_coefficient_residues(int(alpha), angle)
    return entropy_coefficient_quadrature(alpha, angle)


def gap_closing_entropy_coefficient(alpha: float) -> float:
    """Conformal log coefficient ``(alpha + 1) / (12 alpha)`` of a gap closing."""
    alpha = float(alpha)
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    return (alpha + 1.0) / (12.0 * alpha)


@dataclass(frozen=True)
class Contribution:
    theta: float
    coefficient: float
    source: str


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Predicted coefficient of ``log|X|`` in the entropy, itemized by momentum."""

    h: float
    zeta: float
    phi: float
    alpha: float
    contributions: tuple
    total: float
    regime: object

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "zeta": self.zeta,
            "phi": self.phi,
            "alpha": self.alpha,
            "contributions": [
                {"theta": c.theta, "B": c.coefficient, "source": c.source} for c in self.contributions
            ],
            "total": self.total,
            "regime": self.regime,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def predict_log_coefficient(params: ChainParams, alpha: float) -> AsymptoticPrediction:
    """Total predicted slope of ``S_alpha`` against ``log|X|``.

    * zeta = 1, phi = 0: jump term at 0, plus the gap-closing term at pi if h = 2.
    * zeta = 1, phi > 0: one jump term at each of ``+-phi``, plus the
      gap-closing term if h = +-2.
    * zeta != 1: ``c (alpha+1) / (6 alpha)`` split per gapless or singular momentum.

    Raises
    ------
    UnsupportedModeError
        For ``phi > 0`` away from zeta = 1, where no prediction is available.
    """
    alpha = float(alpha)
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    h, zeta, phi = params.h, params.zeta, params.phi
    regime = classify_regime(h, zeta)
    gap = gap_closing_momentum(h)
    conformal = gap_closing_entropy_coefficient(alpha)
    items = []
    if regime == CRITICAL_LINE:
        if phi == 0.0:
            items.append(Contribution(0.0, entropy_coefficient(alpha, jump_angle(h)), "pairing jump"))
            if gap == math.pi:
                items.append(Contribution(math.pi, conformal, "gap closing"))
        else:
            half = modulated_jump_angles(h, phi).half_angle
            b = entropy_coefficient(alpha, half)
            items.append(Contribution(-phi, b, "pairing jump"))
            items.append(Contribution(phi, b, "pairing jump"))
            if gap is not None:
                items.append(Contribution(gap, conformal, "gap closing"))
    else:
        if phi != 0.0:
            raise UnsupportedModeError("no prediction for phi > 0 away from zeta = 1")
        # Each c = 1/2 unit contributes (alpha+1)/(12 alpha).
        if zeta < 1.0:
            items.append(Contribution(0.0, conformal, "pairing singularity"))
            if gap == math.pi:
                items.append(Contribution(math.pi, conformal, "gap closing"))
        elif gap is not None:
            items.append(Contribution(gap, conformal, "gap closing"))
    total = math.fsum(c.coefficient for c in items)
    return AsymptoticPrediction(h, zeta, phi, alpha, tuple(items), total, regime)


def regime_coefficient(c: float, alpha: float) -> float:
    """Conformal slope ``c (alpha + 1) / (6 alpha)``."""
    return c * (alpha + 1.0) / (6.0 * alpha)


__all__ = [
    "JumpAngle",
    "ModulatedJumpAngles",
    "Contribution",
    "AsymptoticPrediction",
    "jump_angle",
    "modulated_jump_angles",
    "jump_coefficient",
    "eigenvalue_pair",
    "gap_closing_coefficient",
    "entropy_coefficient_quadrature",
    "entropy_coefficient_residues",
    "entropy_coefficient",
    "gap_closing_entropy_coefficient",
    "predict_log_coefficient",
    "regime_coefficient",
]
