"""Chain parameters, dispersion relation, pairing function and correlation symbol.

The chain has nearest-neighbour hopping, chemical potential ``h`` and a
pairing between sites at distance ``l`` of strength ``cos(l*phi) / l**zeta``.
In momentum space this gives

    eps(theta)    = h + 2 cos(theta)
    G(theta)      = 2i sum_l cos(l*phi) sin(l*theta) / l**zeta
    Lambda(theta) = sqrt(eps**2 + |G|**2)

and the 2x2 correlation symbol ``(1/Lambda) [[eps, G], [-G, -eps]]``.

Two evaluation modes exist. ``lattice`` sums the pairing over
``l = 1 .. N/2 - 1`` on a ring of ``N`` sites. ``limit`` uses the exact
thermodynamic-limit closed form, available only for ``zeta = 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ParameterError, SingularPointError, UnsupportedModeError

LATTICE = "lattice"
LIMIT = "limit"
MODES = (LATTICE, LIMIT)

AUTO = "auto"
PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"
BOUNDARIES = (AUTO, PERIODIC, ANTIPERIODIC)

#: Marker returned by :func:`classify_regime` on the zeta = 1 line.
CRITICAL_LINE = "critical-line zeta=1"

#: Ring size used when a lattice quantity is requested without a system size.
DEFAULT_RING_SIZE = 4096

_PARAM_ATOL = 1e-12


def is_unit_exponent(zeta: float) -> bool:
    return math.isclose(zeta, 1.0, rel_tol=0.0, abs_tol=_PARAM_ATOL)


def gap_closing_momentum(h: float) -> Optional[float]:
    """Momentum where ``h + 2cos(theta)`` and the pairing vanish together.

    Returns ``pi`` for h = 2, ``0`` for h = -2 and ``None`` otherwise.
    """
    if math.isclose(h, 2.0, rel_tol=0.0, abs_tol=_PARAM_ATOL):
        return math.pi
    if math.isclose(h, -2.0, rel_tol=0.0, abs_tol=_PARAM_ATOL):
        return 0.0
    return None


def default_ring_size(xlen: int) -> int:
    """Ring size policy for lattice computations on an interval of ``xlen`` sites.

    The smallest power of two that is at least ``max(4096, 64 * xlen)``. The
    factor 64 keeps the finite-ring error of slowly decaying pairings
    (zeta < 1, error roughly proportional to xlen / N) below the tolerance of
    slope fits up to xlen = 1000.
    """
    target = max(DEFAULT_RING_SIZE, 64 * int(xlen))
    return 1 << (target - 1).bit_length()


@dataclass(frozen=True)
class ChainParams:
    """Physical and numerical configuration of the chain.

    Parameters
    ----------
    h : float
        Chemical potential.
    zeta : float
        Pairing decay exponent, strictly positive.
    phi : float
        Pairing modulation angle in ``[0, pi)``; 0 gives the unmodulated chain.
    mode : {"lattice", "limit"}
        Finite ring or thermodynamic limit. ``limit`` requires ``zeta = 1``.
    ring_size : int, optional
        Number of ring sites in lattice mode (even, at least 4). ``None``
        lets each computation pick :func:`default_ring_size`.
    boundary : {"auto", "periodic", "antiperiodic"}
        Momentum grid in lattice mode. ``periodic`` uses ``2 pi j / N`` and
        refuses grids that hit a gapless momentum; ``antiperiodic`` uses
        ``2 pi (j + 1/2) / N``; ``auto`` uses the periodic grid and gives
        gapless momenta a vanishing symbol (equal mixture of the degenerate
        ground states).
    """

    h: float
    zeta: float = 1.0
    phi: float = 0.0
    mode: str = LATTICE
    ring_size: Optional[int] = None
    boundary: str = AUTO

    def __post_init__(self):
        for name in ("h", "zeta", "phi"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.integer, np.floating)) or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.zeta <= 0:
            raise ParameterError(f"zeta must be positive, got {self.zeta}")
        if not 0.0 <= self.phi < math.pi:
            raise ParameterError(f"phi must lie in [0, pi), got {self.phi}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.boundary not in BOUNDARIES:
            raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.mode == LIMIT:
            if not is_unit_exponent(self.zeta):
                raise UnsupportedModeError(
                    f"limit mode needs zeta = 1 (closed-form pairing), got zeta = {self.zeta}"
                )
            if self.ring_size is not None:
                raise ParameterError("ring_size is meaningless in limit mode")
        elif self.ring_size is not None:
            n = self.ring_size
            if isinstance(n, bool) or int(n) != n or n < 4 or n % 2:
                raise ParameterError(f"ring_size must be an even integer >= 4, got {n!r}")
            object.__setattr__(self, "ring_size", int(n))

    @property
    def is_lattice(self) -> bool:
        return self.mode == LATTICE

    def resolved_ring_size(self, xlen: int = 1) -> int:
        """Ring size actually used for an interval of ``xlen`` sites."""
        if not self.is_lattice:
            raise UnsupportedModeError("limit mode has no ring size")
        return self.ring_size if self.ring_size is not None else default_ring_size(xlen)

    def with_ring_size(self, n: int) -> "ChainParams":
        return replace(self, ring_size=n)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SymbolSample:
    """Value of a 2x2 symbol at one momentum."""

    theta: float
    matrix: np.ndarray

    def is_involution(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix @ self.matrix, np.eye(2), rtol=0.0, atol=atol))


def wrap_angle(theta):
    """Map angles to ``[-pi, pi)``."""
    theta = np.asarray(theta, dtype=float)
    wrapped = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    # mod can return 2 pi for tiny negative inputs; fold back.
    wrapped = np.where(wrapped >= np.pi, wrapped - 2.0 * np.pi, wrapped)
    # Leave in-range angles bit-exact so comparisons with jump points hold.
    return np.where((theta >= -np.pi) & (theta < np.pi), theta, wrapped)


def hopping_term(h: float, theta):
    """``h + 2cos(theta)``, written so that its zeros at h = +-2 are exact."""
    theta = np.asarray(theta, dtype=float)
    if math.isclose(h, 2.0, rel_tol=0.0, abs_tol=0.0):
        return 4.0 * np.sin(0.5 * (np.pi - np.abs(theta))) ** 2
    if math.isclose(h, -2.0, rel_tol=0.0, abs_tol=0.0):
        return -4.0 * np.sin(0.5 * theta) ** 2
    return h + 2.0 * np.cos(theta)


def pairing_coefficients(params: ChainParams, ring_size: int) -> np.ndarray:
    """Real-space pairing amplitudes ``cos(l phi) / l**zeta`` for ``l = 1 .. N/2 - 1``."""
    l = np.arange(1, ring_size // 2, dtype=float)
    coeffs = l ** (-params.zeta)
    if params.phi:
        coeffs = coeffs * np.cos(l * params.phi)
    return coeffs


def lattice_momenta(ring_size: int, boundary: str = PERIODIC) -> np.ndarray:
    """Momentum grid ``2 pi (j + s) / N`` with s = 0 (periodic) or 1/2 (antiperiodic).

    Returned in FFT order, i.e. not wrapped into ``[-pi, pi)``.
    """
    shift = 0.5 if boundary == ANTIPERIODIC else 0.0
    return 2.0 * np.pi * (np.arange(ring_size) + shift) / ring_size


def lattice_pairing_grid(params: ChainParams, ring_size: int, boundary: str = PERIODIC) -> np.ndarray:
    """Imaginary part ``g`` of the lattice pairing ``G = i g`` on the momentum grid.

    Uses one FFT of the real-space amplitudes. On the periodic grid the
    values at momenta 0 and pi are exactly zero (odd function) and are set so.
    """
    n = ring_size
    amps = np.zeros(n, dtype=complex)
    coeffs = pairing_coefficients(params, n)
    l = np.arange(1, coeffs.size + 1)
    amps[1:coeffs.size + 1] = coeffs
    if boundary == ANTIPERIODIC:
        amps[1:coeffs.size + 1] *= np.exp(1j * np.pi * l / n)
    g = 2.0 * (n * np.fft.ifft(amps)).imag
    if boundary != ANTIPERIODIC:
        g[0] = 0.0
        g[n // 2] = 0.0
    return g


def _lattice_pairing_imag(params: ChainParams, theta: np.ndarray) -> np.ndarray:
    n = params.resolved_ring_size()
    coeffs = pairing_coefficients(params, n)
    flat = theta.ravel()
    g = 2.0 * _kernels.sine_series(flat, coeffs)
    # sin(l * theta) is exactly zero at 0 and -pi; the float series is not.
    g[(flat == 0.0) | (flat == -np.pi)] = 0.0
    return g.reshape(theta.shape)


def _limit_pairing_imag(params: ChainParams, theta: np.ndarray, side: Optional[str]) -> np.ndarray:
    # theta is already in [-pi, pi). Jumps take the right-lateral value unless
    # side == "minus", which nudges jump points onto the left branch.
    phi = params.phi
    minus = side == "minus"
    if phi == 0.0:
        # pi - (theta mod 2 pi), written so that g(-theta) = -g(theta) exactly.
        g = np.where(theta < 0.0, -np.pi - theta, np.pi - theta)
        if minus:
            g = np.where(theta == 0.0, -np.pi, g)
        return g
    g = np.where(theta < -phi, -(np.pi + theta), np.where(theta < phi, -theta, np.pi - theta))
    if minus:
        g = np.where(theta == phi, -phi, g)
        g = np.where(theta == -phi, -(np.pi - phi), g)
    return g


def pairing_imag(params: ChainParams, theta, side: Optional[str] = None):
    """Real array ``g`` with pairing ``G(theta) = i g(theta)``; see :func:`pairing`."""
    if side not in (None, "plus", "minus"):
        raise ParameterError(f"side must be 'plus' or 'minus', got {side!r}")
    th = wrap_angle(theta)
    if params.is_lattice:
        g = _lattice_pairing_imag(params, np.atleast_1d(th))
    else:
        g = _limit_pairing_imag(params, np.atleast_1d(th), side)
    return g.reshape(th.shape) if th.ndim else float(g[0])


def pairing(params: ChainParams, theta, side: Optional[str] = None):
    """Pairing function ``G(theta)``, purely imaginary and odd in theta.

    Parameters
    ----------
    params : ChainParams
    theta : float or array_like
        Momenta; wrapped into ``[-pi, pi)``.
    side : {None, "plus", "minus"}
        Which lateral value to return at a jump of the limit-mode closed
        form. ``None`` and ``"plus"`` give the right limit.

    Returns
    -------
    complex or ndarray of complex
    """
    g = pairing_imag(params, theta, side)
    return 1j * np.asarray(g) if np.ndim(g) else complex(0.0, g)


def dispersion(params: ChainParams, theta, side: Optional[str] = None):
    """Quasiparticle energy ``sqrt(eps**2 + |G|**2)``."""
    th = wrap_angle(theta)
    lam = np.hypot(hopping_term(params.h, th), pairing_imag(params, th, side))
    return lam if np.ndim(lam) else float(lam)


def symbol_matrix(params: ChainParams, theta, side: Optional[str] = None) -> np.ndarray:
    """Vectorized symbol: array of shape ``theta.shape + (2, 2)``.

    Raises
    ------
    SingularPointError
        If the dispersion vanishes at any requested momentum.
    """
    th = wrap_angle(theta)
    eps = hopping_term(params.h, th)
    g = pairing_imag(params, th, side)
    lam = np.hypot(eps, g)
    if np.any(lam == 0.0):
        bad = np.atleast_1d(th)[np.atleast_1d(lam) == 0.0][0]
        raise SingularPointError(float(bad))
    e, s = eps / lam, g / lam
    out = np.empty(np.shape(th) + (2, 2), dtype=complex)
    out[..., 0, 0] = e
    out[..., 1, 1] = -e
    out[..., 0, 1] = 1j * s
    out[..., 1, 0] = -1j * s
    return out


def symbol(params: ChainParams, theta: float, side: Optional[str] = None) -> SymbolSample:
    """Correlation symbol ``(1/Lambda) [[eps, G], [-G, -eps]]`` at one momentum."""
    th = float(wrap_angle(theta))
    return SymbolSample(th, symbol_matrix(params, th, side))


def jump_points(params: ChainParams) -> tuple:
    """Momenta in ``[-pi, pi)`` where the symbol is discontinuous (limit mode).

    Includes the pairing jumps (0 for phi = 0, +-phi otherwise) and the
    gap-closing momentum at h = +-2, where the symbol also jumps. The finite
    ring symbol is smooth, so lattice mode returns an empty tuple.
    """
    if params.is_lattice:
        return ()
    pts = {0.0} if params.phi == 0.0 else {-params.phi, params.phi}
    gap = gap_closing_momentum(params.h)
    if gap is not None:
        pts.add(-math.pi if gap == math.pi else gap)
    return tuple(sorted(pts))


def lateral_limits(params: ChainParams, theta: float):
    """Left and right limits ``(M_minus, M_plus)`` of the symbol at ``theta``.

    At pairing jumps the one-sided closed-form values are used. Where the
    dispersion vanishes (h = +-2 at the gap-closing momentum) the diagonal
    part goes to zero faster than the pairing, so each limit is the pure
    pairing matrix with the sign of the pairing on that side.
    """
    th = float(wrap_angle(theta))
    limits = []
    for side, sign in (("minus", -1.0), ("plus", 1.0)):
        if dispersion(params, th, side) == 0.0:
            s = float(np.sign(pairing_imag(params, th + sign * 1e-6)))
            limits.append(np.array([[0.0, 1j * s], [-1j * s, 0.0]]))
        else:
            limits.append(symbol_matrix(params, th, side))
    return tuple(limits)


def classify_regime(h: float, zeta: float):
    """Effective central charge of the long-distance entropy growth.

    Returns 0, 1/2 or 1 off the ``zeta = 1`` line and the marker
    :data:`CRITICAL_LINE` on it, where the coefficient is not of conformal
    form and comes from :mod:`lrkitaev.asymptotics`.
    """
    if zeta <= 0:
        raise ParameterError(f"zeta must be positive, got {zeta}")
    if is_unit_exponent(zeta):
        return CRITICAL_LINE
    gap = gap_closing_momentum(h)
    if zeta > 1.0:
        return 0.0 if gap is None else 0.5
    return 1.0 if gap == math.pi else 0.5
