"""Block Toeplitz correlation matrix of an interval.

For an interval of ``xlen`` consecutive sites the correlation matrix is made
of 2x2 blocks ``[[F_d, g_d], [-g_d, -F_d]]`` with ``d = n - m``, where

    F_d = (1/2pi) int eps/Lambda cos(d theta) dtheta
    g_d = -(1/2pi) int g/Lambda sin(d theta) dtheta      (G = i g)

are Fourier coefficients of the symbol. In lattice mode the integrals are
exact discrete sums over the ring momenta (one FFT). In limit mode they are
computed by adaptive Gauss-Kronrod quadrature with panels split at the
symbol discontinuities.

Setting ``LRK_CACHE_DIR`` enables on-disk memoization of coefficient sets.
"""

from __future__ import annotations

import csv
import io
import math
import os
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from . import model
from .errors import SingularGridError, SizeError, ToleranceError
from .model import ANTIPERIODIC, PERIODIC, ChainParams

#: Symbol samples with dispersion below this are treated as gapless momenta.
ZERO_MODE_TOL = 1e-12

#: Absolute tolerance per Fourier coefficient in limit mode.
LIMIT_QUAD_TOL = 1e-13


@dataclass(frozen=True)
class FourierBlocks:
    """One-sided Fourier coefficients ``F_k, g_k`` for ``k = 0 .. size-1``.

    ``metadata`` records how they were computed (ring size, grid, number of
    gapless momenta given a zero symbol, quadrature error estimate).
    """

    f_coeffs: np.ndarray
    g_coeffs: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.f_coeffs.size

    def truncated(self, size: int) -> "FourierBlocks":
        return FourierBlocks(self.f_coeffs[:size], self.g_coeffs[:size], dict(self.metadata))

    def to_csv(self) -> str:
        """CSV text with columns ``k,F_k,g_k``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "F_k", "g_k"])
        for k, (f, g) in enumerate(zip(self.f_coeffs, self.g_coeffs)):
            writer.writerow([k, f"{f:.17g}", f"{g:.17g}"])
        return buf.getvalue()


def _lattice_blocks(params: ChainParams, ring_size: int, size: int) -> FourierBlocks:
    n = ring_size
    boundary = params.boundary
    grid = ANTIPERIODIC if boundary == ANTIPERIODIC else PERIODIC
    theta = model.lattice_momenta(n, grid)
    eps = model.hopping_term(params.h, model.wrap_angle(theta))
    g = model.lattice_pairing_grid(params, n, grid)
    lam = np.hypot(eps, g)
    gapless = lam <= ZERO_MODE_TOL
    if np.any(gapless):
        if boundary == PERIODIC:
            bad = float(model.wrap_angle(theta[gapless][0]))
            raise SingularGridError(
                f"dispersion vanishes at lattice momentum {bad!r} (N={n}); "
                "use the antiperiodic grid (boundary='antiperiodic') or boundary='auto'"
            )
        lam = np.where(gapless, 1.0, lam)
    e_ratio = np.where(gapless, 0.0, eps / lam)
    g_ratio = np.where(gapless, 0.0, g / lam)
    fe = np.fft.fft(e_ratio)
    fg = np.fft.fft(g_ratio)
    if grid == ANTIPERIODIC:
        twist = np.exp(-1j * np.pi * np.arange(n) / n)
        fe, fg = fe * twist, fg * twist
    meta = {
        "mode": "lattice",
        "ring_size": n,
        "grid": grid,
        "gapless_momenta": int(gapless.sum()),
    }
    return FourierBlocks(fe.real[:size] / n, fg.imag[:size] / n, meta)


def _limit_panels(params: ChainParams) -> list:
    # The symbol is even/odd in theta, so [0, pi] suffices; split at +phi.
    if params.phi > 0.0:
        return [(0.0, params.phi), (params.phi, math.pi)]
    return [(0.0, math.pi)]


def _limit_blocks(params: ChainParams, size: int) -> FourierBlocks:
    k = np.arange(size, dtype=float)

    def integrand(t):
        eps = model.hopping_term(params.h, t)
        g = model.pairing_imag(params, t)
        lam = math.hypot(eps, g)
        return np.concatenate([(eps / lam) * np.cos(k * t), -(g / lam) * np.sin(k * t)])

    total = np.zeros(2 * size)
    err_total = 0.0
    for a, b in _limit_panels(params):
        # Pre-split so each sub-panel sees a bounded number of oscillations.
        n_split = max(2, size // 8)
        pts = np.linspace(a, b, n_split)[1:-1]
        res, err = quad_vec(integrand, a, b, epsabs=LIMIT_QUAD_TOL, epsrel=0.0,
                            norm="max", points=pts, limit=100000)
        total += res
        err_total += float(err)
    total /= math.pi
    if err_total / math.pi > 1e-12:
        raise ToleranceError("limit-mode Fourier quadrature did not converge",
                             estimate=total, error=err_total / math.pi)
    meta = {"mode": "limit", "quad_error": err_total / math.pi}
    return FourierBlocks(total[:size], total[size:], meta)


def _compute_blocks(params: ChainParams, ring_size, size: int) -> FourierBlocks:
    if params.is_lattice:
        return _lattice_blocks(params, ring_size, size)
    return _limit_blocks(params, size)


_cache: dict = {}
_cache_lock = threading.Lock()
_disk_cache = None


def _disk_compute():
    global _disk_cache
    cache_dir = os.environ.get("LRK_CACHE_DIR")
    if not cache_dir:
        return None
    if _disk_cache is None or _disk_cache[0] != cache_dir:
        import joblib

        memory = joblib.Memory(cache_dir, verbose=0)
        _disk_cache = (cache_dir, memory.cache(_compute_blocks))
    return _disk_cache[1]


def _cache_key(params: ChainParams, ring_size):
    return (params.h, params.zeta, params.phi, params.mode, params.boundary, ring_size)


def fourier_blocks(params: ChainParams, xlen: int, ring_size=None) -> FourierBlocks:
    """Fourier coefficients ``F_k, g_k`` for ``k = 0 .. xlen-1``.

    Parameters
    ----------
    params : ChainParams
    xlen : int
        Interval length; coefficients up to ``xlen - 1`` are returned.
    ring_size : int, optional
        Override the ring size (lattice mode). Defaults to
        ``params.resolved_ring_size(xlen)``.

    Raises
    ------
    SingularGridError
        Periodic grid hitting a gapless momentum with ``boundary='periodic'``.
    """
    if int(xlen) != xlen or xlen < 1:
        raise SizeError(f"xlen must be a positive integer, got {xlen!r}")
    xlen = int(xlen)
    if params.is_lattice:
        n = ring_size if ring_size is not None else params.resolved_ring_size(xlen)
        if xlen > n:
            raise SizeError(f"interval of {xlen} sites does not fit on a ring of {n}")
    else:
        n = None
    key = _cache_key(params, n)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None and hit.size >= xlen:
        return hit.truncated(xlen)
    # Lattice coefficients are cheap; compute all N of them once.
    size = n if n is not None else xlen
    disk = _disk_compute()
    blocks = disk(params, n, size) if disk is not None else _compute_blocks(params, n, size)
    with _cache_lock:
        current = _cache.get(key)
        if current is None or current.size < blocks.size:
            _cache[key] = blocks
    return blocks.truncated(xlen)


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()


def assemble_block_toeplitz(f_coeffs, g_coeffs, xlen: int) -> np.ndarray:
    """Dense ``2 xlen x 2 xlen`` matrix with blocks ``[[F_d, g_d], [-g_d, -F_d]]``.

    Rows and columns are interleaved: index ``2n`` is the particle component
    of site ``n`` and ``2n + 1`` the hole component. ``g_d`` for negative
    ``d`` is ``-g_{|d|}``.
    """
    f = np.asarray(f_coeffs, dtype=float)[:xlen]
    g = np.asarray(g_coeffs, dtype=float)[:xlen]
    idx = np.arange(xlen)
    d = idx[:, None] - idx[None, :]
    fd = f[np.abs(d)]
    gd = np.sign(d) * g[np.abs(d)]
    dense = np.empty((2 * xlen, 2 * xlen))
    dense[0::2, 0::2] = fd
    dense[0::2, 1::2] = gd
    dense[1::2, 0::2] = -gd
    dense[1::2, 1::2] = -fd
    return dense


@dataclass(frozen=True)
class CorrelationMatrix:
    """Correlation matrix of an interval, immutable after construction.

    Attributes
    ----------
    xlen : int
    f_coeffs, g_coeffs : ndarray
        One-sided coefficients ``F_k, g_k`` for ``k = 0 .. xlen-1``; the
        negative-index ones follow from ``F_{-k} = F_k`` and ``g_{-k} = -g_k``.
    dense : ndarray
        The assembled real symmetric matrix.
    metadata : dict
    """

    xlen: int
    f_coeffs: np.ndarray
    g_coeffs: np.ndarray
    dense: np.ndarray
    metadata: dict = field(default_factory=dict)

    def two_sided(self):
        """Coefficients for ``k = -xlen+1 .. xlen-1`` as ``(k, F, g)`` arrays."""
        k = np.arange(-self.xlen + 1, self.xlen)
        f = self.f_coeffs[np.abs(k)]
        g = np.sign(k) * self.g_coeffs[np.abs(k)]
        return k, f, g

    def block(self, n: int, m: int) -> np.ndarray:
        return self.dense[2 * n:2 * n + 2, 2 * m:2 * m + 2]

    @classmethod
    def from_dense(cls, dense, metadata=None) -> "CorrelationMatrix":
        """Wrap a dense matrix; coefficients are read off its first block column."""
        dense = np.asarray(dense)
        xlen = dense.shape[0] // 2
        return cls(xlen, dense[0::2, 0].real.copy(), dense[0::2, 1].real.copy(),
                   dense, dict(metadata or {}))


def build_correlation(params: ChainParams, xlen: int, ring_size=None) -> CorrelationMatrix:
    """Correlation matrix of the first ``xlen`` sites in the ground state.

    Examples
    --------
    >>> from lrkitaev.model import ChainParams
    >>> v = build_correlation(ChainParams(h=1.0, zeta=1.0, ring_size=64), 3)
    >>> v.dense.shape
    (6, 6)
    """
    blocks = fourier_blocks(params, xlen, ring_size)
    dense = assemble_block_toeplitz(blocks.f_coeffs, blocks.g_coeffs, xlen)
    meta = dict(blocks.metadata)
    meta["xlen"] = int(xlen)
    return CorrelationMatrix(int(xlen), blocks.f_coeffs, blocks.g_coeffs, dense, meta)


def convergence_diagnostic(params: ChainParams, xlen: int, ring_size=None) -> float:
    """Max-norm change of the correlation matrix when the ring size doubles.

    Lattice mode only. Because the matrix entries are exactly the
    coefficients ``F_k, g_k``, this is their largest change over
    ``k < xlen``. At zeta = 1 the symbol has a jump and the change decays
    like ``1/N``; the value is reported, not enforced.
    """
    if not params.is_lattice:
        return 0.0
    n = ring_size if ring_size is not None else params.resolved_ring_size(xlen)
    a = fourier_blocks(params, xlen, n)
    b = fourier_blocks(params, xlen, 2 * n)
    return float(max(np.abs(a.f_coeffs - b.f_coeffs).max(), np.abs(a.g_coeffs - b.g_coeffs).max()))
