"""Block Toeplitz determinants and their asymptotics, checked numerically.

For a ``d x d`` matrix symbol ``M(theta)`` the block Toeplitz matrix of size
``n`` has blocks ``T[k, l] = (1/2pi) int M(theta) exp(i theta (k - l)) dtheta``,
so ``exp(i theta)`` sits on the block superdiagonal. For piecewise smooth
symbols

    log det T_n = n E[M] + b log n + O(1),

where ``E`` is the integral of ``log det M`` over the circle divided by
``2 pi`` and each jump with lateral limits ``(M-, M+)`` contributes
``(1/4pi**2) tr log**2(M- M+**-1)`` to ``b``. This module computes all three
pieces independently so they can be compared.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from scipy.integrate import quad_vec

from . import model
from .corr import fourier_blocks
from .errors import (BranchError, NonDiagonalizableError, ParameterError, SingularMatrixError,
                     StructureError, ToleranceError, WindingError)
from .model import ChainParams

DEFAULT_FIT_SIZES = (64, 91, 128, 181, 256, 362, 512)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Jump:
    """A jump of the symbol at ``theta`` with left/right limits ``minus``/``plus``."""

    theta: float
    minus: np.ndarray
    plus: np.ndarray


class BlockSymbol:
    """Matrix-valued symbol on the circle.

    Parameters
    ----------
    dim : int
        Block dimension ``d``.
    sampler : callable
        Maps an array of momenta of shape ``(m,)`` to an array ``(m, d, d)``.
    jumps : sequence of Jump
        Declared discontinuities; quadrature panels are split there.
    fourier : callable, optional
        ``fourier(n)`` returning the coefficients for ``k = -n+1 .. n-1`` as
        an array ``(2n-1, d, d)``. Overrides quadrature when the
        coefficients are known more cheaply (e.g. the chain symbol).
    """

    def __init__(self, dim: int, sampler: Callable, jumps=(), fourier: Optional[Callable] = None):
        self.dim = int(dim)
        self.sampler = sampler
        self.jumps = tuple(jumps)
        self._fourier = fourier
        self._coeff_cache: dict = {}

    def __call__(self, theta) -> np.ndarray:
        return np.asarray(self.sampler(np.atleast_1d(np.asarray(theta, dtype=float))), dtype=complex)

    def coefficients(self, n: int) -> np.ndarray:
        """Fourier coefficients for ``k = -n+1 .. n-1``, shape ``(2n-1, d, d)``."""
        for size, coeffs in self._coeff_cache.items():
            if size >= n:
                mid = size - 1
                return coeffs[mid - n + 1:mid + n]
        coeffs = self._fourier(n) if self._fourier is not None else symbol_fourier(self, n)
        self._coeff_cache[n] = coeffs
        return coeffs

    def times(self, c) -> "BlockSymbol":
        """Symbol ``M(theta) @ c`` for a constant matrix ``c``."""
        c = np.asarray(c, dtype=complex)
        fourier = None
        if self._fourier is not None:
            fourier = lambda n: self.coefficients(n) @ c  # noqa: E731
        jumps = [Jump(j.theta, j.minus @ c, j.plus @ c) for j in self.jumps]
        return BlockSymbol(self.dim, lambda t: self(t) @ c, jumps, fourier)

    def shifted(self, lam) -> "BlockSymbol":
        """Symbol ``lam * I - M(theta)``."""
        eye = np.eye(self.dim) * lam
        fourier = None
        if self._fourier is not None:
            def fourier(n):
                coeffs = -self.coefficients(n)
                coeffs[n - 1] += eye
                return coeffs
        jumps = [Jump(j.theta, eye - j.minus, eye - j.plus) for j in self.jumps]
        return BlockSymbol(self.dim, lambda t: eye - self(t), jumps, fourier)


def constant_symbol(c) -> BlockSymbol:
    c = np.atleast_2d(np.asarray(c, dtype=complex))

    def fourier(n):
        out = np.zeros((2 * n - 1,) + c.shape, dtype=complex)
        out[n - 1] = c
        return out

    return BlockSymbol(c.shape[0], lambda t: np.broadcast_to(c, (t.size,) + c.shape), fourier=fourier)


def chain_block_symbol(params: ChainParams) -> BlockSymbol:
    """The chain's 2x2 correlation symbol, with its jumps and exact coefficients.

    The coefficients come from :func:`lrkitaev.corr.fourier_blocks`, so the
    block Toeplitz matrix coincides with the correlation matrix of the
    interval.
    """
    def fourier(n):
        blocks = fourier_blocks(params, n)
        f = blocks.f_coeffs
        g = blocks.g_coeffs
        k = np.arange(-n + 1, n)
        fk = f[np.abs(k)]
        gk = np.sign(k) * g[np.abs(k)]
        out = np.empty((2 * n - 1, 2, 2), dtype=complex)
        out[:, 0, 0] = fk
        out[:, 1, 1] = -fk
        out[:, 0, 1] = -gk
        out[:, 1, 0] = gk
        return out

    jumps = []
    for theta in model.jump_points(params):
        minus, plus = model.lateral_limits(params, theta)
        jumps.append(Jump(theta, minus, plus))
    return BlockSymbol(2, lambda t: model.symbol_matrix(params, t), jumps, fourier)


def _panels(sym: BlockSymbol):
    edges = sorted({-math.pi, math.pi, *(float(model.wrap_angle(j.theta)) for j in sym.jumps)})
    return list(zip(edges[:-1], edges[1:]))


def symbol_fourier(sym: BlockSymbol, n: int, tol: float = 1e-12) -> np.ndarray:
    """Fourier coefficients ``(1/2pi) int M exp(-i k theta)`` for ``|k| < n``.

    Adaptive Gauss-Kronrod on panels split at the declared jumps.

    Raises
    ------
    ToleranceError
        If the estimated absolute error exceeds ``tol``.
    """
    k = np.arange(-n + 1, n, dtype=float)
    d = sym.dim

    def integrand(t):
        m = sym(t)[0]
        return (np.exp(-1j * k * t)[:, None, None] * m[None]).ravel()

    total = np.zeros((2 * n - 1) * d * d, dtype=complex)
    err_total = 0.0
    for a, b in _panels(sym):
        pts = np.linspace(a, b, max(2, int(n * (b - a) / (8 * math.pi)) + 2))[1:-1]
        res, err = quad_vec(integrand, a, b, epsabs=0.1 * tol * _TWO_PI, epsrel=0.0,
                            norm="max", points=pts if pts.size else None, limit=100000)
        total += res
        err_total += float(err)
    if err_total / _TWO_PI > tol:
        raise ToleranceError("symbol Fourier quadrature did not converge", error=err_total / _TWO_PI)
    return (total / _TWO_PI).reshape(2 * n - 1, d, d)


def block_toeplitz(sym: BlockSymbol, n: int) -> np.ndarray:
    """Dense ``(n d) x (n d)`` block Toeplitz matrix of the symbol."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    coeffs = sym.coefficients(n)
    idx = np.arange(n)
    blocks = coeffs[(idx[None, :] - idx[:, None]) + n - 1]  # (n, n, d, d), block (k, l) -> coeff(l - k)
    d = sym.dim
    dense = blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)
    if np.all(dense.imag == 0.0):
        dense = dense.real.copy()
    return dense


def _lu_log_det(matrix: np.ndarray) -> complex:
    with warnings.catch_warnings():
        # Exact singularity is reported below as SingularMatrixError.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        raise SingularMatrixError("matrix is exactly singular", rcond=0.0)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    anorm = np.abs(matrix).sum(axis=0).max()
    rcond, _ = gecon(lu, anorm, norm="1")
    if rcond < np.finfo(float).eps:
        raise SingularMatrixError(f"matrix singular to working precision (rcond={rcond:.3e})", rcond=rcond)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    return complex(np.sum(np.log(diag.astype(complex)))) + (1j * math.pi if swaps % 2 else 0.0)


def _nearest_branch(value: complex, reference: float) -> complex:
    turns = round((reference - value.imag) / _TWO_PI)
    return complex(value.real, value.imag + _TWO_PI * turns)


def _principal(value: complex) -> complex:
    return complex(value.real, math.remainder(value.imag, _TWO_PI))


def log_det(sym: BlockSymbol, lambda_shift=None, n: int = 1, reference: Optional[float] = None) -> complex:
    """``log det T_n[lambda I - M]`` (or of ``T_n[M]`` when ``lambda_shift`` is None).

    Pivoted LU; the log of the determinant is the sum of the complex logs of
    the pivots. The imaginary part is the principal value unless
    ``reference`` is given, in which case the branch closest to it is used.

    Raises
    ------
    SingularMatrixError
        Reciprocal condition number below machine epsilon.
    """
    target = sym.shifted(lambda_shift) if lambda_shift is not None else sym
    value = _lu_log_det(block_toeplitz(target, n))
    return _nearest_branch(value, reference) if reference is not None else _principal(value)


@dataclass(frozen=True)
class DetSeries:
    """``log det T_n`` for several sizes, on a continuous branch."""

    sizes: np.ndarray
    logdets: np.ndarray
    szego_term: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "re_logdet", "im_logdet", "szego_term"])
        for n, ld, sz in zip(self.sizes, self.logdets, self.szego_term):
            writer.writerow([int(n), f"{ld.real:.12g}", f"{ld.imag:.12g}", f"{sz.real:.12g}"])
        return buf.getvalue()


def det_series(sym: BlockSymbol, sizes, lambda_shift=None, jobs: int = 1) -> DetSeries:
    """Log-determinants for increasing sizes with incremental branch tracking.

    Each size is factorized independently (optionally on ``jobs`` threads);
    the imaginary parts are then chained so that consecutive sizes differ by
    the expected ``(n' - n) Im E`` rather than by arbitrary multiples of 2 pi.
    """
    sizes = np.asarray(sizes, dtype=int)
    if sizes.ndim != 1 or sizes.size == 0 or np.any(np.diff(sizes) <= 0) or sizes[0] < 1:
        raise ParameterError("sizes must be a strictly increasing sequence of positive integers")
    target = sym.shifted(lambda_shift) if lambda_shift is not None else sym
    target.coefficients(int(sizes[-1]))
    szego = szego_linear_term(target)

    def one(n):
        return _lu_log_det(block_toeplitz(target, int(n)))

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(one, sizes))
    else:
        raw = [one(n) for n in sizes]
    chained = [_principal(raw[0])]
    for prev_n, n, value in zip(sizes[:-1], sizes[1:], raw[1:]):
        expected = chained[-1].imag + (n - prev_n) * szego.imag
        chained.append(_nearest_branch(value, expected))
    return DetSeries(sizes, np.array(chained), sizes * szego)


def szego_linear_term(sym: BlockSymbol, subpanels: int = 16, order: int = 24) -> complex:
    """``(1/2pi) int log det M(theta) dtheta`` with a continuous log branch.

    Gauss-Legendre on panels split at the jumps; the phase of ``det M`` is
    unwrapped along the circle.

    Raises
    ------
    WindingError
        If the phase of ``det M`` changes by a non-zero multiple of 2 pi
        around the circle.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in _panels(sym):
        edges = np.linspace(a, b, subpanels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
            weights.append(0.5 * (hi - lo) * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    dets = np.linalg.det(sym(nodes))
    if np.any(dets == 0.0):
        raise SingularMatrixError("symbol determinant vanishes on the quadrature grid")
    phase = np.unwrap(np.angle(dets))
    # Close the loop: the phase just past pi must match the phase at -pi.
    closing = np.angle(dets[0] / dets[-1])
    winding = round((phase[-1] - phase[0] + closing) / _TWO_PI)
    if winding != 0:
        raise WindingError(f"det of the symbol winds {winding} times around zero")
    log_abs = np.log(np.abs(dets))
    value = complex(np.dot(weights, log_abs), np.dot(weights, phase)) / _TWO_PI
    return _principal(value) if value.imag else value


def discontinuity_coefficient(m_minus, m_plus) -> complex:
    """``(1/4pi**2) tr log**2(M- M+**-1)`` with the principal logarithm.

    Raises
    ------
    BranchError
        An eigenvalue of the ratio lies on the closed negative real axis.
    NonDiagonalizableError
        The ratio matrix is defective to working precision.
    """
    m_minus = np.atleast_2d(np.asarray(m_minus, dtype=complex))
    m_plus = np.atleast_2d(np.asarray(m_plus, dtype=complex))
    ratio = np.linalg.solve(m_plus.T, m_minus.T).T
    mu, vecs = np.linalg.eig(ratio)
    if np.linalg.cond(vecs) > 1e10:
        raise NonDiagonalizableError("jump ratio is not diagonalizable")
    scale = max(1.0, float(np.max(np.abs(mu))))
    on_cut = (np.abs(mu.imag) <= 1e-14 * scale) & (mu.real <= 0.0)
    if np.any(on_cut):
        raise BranchError("jump ratio has an eigenvalue on the negative real axis")
    return complex(np.sum(np.log(mu) ** 2) / (4.0 * math.pi ** 2))


def commuting_coefficient(m_minus, m_plus, tol: float = 1e-10) -> complex:
    """``(1/4pi**2) sum_j log**2(mu-_j / mu+_j)`` over a common eigenbasis.

    Only valid when the two limits commute and are diagonalizable.

    Raises
    ------
    StructureError
        If the matrices do not commute to ``tol`` (relative).
    """
    a = np.atleast_2d(np.asarray(m_minus, dtype=complex))
    b = np.atleast_2d(np.asarray(m_plus, dtype=complex))
    comm = np.linalg.norm(a @ b - b @ a) / max(1.0, np.linalg.norm(a) * np.linalg.norm(b))
    if comm > tol:
        raise StructureError(f"lateral limits do not commute (relative commutator {comm:.3e})")
    # A generic combination separates the common eigenvectors.
    _, vecs = np.linalg.eig(a + 0.6180339887498949 * b)
    inv = np.linalg.inv(vecs)
    mu_minus = np.diag(inv @ a @ vecs)
    mu_plus = np.diag(inv @ b @ vecs)
    return complex(np.sum(np.log(mu_minus / mu_plus) ** 2) / (4.0 * math.pi ** 2))


def widom_identity_residual(sym: BlockSymbol, c, n: int) -> float:
    """``|log D_n[M c] - log D_n[M] - n log det c|`` modulo 2 pi i."""
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    lhs = _lu_log_det(block_toeplitz(sym.times(c), n))
    rhs = _lu_log_det(block_toeplitz(sym, n)) + n * np.log(complex(np.linalg.det(c)))
    return abs(_principal(lhs - rhs))


@dataclass(frozen=True)
class LogCoefficientFit:
    """Least-squares fit of ``log D_n - n E`` against ``log n``."""

    b_fit: complex
    intercept: complex
    residual_norm: float
    szego_term: complex
    series: DetSeries = field(repr=False)


def fit_log_coefficient(sym: BlockSymbol, lam, sizes=DEFAULT_FIT_SIZES, jobs: int = 1) -> LogCoefficientFit:
    """Estimate the total log coefficient of ``log det T_n[lam I - M]``.

    Parameters
    ----------
    sym : BlockSymbol
        The unshifted symbol ``M``.
    lam : complex
        Shift; real ``lam`` in ``(1.2, 3]`` keeps clear of the spectrum.
    sizes : sequence of int
        At least four strictly increasing sizes.
    """
    sizes = np.asarray(sizes, dtype=int)
    if sizes.size < 4:
        raise ParameterError("need at least 4 sizes for the fit")
    series = det_series(sym, sizes, lam, jobs)
    szego = series.szego_term[0] / sizes[0]
    y = series.logdets - series.szego_term
    design = np.vstack([np.log(sizes), np.ones(sizes.size)]).T
    coef_re, res_re, *_ = np.linalg.lstsq(design, y.real, rcond=None)
    coef_im, res_im, *_ = np.linalg.lstsq(design, y.imag, rcond=None)
    resid = y - design @ (coef_re + 1j * coef_im)
    return LogCoefficientFit(complex(coef_re[0], coef_im[0]), complex(coef_re[1], coef_im[1]),
                             float(np.linalg.norm(resid)), complex(szego), series)
