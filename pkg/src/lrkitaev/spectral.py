"""Correlation-matrix spectra and Renyi entropies.

The entropy of an interval is a sum over the positive eigenvalues ``nu`` of
the correlation matrix, ``S_alpha = sum_l f_alpha(nu_l)``, with the
single-mode entropy

    f_alpha(x) = log(((1+x)/2)**alpha + ((1-x)/2)**alpha) / (1 - alpha)

and its von Neumann limit at ``alpha = 1``.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from . import __version__
from .corr import CorrelationMatrix, assemble_block_toeplitz, fourier_blocks
from .errors import DomainError, ParameterError, StructureError
from .model import ChainParams

PAIRING_TOL = 1e-10
EIGEN_TOL = 1e-10


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha < 1.0:
        raise DomainError(f"alpha must be a finite real >= 1, got {alpha}")
    return alpha


def _check_unit_interval(x) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=float))
    if np.any(x > 1.0 + EIGEN_TOL) or np.any(np.isnan(x)):
        raise DomainError("argument outside [-1, 1]")
    return np.minimum(x, 1.0)


def mode_entropy(alpha: float, x):
    """Entropy ``f_alpha(x)`` of one fermionic mode with correlation ``x``.

    Even in ``x``, maximal (``log 2``) at 0 and exactly zero at ``+-1``.

    Parameters
    ----------
    alpha : float
        Renyi index, at least 1.
    x : float or array_like
        Correlation eigenvalues in ``[-1, 1]`` (tolerance 1e-10).
    """
    alpha = _check_alpha(alpha)
    x = _check_unit_interval(x)
    p = 0.5 * (1.0 + x)
    q = 0.5 * (1.0 - x)
    if alpha == 1.0:
        out = -xlogy(p, p) - xlogy(q, q)
    else:
        with np.errstate(divide="ignore"):
            out = np.logaddexp(alpha * np.log(p), alpha * np.log(q)) / (1.0 - alpha)
        out = np.where(x == 1.0, 0.0, out)
    return out if out.ndim else float(out)


def mode_entropy_derivative(alpha: float, x):
    """Derivative ``f_alpha'(x)`` on ``(-1, 1)``; ``-artanh(x)`` at ``alpha = 1``."""
    alpha = _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    if alpha == 1.0:
        out = -np.arctanh(x)
    else:
        p, q = 1.0 + x, 1.0 - x
        out = alpha / (1.0 - alpha) * (p ** (alpha - 1) - q ** (alpha - 1)) / (p ** alpha + q ** alpha)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class EntropySpectrum:
    """Non-negative members ``nu`` (ascending) of the +-paired spectrum."""

    nu: np.ndarray
    pairing_error: float = 0.0

    def entropy(self, alpha: float) -> float:
        return float(np.sum(mode_entropy(alpha, self.nu)))


def spectrum(corr: CorrelationMatrix) -> EntropySpectrum:
    """Eigenvalues of the correlation matrix, reduced to the +-pairs.

    Raises
    ------
    StructureError
        If eigenvalues do not come in ``+-nu`` pairs to 1e-10 or leave
        ``[-1, 1]`` by more than 1e-10.
    """
    dense = corr.dense
    if np.iscomplexobj(dense):
        dense = 0.5 * (dense + dense.conj().T)
    w = np.linalg.eigvalsh(dense)
    n = corr.xlen
    pair_err = float(np.max(np.abs(w[:n] + w[::-1][:n]))) if n else 0.0
    if pair_err > PAIRING_TOL:
        raise StructureError(f"spectrum is not +-paired (max mismatch {pair_err:.3e})")
    if np.max(np.abs(w)) > 1.0 + EIGEN_TOL:
        raise StructureError(f"eigenvalue {np.max(np.abs(w))!r} outside [-1, 1]")
    nu = np.clip(0.5 * (w[n:] - w[:n][::-1]), 0.0, 1.0)
    return EntropySpectrum(nu, pair_err)


def entropy(corr: CorrelationMatrix, alpha: float) -> float:
    """Renyi entropy ``sum_l f_alpha(nu_l)`` of the interval."""
    return spectrum(corr).entropy(alpha)


def _entropy_from_blocks(f_coeffs, g_coeffs, xlen: int, alpha: float) -> float:
    dense = assemble_block_toeplitz(f_coeffs, g_coeffs, xlen)
    return entropy(CorrelationMatrix(xlen, f_coeffs[:xlen], g_coeffs[:xlen], dense), alpha)


@dataclass(frozen=True)
class ScanResult:
    """Entropies for a sequence of interval lengths."""

    params: ChainParams
    alpha: float
    xlens: np.ndarray
    entropies: np.ndarray
    metadata: dict = field(default_factory=dict)

    def header_lines(self) -> list:
        lines = [f"lrkitaev {__version__}", "command: scan"]
        for key, value in self.params.to_dict().items():
            lines.append(f"{key}: {value}")
        lines.append(f"alpha: {self.alpha!r}")
        for key, value in self.metadata.items():
            lines.append(f"{key}: {value}")
        return lines

    def to_csv(self) -> str:
        """CSV with ``#`` metadata lines, header ``xlen,entropy`` and 12 significant digits."""
        buf = io.StringIO()
        for line in self.header_lines():
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["xlen", "entropy"])
        for x, s in zip(self.xlens, self.entropies):
            writer.writerow([int(x), f"{s:.12g}"])
        return buf.getvalue()


def entropy_scan(params: ChainParams, alpha: float, xlens, jobs: int = 1) -> ScanResult:
    """Entropies for increasing interval lengths with one consistent ring size.

    The Fourier coefficients are computed once, for the largest interval
    (lattice mode: ring size ``params.resolved_ring_size(max(xlens))``). The
    per-length eigensolves run on ``jobs`` threads; results keep input order.
    """
    alpha = _check_alpha(alpha)
    xlens = np.asarray(xlens)
    if xlens.ndim != 1 or xlens.size == 0:
        raise ParameterError("xlens must be a non-empty 1-d sequence")
    if np.any(xlens != np.round(xlens)) or np.any(xlens < 1):
        raise ParameterError("xlens must be positive integers")
    xlens = xlens.astype(int)
    if np.any(np.diff(xlens) <= 0):
        raise ParameterError("xlens must be strictly increasing")
    xmax = int(xlens[-1])
    blocks = fourier_blocks(params, xmax)

    def one(x):
        return _entropy_from_blocks(blocks.f_coeffs, blocks.g_coeffs, int(x), alpha)

    if jobs is None or jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(one, xlens))
    else:
        values = [one(x) for x in xlens]
    meta = dict(blocks.metadata)
    if params.is_lattice:
        meta["ring_policy"] = "fixed" if params.ring_size else "max(4096, 64*max_xlen) rounded up to a power of two"
    return ScanResult(params, alpha, xlens, np.array(values), meta)
