"""Renyi entanglement entropies of the long-range Kitaev chain.

Correlation matrices of an interval are block Toeplitz matrices generated by
a 2x2 symbol; their spectra give the entropies, and block Toeplitz
determinant asymptotics give the logarithmic growth coefficients.
"""

__version__ = "0.1.0"

from .model import ChainParams, SymbolSample, classify_regime, dispersion, pairing, symbol  # noqa: E402
from .corr import CorrelationMatrix, build_correlation, fourier_blocks  # noqa: E402
from .spectral import EntropySpectrum, ScanResult, entropy, entropy_scan, mode_entropy, spectrum  # noqa: E402
from .asymptotics import AsymptoticPrediction, JumpAngle, predict_log_coefficient  # noqa: E402
from .analysis import LogFit, compare, fit_entropy_slope  # noqa: E402

__all__ = [
    "__version__",
    "ChainParams",
    "SymbolSample",
    "classify_regime",
    "dispersion",
    "pairing",
    "symbol",
    "CorrelationMatrix",
    "build_correlation",
    "fourier_blocks",
    "EntropySpectrum",
    "ScanResult",
    "entropy",
    "entropy_scan",
    "mode_entropy",
    "spectrum",
    "AsymptoticPrediction",
    "JumpAngle",
    "predict_log_coefficient",
    "LogFit",
    "compare",
    "fit_entropy_slope",
]
