"""Exact diagonalization of the chain on small rings.

The Hamiltonian is built directly in the ``2**N`` fermionic Fock space:

    H = sum_n [h a_n^+ a_n + (a_n^+ a_{n+1} + h.c.)]
        + sum_n sum_{l=1}^{N/2-1} s_l (a_n^+ a_{n+l}^+ + a_{n+l} a_n) - N h / 2

with ``s_l = cos(l phi) / l**zeta``. Periodic boundary conditions for the
fermions (``a_{n+N} = a_n``) match the periodic momentum grid; with
``boundary='antiperiodic'`` terms that wrap around the ring change sign.

When the ground state is degenerate (a gapless momentum on the grid) the
oracle keeps the whole lowest-energy manifold and works with its equal
mixture, which is what the correlation pipeline describes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import model
from ._kernels import apply_fermion, quadratic_coo
from .corr import CorrelationMatrix, build_correlation
from .errors import ConsistencyError, ParameterError, SizeError
from .model import ANTIPERIODIC, ChainParams
from .spectral import entropy as corr_entropy
from .spectral import _check_alpha

MIN_SITES = 4
MAX_SITES = 14
DENSE_SECTOR_LIMIT = 4096
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class FockState:
    """Ground-state manifold of the ring.

    Attributes
    ----------
    n_sites : int
    amplitudes : ndarray, shape (m, 2**n_sites)
        Orthonormal ground states; ``m > 1`` when degenerate. Quantities
        are averaged over them with equal weights.
    parity : ndarray of int, shape (m,)
        Fermion parity (+1 even, -1 odd) of each ground state.
    energy : float
        Ground-state energy.
    sector_energies : dict
        Lowest energy in the even (+1) and odd (-1) parity sectors.
    """

    n_sites: int
    amplitudes: np.ndarray
    parity: np.ndarray
    energy: float
    sector_energies: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def degeneracy(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def from_vector(cls, vector, n_sites: int) -> "FockState":
        """Wrap a single normalized state (e.g. an engineered test state)."""
        vec = np.asarray(vector)
        norm = np.linalg.norm(vec)
        if vec.size != 1 << n_sites or not math.isclose(norm, 1.0, abs_tol=1e-12):
            raise ParameterError("vector must be normalized and of length 2**n_sites")
        states = np.arange(vec.size)
        par = 1 - 2 * (np.bitwise_count(states).astype(np.int64) & 1)
        weight_even = float(np.sum(np.abs(vec[par == 1]) ** 2))
        parity = 1 if weight_even > 0.5 else -1
        return cls(n_sites, vec[None, :], np.array([parity]), float("nan"), {})


def _hamiltonian_terms(params: ChainParams, n_sites: int):
    """Operator-product terms ``coeff * O2 O1`` as parallel arrays."""
    twist = -1.0 if params.boundary == ANTIPERIODIC else 1.0
    first_site, first_create, second_site, second_create, coeff = [], [], [], [], []

    def add(s1, c1, s2, c2, value):
        first_site.append(s1)
        first_create.append(c1)
        second_site.append(s2)
        second_create.append(c2)
        coeff.append(value)

    for n in range(n_sites):
        add(n, 0, n, 1, params.h)  # a_n^+ a_n
        m = (n + 1) % n_sites
        sign = twist if n + 1 >= n_sites else 1.0
        add(m, 0, n, 1, sign)  # a_n^+ a_{n+1}
        add(n, 0, m, 1, sign)  # a_{n+1}^+ a_n
    amps = model.pairing_coefficients(params, n_sites)
    for l, s in enumerate(amps, start=1):
        for n in range(n_sites):
            m = (n + l) % n_sites
            value = s * (twist if n + l >= n_sites else 1.0)
            add(m, 1, n, 1, value)  # a_n^+ a_{n+l}^+
            add(n, 0, m, 0, value)  # a_{n+l} a_n
    return first_site, first_create, second_site, second_create, coeff


def hamiltonian(params: ChainParams, n_sites: int) -> scipy.sparse.csr_matrix:
    """Sparse many-body Hamiltonian on ``n_sites`` sites (including the ``-N h/2`` shift)."""
    dim = 1 << n_sites
    rows, cols, vals = quadratic_coo(n_sites, *_hamiltonian_terms(params, n_sites))
    ham = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    ham = ham - (0.5 * n_sites * params.h) * scipy.sparse.identity(dim, format="csr")
    ham.sum_duplicates()
    return ham


def _sector_lowest(block, k: int = 4):
    dim = block.shape[0]
    if dim <= DENSE_SECTOR_LIMIT:
        evals, evecs = np.linalg.eigh(block.toarray())
        return evals[:k], evecs[:, :k]
    evals, evecs = scipy.sparse.linalg.eigsh(block, k=k, which="SA", tol=1e-12)
    order = np.argsort(evals)
    return evals[order], evecs[:, order]


def exact_ground_state(params: ChainParams) -> FockState:
    """Ground state (manifold) of the ring by exact diagonalization.

    Requires lattice mode with an explicit even ``ring_size`` in
    ``[4, 14]``. The Hamiltonian conserves fermion parity, so each sector
    is diagonalized separately and both sector minima are reported.
    """
    if not params.is_lattice or params.ring_size is None:
        raise SizeError("the oracle needs lattice mode with an explicit ring_size")
    n_sites = params.ring_size
    if not MIN_SITES <= n_sites <= MAX_SITES:
        raise SizeError(f"ring_size must lie in [{MIN_SITES}, {MAX_SITES}], got {n_sites}")
    dim = 1 << n_sites
    ham = hamiltonian(params, n_sites)
    states = np.arange(dim)
    parity_of = 1 - 2 * (np.bitwise_count(states).astype(np.int64) & 1)
    candidates = []
    sector_energies = {}
    for parity in (1, -1):
        idx = states[parity_of == parity]
        block = ham[idx][:, idx]
        evals, evecs = _sector_lowest(block)
        sector_energies[parity] = float(evals[0])
        for e, v in zip(evals, evecs.T):
            full = np.zeros(dim)
            full[idx] = v
            candidates.append((float(e), parity, full))
    energy = min(c[0] for c in candidates)
    tol = DEGENERACY_TOL * max(1.0, abs(energy))
    chosen = [c for c in candidates if c[0] - energy <= tol]
    amps = np.array([c[2] for c in chosen])
    return FockState(n_sites, amps, np.array([c[1] for c in chosen]), energy, sector_energies)


def bogoliubov_vacuum_energy(params: ChainParams) -> float:
    """``-(1/2) sum_k Lambda_k`` over the ring momenta of ``params``."""
    n = params.ring_size
    grid = ANTIPERIODIC if params.boundary == ANTIPERIODIC else model.PERIODIC
    theta = model.lattice_momenta(n, grid)
    eps = model.hopping_term(params.h, model.wrap_angle(theta))
    g = model.lattice_pairing_grid(params, n, grid)
    return -0.5 * float(np.sum(np.hypot(eps, g)))


def reduced_density_matrix(state: FockState, xlen: int) -> np.ndarray:
    """Density matrix of sites ``0 .. xlen-1`` (the low bits), averaged over the manifold.

    The first sites come first in the Jordan-Wigner order, so tracing out
    the remaining ones involves no string signs.
    """
    n = state.n_sites
    if not 1 <= xlen < n:
        raise SizeError(f"xlen must lie in [1, {n - 1}], got {xlen}")
    rho = np.zeros((1 << xlen, 1 << xlen), dtype=complex)
    for psi in state.amplitudes:
        mat = psi.reshape(1 << (n - xlen), 1 << xlen)
        rho += mat.T @ mat.conj()
    rho /= state.degeneracy
    trace = np.trace(rho).real
    if abs(trace - 1.0) > 1e-10:
        raise ConsistencyError(f"reduced density matrix has trace {trace!r}")
    return rho


def reduced_density_entropy(state: FockState, xlen: int, alpha: float) -> float:
    """Renyi entropy of the first ``xlen`` sites from the exact state."""
    alpha = _check_alpha(alpha)
    p = np.linalg.eigvalsh(reduced_density_matrix(state, xlen))
    p = p[p > 1e-15]
    if alpha == 1.0:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p ** alpha)) / (1.0 - alpha))


def correlation_from_state(state: FockState) -> CorrelationMatrix:
    """Full ``2N x 2N`` correlation matrix ``2 <Psi_n Psi_m^+> - delta`` with ``Psi_n = (a_n, a_n^+)``.

    Same interleaved layout as :func:`lrkitaev.corr.assemble_block_toeplitz`.
    """
    n = state.n_sites
    dense = np.zeros((2 * n, 2 * n), dtype=complex)
    for psi in state.amplitudes:
        created = np.array([apply_fermion(psi, n, m, 1) for m in range(n)])
        removed = np.array([apply_fermion(psi, n, m, 0) for m in range(n)])
        # <a_n a_m^+> = (a_n^+ psi, a_m^+ psi), <a_n a_m> = (a_n^+ psi, a_m psi), ...
        dense[0::2, 0::2] += created.conj() @ created.T
        dense[0::2, 1::2] += created.conj() @ removed.T
        dense[1::2, 0::2] += removed.conj() @ created.T
        dense[1::2, 1::2] += removed.conj() @ removed.T
    dense = 2.0 * dense / state.degeneracy - np.eye(2 * n)
    if np.max(np.abs(dense.imag)) < 1e-12:
        dense = dense.real
    return CorrelationMatrix.from_dense(dense, {"source": "exact diagonalization", "ring_size": n})


@dataclass(frozen=True)
class OracleComparison:
    params: ChainParams
    rows: list  # (xlen, alpha, S_exact, S_correlation)

    @property
    def max_abs_diff(self) -> float:
        return max(abs(a - b) for _, _, a, b in self.rows)


def compare_with_correlation(params: ChainParams, alphas=(1.0, 2.0, 3.0), xlens=None) -> OracleComparison:
    """Exact entropies against correlation-matrix entropies on the same ring."""
    state = exact_ground_state(params)
    n = params.ring_size
    xlens = range(1, n // 2 + 1) if xlens is None else xlens
    rows = []
    for x in xlens:
        corr = build_correlation(params, x)
        for a in alphas:
            rows.append((int(x), float(a), reduced_density_entropy(state, x, a), corr_entropy(corr, a)))
    return OracleComparison(params, rows)
