import math

import numpy as np
import pytest

import reference_values as ref
from lrkitaev import toeplitzlab as tl
from lrkitaev.corr import build_correlation
from lrkitaev.errors import (BranchError, NonDiagonalizableError, ParameterError, SingularMatrixError,
                             StructureError, WindingError)
from lrkitaev.model import ChainParams

PI = math.pi


def limit(h, phi=0.0):
    return ChainParams(h, 1.0, phi, mode="limit")


def scalar_symbol(func, jumps=()):
    return tl.BlockSymbol(1, lambda t: func(t)[:, None, None], jumps)


def random_jump_symbol(seed):
    """Well-conditioned 2x2 symbol whose only jump sits at theta = 0.5.

    A sawtooth ramps from 0 just right of the jump to 1 just left of it, so
    the symbol is continuous everywhere else on the circle.
    """
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    jump = 1.5 * np.eye(2) + 0.5 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    base = 2.0 * np.eye(2) + 0.3 * a

    def sampler(t):
        ramp = np.mod(t - 0.5, 2 * PI) / (2 * PI)
        return base[None] + np.cos(t)[:, None, None] * b[None] + ramp[:, None, None] * jump[None]

    at_jump = base + math.cos(0.5) * b
    return tl.BlockSymbol(2, sampler, [tl.Jump(0.5, at_jump + jump, at_jump)])


def test_constant_symbol_is_block_diagonal():
    c = np.array([[1.0, 2.0], [0.5, -1.0]])
    np.testing.assert_allclose(tl.block_toeplitz(tl.constant_symbol(c), 3), np.kron(np.eye(3), c), atol=1e-13)


def test_exponential_sits_on_superdiagonal():
    sym = scalar_symbol(lambda t: np.exp(1j * t))
    np.testing.assert_allclose(tl.block_toeplitz(sym, 2), [[0, 1], [0, 0]], atol=1e-13)


def test_chain_symbol_reproduces_correlation_matrix():
    p = limit(0.3)
    v = build_correlation(p, 12)
    np.testing.assert_allclose(tl.block_toeplitz(tl.chain_block_symbol(p), 12), v.dense, atol=0)
    shifted = tl.block_toeplitz(tl.chain_block_symbol(limit(0.0)).shifted(2.0), 1)
    block0 = build_correlation(limit(0.0), 1).dense
    np.testing.assert_allclose(shifted, 2.0 * np.eye(2) - block0, atol=1e-15)
    expected = np.log(complex(np.linalg.det(2.0 * np.eye(2) - block0)))
    assert tl.log_det(tl.chain_block_symbol(limit(0.0)), 2.0, 1) == pytest.approx(expected, abs=1e-14)


def test_quadrature_fourier_matches_chain_coefficients():
    sym = tl.chain_block_symbol(limit(0.5, PI / 4))
    generic = tl.BlockSymbol(2, sym.sampler, sym.jumps)
    np.testing.assert_allclose(tl.symbol_fourier(generic, 9), sym.coefficients(9), atol=1e-11)


def test_identity_log_det():
    eye = tl.constant_symbol(np.eye(2))
    for n in (1, 5, 20):
        assert tl.log_det(eye, n=n) == 0


def test_szego_slope_of_determinants():
    sym = tl.chain_block_symbol(limit(0.0))
    d256 = tl.log_det(sym, 2.0, 256)
    d512 = tl.log_det(sym, 2.0, 512)
    assert ((d512 - d256) / 256).real == pytest.approx(math.log(3.0), rel=0.02)


@pytest.mark.parametrize("params", [limit(0.0), limit(2.0), limit(-2.0, 0.6), ChainParams(0.5, 1.5, ring_size=512)])
@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_szego_term_of_chain(params, lam):
    sym = tl.chain_block_symbol(params).shifted(lam)
    assert tl.szego_linear_term(sym) == pytest.approx(math.log(lam * lam - 1.0), abs=1e-12)


def test_szego_term_of_constant():
    c = np.array([[2.0, 1.0], [0.5, 3.0]])
    assert tl.szego_linear_term(tl.constant_symbol(c)) == pytest.approx(math.log(5.5), abs=1e-13)


def test_winding_symbol_is_rejected():
    with pytest.raises(WindingError):
        tl.szego_linear_term(scalar_symbol(lambda t: np.exp(1j * t)))


def test_singular_matrix():
    with pytest.raises(SingularMatrixError) as err:
        tl.log_det(tl.constant_symbol(np.array([[1.0, 2.0], [2.0, 4.0]])), n=3)
    assert err.value.rcond is not None


def test_discontinuity_examples():
    m = np.array([[2.0, 0.3], [0.1, 1.5]])
    assert tl.discontinuity_coefficient(m, m) == pytest.approx(0.0, abs=1e-30)
    a, b, c, d = 2.0, 3.0, 0.5, 1.7
    expected = (math.log(a / c) ** 2 + math.log(b / d) ** 2) / (4 * PI ** 2)
    assert tl.discontinuity_coefficient(np.diag([a, b]), np.diag([c, d])) == pytest.approx(expected, abs=1e-15)
    sym = tl.chain_block_symbol(limit(0.0)).shifted(2.0)
    (jump,) = sym.jumps
    value = tl.discontinuity_coefficient(jump.minus, jump.plus)
    assert value.real == pytest.approx(ref.B_JUMP[(0.0, 2.0)], abs=1e-13)
    assert abs(value.imag) < 1e-15


def test_gap_closing_jump_coefficient():
    sym = tl.chain_block_symbol(limit(2.0)).shifted(2.0)
    by_theta = {j.theta: tl.discontinuity_coefficient(j.minus, j.plus).real for j in sym.jumps}
    assert by_theta[-PI] == pytest.approx(ref.B_GAP_LAM2, abs=1e-13)
    assert by_theta[0.0] == pytest.approx(ref.B_JUMP[(2.0, 2.0)], abs=1e-13)


def test_discontinuity_errors():
    with pytest.raises(BranchError):
        tl.discontinuity_coefficient(np.diag([-1.0, 1.0]), np.eye(2))
    with pytest.raises(NonDiagonalizableError):
        tl.discontinuity_coefficient(np.array([[1.0, 1.0], [0.0, 1.0]]), np.eye(2))
    with pytest.raises(StructureError):
        tl.commuting_coefficient(np.array([[1.0, 1.0], [0.0, 2.0]]), np.array([[1.0, 0.0], [1.0, 2.0]]))


def random_commuting_pair(rng, d):
    p = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) + 3 * np.eye(d)
    pinv = np.linalg.inv(p)
    ev_minus = rng.uniform(0.5, 3.0, d) * np.exp(1j * rng.uniform(-1.0, 1.0, d))
    ev_plus = rng.uniform(0.5, 3.0, d) * np.exp(1j * rng.uniform(-1.0, 1.0, d))
    return p @ np.diag(ev_minus) @ pinv, p @ np.diag(ev_plus) @ pinv


def test_commuting_reduction_on_random_pairs():
    rng = np.random.default_rng(12345)
    worst = 0.0
    for i in range(100):
        a, b = random_commuting_pair(rng, 2 + i % 3)
        worst = max(worst, abs(tl.discontinuity_coefficient(a, b) - tl.commuting_coefficient(a, b)))
    assert worst < 1e-12


def test_conjugation_invariance():
    rng = np.random.default_rng(777)
    for _ in range(50):
        m_minus = np.eye(2) * 3 + rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        m_plus = np.eye(2) * 3 + rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        s = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) + 2 * np.eye(2)
        sinv = np.linalg.inv(s)
        b = tl.discontinuity_coefficient(m_minus, m_plus)
        b_conj = tl.discontinuity_coefficient(s @ m_minus @ sinv, s @ m_plus @ sinv)
        assert abs(b - b_conj) < 1e-12


def test_widom_identity_trivial_cases():
    sym = tl.chain_block_symbol(limit(0.0)).shifted(2.0)
    assert tl.widom_identity_residual(sym, np.eye(2), 16) == 0.0
    assert tl.widom_identity_residual(sym, 2 * np.eye(2), 32) < 1e-10


def test_widom_identity_on_generic_jump_symbol():
    sym = random_jump_symbol(2024)
    c = np.random.default_rng(5).normal(size=(2, 2)) + 2 * np.eye(2)
    for n in (8, 32):
        assert tl.widom_identity_residual(sym, c, n) < 1e-9


def test_generic_jump_symbol_log_coefficient():
    sym = random_jump_symbol(99)
    (jump,) = sym.jumps
    expected = tl.discontinuity_coefficient(jump.minus, jump.plus)
    fit = tl.fit_log_coefficient(sym, 0.0, sizes=(32, 45, 64, 91, 128))
    assert abs(fit.b_fit - expected) < 0.02 * abs(expected) + 1e-4


def test_continuous_symbol_has_no_log_term():
    fit = tl.fit_log_coefficient(tl.chain_block_symbol(ChainParams(0.0, 1.5)), 2.0,
                                 sizes=(32, 64, 128, 256, 512))
    assert abs(fit.b_fit.real) < 0.005
    assert fit.szego_term == pytest.approx(math.log(3.0), abs=1e-12)


def test_det_series_branch_tracking_and_csv():
    sym = random_jump_symbol(3)
    sizes = [4, 8, 16, 32, 64]
    series = tl.det_series(sym, sizes, lambda_shift=1.0 + 0.7j, jobs=2)
    e = series.szego_term[0] / sizes[0]
    steps = np.diff(series.logdets.imag) - np.diff(sizes) * e.imag
    assert np.all(np.abs(steps) < PI)
    again = tl.det_series(sym, sizes, lambda_shift=1.0 + 0.7j, jobs=1)
    np.testing.assert_array_equal(series.logdets, again.logdets)
    lines = series.to_csv().splitlines()
    assert lines[0] == "n,re_logdet,im_logdet,szego_term"
    assert len(lines) == 1 + len(sizes)
    with pytest.raises(ParameterError):
        tl.det_series(sym, [8, 4])
    with pytest.raises(ParameterError):
        tl.fit_log_coefficient(sym, 2.0, sizes=(8, 16, 32))
