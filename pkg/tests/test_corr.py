import math

import mpmath as mp
import numpy as np
import pytest

from lrkitaev import corr, model
from lrkitaev.corr import build_correlation, fourier_blocks
from lrkitaev.errors import SingularGridError, SizeError
from lrkitaev.model import ChainParams

PI = math.pi


def brute_force_blocks(params, n, size):
    grid = "antiperiodic" if params.boundary == "antiperiodic" else "periodic"
    theta = model.wrap_angle(model.lattice_momenta(n, grid))
    eps = model.hopping_term(params.h, theta)
    g = model.pairing_imag(params, theta)
    lam = np.hypot(eps, g)
    ok = lam > 1e-12
    e_ratio = np.where(ok, eps / np.where(ok, lam, 1.0), 0.0)
    g_ratio = np.where(ok, g / np.where(ok, lam, 1.0), 0.0)
    k = np.arange(size)
    f = np.cos(np.outer(k, theta)) @ e_ratio / n
    gk = -np.sin(np.outer(k, theta)) @ g_ratio / n
    return f, gk


@pytest.mark.parametrize("params", [
    ChainParams(0.0, 1.0, ring_size=64),
    ChainParams(1.3, 0.6, 0.5, ring_size=48),
    ChainParams(-2.0, 1.5, ring_size=64),
    ChainParams(2.0, 1.0, PI / 4, ring_size=32, boundary="antiperiodic"),
    ChainParams(0.7, 2.0, ring_size=30, boundary="antiperiodic"),
])
def test_fft_matches_direct_sum(params):
    n = params.ring_size
    blocks = fourier_blocks(params, n)
    f, g = brute_force_blocks(params, n, n)
    np.testing.assert_allclose(blocks.f_coeffs, f, atol=1e-13)
    np.testing.assert_allclose(blocks.g_coeffs, g, atol=1e-13)


@pytest.mark.parametrize("params", [ChainParams(0.5, 1.0, mode="limit"), ChainParams(-1.0, 1.0, 1.0, mode="limit")])
def test_limit_coefficients_match_mpmath(params):
    mp.mp.dps = 20

    def ratio(t, which):
        eps = float(params.h) + 2 * mp.cos(t)
        if params.phi == 0.0:
            g = mp.pi - t
        else:
            g = -t if t < params.phi else mp.pi - t
        lam = mp.sqrt(eps ** 2 + g ** 2)
        return eps / lam if which == "f" else g / lam

    blocks = fourier_blocks(params, 6)
    pts = [0, params.phi, mp.pi] if params.phi else [0, mp.pi]
    for k in (0, 1, 5):
        f = mp.quad(lambda t: ratio(t, "f") * mp.cos(k * t), pts) / mp.pi
        g = -mp.quad(lambda t: ratio(t, "g") * mp.sin(k * t), pts) / mp.pi
        assert blocks.f_coeffs[k] == pytest.approx(float(f), abs=1e-12)
        assert blocks.g_coeffs[k] == pytest.approx(float(g), abs=1e-12)
    assert blocks.metadata["quad_error"] < 1e-12


def test_g0_vanishes_and_large_field_limit():
    for p in (ChainParams(0.3, 1.0, mode="limit"), ChainParams(1.0, 0.5, 0.7, ring_size=128)):
        assert fourier_blocks(p, 3).g_coeffs[0] == pytest.approx(0.0, abs=1e-15)
    assert fourier_blocks(ChainParams(100.0, 1.0, mode="limit"), 1).f_coeffs[0] == pytest.approx(1.0, abs=1e-3)


def test_single_site_matrix():
    v = build_correlation(ChainParams(0.4, 1.0, mode="limit"), 1)
    f0 = v.f_coeffs[0]
    np.testing.assert_allclose(v.dense, [[f0, 0.0], [0.0, -f0]], atol=1e-15)


@pytest.mark.parametrize("params", [ChainParams(1.0, 1.0, mode="limit"), ChainParams(2.0, 0.5, ring_size=512),
                                    ChainParams(-0.5, 1.0, PI / 4, mode="limit")])
def test_structure(params):
    xlen = 50
    v = build_correlation(params, xlen)
    dense = v.dense
    assert np.isrealobj(dense)
    np.testing.assert_array_equal(dense, dense.T)
    for d in (0, 3, 17):
        ref = v.block(d, 0)
        for n in range(d, xlen, 7):
            np.testing.assert_array_equal(v.block(n, n - d), ref)
    # Particle-hole exchange maps the matrix to minus itself.
    swap = np.kron(np.eye(xlen), np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(swap @ dense @ swap, -dense.T, atol=1e-15)
    w = np.linalg.eigvalsh(dense)
    assert np.all(np.abs(w) <= 1 + 1e-10)
    np.testing.assert_allclose(np.sort(w), -np.sort(w)[::-1], atol=1e-10)
    k, f, g = v.two_sided()
    np.testing.assert_array_equal(f, f[::-1])
    np.testing.assert_array_equal(g, -g[::-1])


def test_limit_and_lattice_agree_at_rate_one_over_n():
    limit = fourier_blocks(ChainParams(0.0, 1.0, mode="limit"), 20)
    diffs = []
    for n in (320, 640, 1280, 2560, 5120):
        lat = fourier_blocks(ChainParams(0.0, 1.0, ring_size=n), 20)
        diffs.append(max(np.abs(lat.f_coeffs - limit.f_coeffs).max(), np.abs(lat.g_coeffs - limit.g_coeffs).max()))
    ratios = np.array(diffs[1:]) / np.array(diffs[:-1])
    np.testing.assert_allclose(ratios, 0.5, atol=0.1)
    assert diffs[-1] < 2e-4


def test_convergence_diagnostic_halves():
    p = ChainParams(1.0, 1.0)
    a = corr.convergence_diagnostic(p, 100, 2048)
    b = corr.convergence_diagnostic(p, 100, 4096)
    assert 0.3 < b / a < 0.7
    assert corr.convergence_diagnostic(ChainParams(1.0, 1.0, mode="limit"), 10) == 0.0
    # Smooth symbol: geometric convergence.
    assert corr.convergence_diagnostic(ChainParams(1.0, 2.5), 50, 2048) < 1e-7


def test_gapless_grid_handling():
    periodic = ChainParams(2.0, 1.0, ring_size=64, boundary="periodic")
    with pytest.raises(SingularGridError, match="antiperiodic"):
        fourier_blocks(periodic, 4)
    auto = fourier_blocks(ChainParams(2.0, 1.0, ring_size=64), 4)
    assert auto.metadata["gapless_momenta"] == 1
    anti = fourier_blocks(ChainParams(2.0, 1.0, ring_size=64, boundary="antiperiodic"), 4)
    assert anti.metadata["gapless_momenta"] == 0
    # h = -2 hits theta = 0 on the periodic grid as well.
    assert fourier_blocks(ChainParams(-2.0, 1.5, ring_size=32), 4).metadata["gapless_momenta"] == 1


def test_size_errors():
    with pytest.raises(SizeError):
        fourier_blocks(ChainParams(0.0, ring_size=16), 17)
    with pytest.raises(SizeError):
        fourier_blocks(ChainParams(0.0, ring_size=16), 0)


def test_csv_dump():
    text = fourier_blocks(ChainParams(0.5, 1.2, ring_size=16), 3).to_csv().splitlines()
    assert text[0] == "k,F_k,g_k"
    assert [line.split(",")[0] for line in text[1:]] == ["0", "1", "2"]


def test_cache_reuses_and_disk_cache(tmp_path, monkeypatch):
    corr.clear_cache()
    p = ChainParams(0.25, 1.0, mode="limit")
    a = fourier_blocks(p, 40)
    b = fourier_blocks(p, 10)
    np.testing.assert_array_equal(a.f_coeffs[:10], b.f_coeffs)
    monkeypatch.setenv("LRK_CACHE_DIR", str(tmp_path))
    corr.clear_cache()
    q = ChainParams(0.25, 1.7, ring_size=64)
    first = fourier_blocks(q, 8)
    assert any(tmp_path.rglob("*.pkl")) or any(tmp_path.rglob("output.pkl"))
    corr.clear_cache()
    second = fourier_blocks(q, 8)
    np.testing.assert_array_equal(first.f_coeffs, second.f_coeffs)
    corr.clear_cache()


def test_from_dense_roundtrip():
    v = build_correlation(ChainParams(0.5, 0.8, ring_size=64), 6)
    w = corr.CorrelationMatrix.from_dense(v.dense)
    np.testing.assert_array_equal(w.f_coeffs, v.f_coeffs)
    np.testing.assert_array_equal(w.g_coeffs, v.g_coeffs)
