import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrkitaev import spectral
from lrkitaev.corr import CorrelationMatrix, build_correlation
from lrkitaev.errors import DomainError, ParameterError, StructureError
from lrkitaev.model import ChainParams
from lrkitaev.spectral import entropy, entropy_scan, mode_entropy, spectrum

LOG2 = math.log(2.0)
alphas = st.sampled_from([1.0, 1.5, 2.0, 3.0, 5.0, 10.0])


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0, 3.0, 7.0, 100.0])
def test_mode_entropy_vanishes_exactly_at_pure_modes(alpha):
    assert mode_entropy(alpha, 1.0) == 0.0
    assert mode_entropy(alpha, -1.0) == 0.0


def test_mode_entropy_at_zero():
    assert mode_entropy(1.0, 0.0) == pytest.approx(LOG2, abs=1e-15)
    assert mode_entropy(2.0, 0.0) == pytest.approx(LOG2, abs=1e-15)


def test_mode_entropy_reference_values():
    x = 0.6
    p, q = 0.8, 0.2
    assert mode_entropy(1.0, x) == pytest.approx(-p * math.log(p) - q * math.log(q), rel=1e-15)
    assert mode_entropy(2.0, x) == pytest.approx(-math.log(p * p + q * q), rel=1e-15)
    assert mode_entropy(3.0, x) == pytest.approx(-0.5 * math.log(p ** 3 + q ** 3), rel=1e-15)


def test_mode_entropy_domain():
    assert mode_entropy(1.0, 1.0 + 5e-11) == 0.0
    with pytest.raises(DomainError):
        mode_entropy(1.0, 1.0 + 1e-9)
    with pytest.raises(DomainError):
        mode_entropy(0.5, 0.1)
    with pytest.raises(DomainError):
        mode_entropy(2.0, float("nan"))


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.0, 1.0), alphas, alphas)
def test_mode_entropy_even_bounded_and_monotone_in_alpha(x, a, b):
    fa = mode_entropy(a, x)
    assert fa == mode_entropy(a, -x)
    assert -1e-15 <= fa <= LOG2 + 1e-15
    if a < b:
        assert mode_entropy(b, x) <= fa + 1e-14


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.99, 0.99), st.sampled_from([1.0, 2.0, 3.5]))
def test_mode_entropy_derivative(x, alpha):
    step = 1e-6
    numeric = (mode_entropy(alpha, x + step) - mode_entropy(alpha, x - step)) / (2 * step)
    assert spectral.mode_entropy_derivative(alpha, x) == pytest.approx(numeric, abs=1e-6)


def test_trivial_phase_single_site():
    v = build_correlation(ChainParams(100.0, 1.0, mode="limit"), 1)
    nu = spectrum(v).nu
    assert nu.shape == (1,)
    assert nu[0] == pytest.approx(1.0, abs=1e-3)
    assert entropy(v, 2.0) == pytest.approx(mode_entropy(2.0, nu[0]), abs=0)


def test_all_pure_modes_give_zero_entropy():
    v = CorrelationMatrix.from_dense(np.kron(np.eye(5), np.diag([1.0, -1.0])))
    for alpha in (1.0, 2.0, 3.0):
        assert entropy(v, alpha) == 0.0


@pytest.mark.parametrize("params", [ChainParams(0.0, 1.0, mode="limit"), ChainParams(2.0, 0.5, ring_size=1024),
                                    ChainParams(-2.0, 1.0, mode="limit"), ChainParams(1.0, 1.0, 1.0, mode="limit")])
def test_spectrum_invariants(params):
    v = build_correlation(params, 60)
    spec = spectrum(v)
    assert spec.nu.shape == (60,)
    assert np.all(np.diff(spec.nu) >= 0)
    assert spec.pairing_error <= 1e-10
    w = np.sort(np.linalg.eigvalsh(v.dense))
    np.testing.assert_allclose(np.sort(np.concatenate([spec.nu, -spec.nu])), w, atol=1e-10)
    values = [entropy(v, a) for a in (1.0, 2.0, 3.0, 5.0)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[0] <= 60 * LOG2


def test_purity_consistency():
    nu = 1.0 - np.array([0.0, 1e-13, 5e-13, 1e-12])
    v = CorrelationMatrix.from_dense(np.kron(np.diag(nu), np.diag([1.0, -1.0])))
    for alpha in (1.0, 2.0, 3.0):
        assert entropy(v, alpha) <= 1e-9


def test_unpaired_matrix_is_rejected():
    with pytest.raises(StructureError):
        spectrum(CorrelationMatrix.from_dense(np.diag([0.5, 0.2, -0.1, -0.5])))
    with pytest.raises(StructureError):
        spectrum(CorrelationMatrix.from_dense(np.diag([1.5, -1.5])))


def test_regression_fixtures():
    # Frozen outputs of this implementation (limit mode, default quadrature).
    v = build_correlation(ChainParams(-2.0, 1.0, mode="limit"), 100)
    assert spectrum(v).nu[0] == pytest.approx(0.2833192172132136, abs=1e-10)
    assert entropy(v, 1.0) == pytest.approx(1.274932283917865, abs=1e-10)


def test_entropy_grows_with_interval_at_zeta_one():
    scan = entropy_scan(ChainParams(0.0, 1.0, mode="limit"), 1.0, [10, 20, 40, 80, 160])
    assert np.all(np.diff(scan.entropies) > 0)
    np.testing.assert_allclose(np.diff(scan.entropies), 0.0893, atol=2e-4)


def test_scan_consistency_and_order():
    p = ChainParams(0.5, 0.8, ring_size=512)
    single = entropy_scan(p, 2.0, [7])
    assert single.entropies[0] == pytest.approx(entropy(build_correlation(p, 7), 2.0), abs=1e-14)
    xs = [3, 5, 9, 17, 33]
    serial = entropy_scan(p, 1.0, xs, jobs=1)
    threaded = entropy_scan(p, 1.0, xs, jobs=4)
    np.testing.assert_array_equal(serial.entropies, threaded.entropies)
    np.testing.assert_array_equal(serial.xlens, xs)
    assert serial.metadata["ring_size"] == 512


def test_scan_uses_one_ring_for_all_lengths():
    scan = entropy_scan(ChainParams(0.0, 1.5), 1.0, [10, 100])
    assert scan.metadata["ring_size"] == 8192
    assert "64" in scan.metadata["ring_policy"]


@pytest.mark.parametrize("xs", [[], [5, 5], [3, 2], [0, 4], [1.5, 3]])
def test_scan_rejects_bad_lengths(xs):
    with pytest.raises(ParameterError):
        entropy_scan(ChainParams(0.0, ring_size=64), 1.0, xs)


def test_scan_csv_format():
    scan = entropy_scan(ChainParams(0.0, 1.0, mode="limit"), 1.0, [4, 8])
    lines = scan.to_csv().splitlines()
    header = [line for line in lines if line.startswith("# ")]
    body = [line for line in lines if not line.startswith("#")]
    assert any(line.startswith("# h: ") for line in header)
    assert any(line.startswith("# alpha: ") for line in header)
    assert body[0] == "xlen,entropy"
    x, s = body[1].split(",")
    assert x == "4" and s == f"{scan.entropies[0]:.12g}"
    assert scan.to_csv() == scan.to_csv()
