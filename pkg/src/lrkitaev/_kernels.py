"""Hot inner loops, with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and the environment variable
``LRK_DISABLE_NUMBA`` is unset (or set to something other than 1/true/yes/on).
Both implementations are always importable through :data:`IMPLEMENTATIONS` so
tests and ``benchmarks/bench_kernels.py`` can compare them directly.

Fock-space conventions: basis state ``s`` is an integer whose bit ``j`` is the
occupation of site ``j``; the Jordan-Wigner order is the site order, so
``a_j |s> = (-1)**(number of occupied sites i < j) |s - e_j>``.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FALSE_FLAGS = {"1", "true", "yes", "on"}


def numba_requested():
    return os.environ.get("LRK_DISABLE_NUMBA", "").strip().lower() not in _FALSE_FLAGS


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _sine_series_numpy(theta, coeffs, chunk=256):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    out = np.empty_like(theta)
    orders = np.arange(1, coeffs.size + 1, dtype=np.float64)
    for start in range(0, theta.size, chunk):
        block = theta[start:start + chunk]
        out[start:start + chunk] = np.sin(np.outer(block, orders)) @ coeffs
    return out


def _below_parity_numpy(states, site):
    return (np.bitwise_count(states & ((1 << site) - 1)) & 1).astype(np.int64)


def _apply_numpy(states, site, create):
    """Return (valid mask, new states, signs) for a_site or a_site^dagger."""
    occupied = (states >> site) & 1
    valid = occupied == (0 if create else 1)
    signs = 1 - 2 * _below_parity_numpy(states, site)
    return valid, states ^ (1 << site), signs


def _quadratic_coo_numpy(n_sites, first_site, first_create, second_site, second_create, coeff):
    states = np.arange(1 << n_sites, dtype=np.int64)
    rows, cols, vals = [], [], []
    for t in range(len(coeff)):
        ok1, s1, sg1 = _apply_numpy(states, first_site[t], first_create[t])
        src = states[ok1]
        s1, sg1 = s1[ok1], sg1[ok1]
        ok2, s2, sg2 = _apply_numpy(s1, second_site[t], second_create[t])
        rows.append(s2[ok2])
        cols.append(src[ok2])
        vals.append(coeff[t] * (sg1[ok2] * sg2[ok2]))
    if not rows:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals).astype(np.float64)


def _apply_fermion_numpy(psi, n_sites, site, create):
    states = np.arange(1 << n_sites, dtype=np.int64)
    ok, target, signs = _apply_numpy(states, site, create)
    out = np.zeros_like(psi)
    out[target[ok]] = signs[ok] * psi[ok]
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def _below_parity_nb(s, site):
        x = s & ((1 << site) - 1)
        count = 0
        while x:
            x &= x - 1
            count += 1
        return count & 1

    @numba.njit(cache=True)
    def _sine_series_nb(theta, coeffs):
        # sin(l t) by repeated rotation; restart from exact values every 64
        # terms to keep the accumulated rounding at the 1e-15 level.
        out = np.empty(theta.size)
        for i in range(theta.size):
            t = theta[i]
            ct, st = np.cos(t), np.sin(t)
            acc = 0.0
            c, s = 1.0, 0.0
            for l in range(coeffs.size):
                if l % 64 == 0:
                    c, s = np.cos(l * t), np.sin(l * t)
                c, s = c * ct - s * st, s * ct + c * st
                acc += coeffs[l] * s
            out[i] = acc
        return out

    @numba.njit(cache=True)
    def _quadratic_coo_nb(n_sites, first_site, first_create, second_site, second_create, coeff):
        dim = 1 << n_sites
        n_terms = coeff.size
        rows = np.empty(dim * n_terms, dtype=np.int64)
        cols = np.empty(dim * n_terms, dtype=np.int64)
        vals = np.empty(dim * n_terms)
        k = 0
        for s in range(dim):
            for t in range(n_terms):
                j = first_site[t]
                occ = (s >> j) & 1
                if occ == first_create[t]:
                    continue
                sign = 1 - 2 * _below_parity_nb(s, j)
                s1 = s ^ (1 << j)
                i = second_site[t]
                occ = (s1 >> i) & 1
                if occ == second_create[t]:
                    continue
                sign *= 1 - 2 * _below_parity_nb(s1, i)
                rows[k] = s1 ^ (1 << i)
                cols[k] = s
                vals[k] = coeff[t] * sign
                k += 1
        return rows[:k], cols[:k], vals[:k]

    @numba.njit(cache=True)
    def _apply_fermion_nb(psi, n_sites, site, create):
        out = np.zeros_like(psi)
        for s in range(1 << n_sites):
            occ = (s >> site) & 1
            if occ == create:
                continue
            sign = 1 - 2 * _below_parity_nb(s, site)
            out[s ^ (1 << site)] = sign * psi[s]
        return out


def _as_term_arrays(first_site, first_create, second_site, second_create, coeff):
    return (
        np.ascontiguousarray(first_site, dtype=np.int64),
        np.ascontiguousarray(first_create, dtype=np.int64),
        np.ascontiguousarray(second_site, dtype=np.int64),
        np.ascontiguousarray(second_create, dtype=np.int64),
        np.ascontiguousarray(coeff, dtype=np.float64),
    )


def _wrap_numpy_coo(n_sites, *terms):
    return _quadratic_coo_numpy(n_sites, *_as_term_arrays(*terms))


def _wrap_numba_coo(n_sites, *terms):
    return _quadratic_coo_nb(n_sites, *_as_term_arrays(*terms))


def _wrap_numba_sine(theta, coeffs):
    return _sine_series_nb(np.ascontiguousarray(theta, dtype=np.float64),
                           np.ascontiguousarray(coeffs, dtype=np.float64))


def _wrap_numba_apply(psi, n_sites, site, create):
    return _apply_fermion_nb(np.ascontiguousarray(psi), n_sites, site, int(create))


def _wrap_numpy_apply(psi, n_sites, site, create):
    return _apply_fermion_numpy(np.asarray(psi), n_sites, site, int(create))


IMPLEMENTATIONS = {
    "numpy": {
        "sine_series": _sine_series_numpy,
        "quadratic_coo": _wrap_numpy_coo,
        "apply_fermion": _wrap_numpy_apply,
    },
}
if numba is not None:
    IMPLEMENTATIONS["numba"] = {
        "sine_series": _wrap_numba_sine,
        "quadratic_coo": _wrap_numba_coo,
        "apply_fermion": _wrap_numba_apply,
    }

BACKEND = "numba" if (numba is not None and numba_requested()) else "numpy"

sine_series = IMPLEMENTATIONS[BACKEND]["sine_series"]
sine_series.__doc__ = "sum_{l>=1} coeffs[l-1] * sin(l*theta), elementwise in theta."

quadratic_coo = IMPLEMENTATIONS[BACKEND]["quadratic_coo"]
quadratic_coo.__doc__ = """COO triplets of sum_t coeff[t] * O2_t O1_t on the 2**n_sites Fock space.

O1 (applied first) acts on ``first_site`` and is a creation operator when
``first_create`` is 1; likewise O2. Returns ``(rows, cols, vals)``; duplicate
entries must be summed by the caller.
"""

apply_fermion = IMPLEMENTATIONS[BACKEND]["apply_fermion"]
apply_fermion.__doc__ = "Apply a_site (create=0) or a_site^dagger (create=1) to a Fock vector."
