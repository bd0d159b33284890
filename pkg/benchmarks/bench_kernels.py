"""Compare the numba and numpy kernel implementations.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is timed on
both backends after a warm-up call (which also triggers numba compilation)
and the outputs are checked to agree.
"""

import argparse
import time

import numpy as np

from lrkitaev import _kernels
from lrkitaev.model import ChainParams
from lrkitaev.oracle import _hamiltonian_terms


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n_sites, n_theta, n_coeffs):
    rng = np.random.default_rng(0)
    theta = rng.uniform(-np.pi, np.pi, n_theta)
    coeffs = np.arange(1, n_coeffs + 1, dtype=float) ** -1.5
    terms = _hamiltonian_terms(ChainParams(1.0, 1.0, ring_size=n_sites), n_sites)
    psi = rng.normal(size=1 << n_sites)
    psi /= np.linalg.norm(psi)
    return {
        "sine_series": (theta, coeffs),
        "quadratic_coo": (n_sites, *terms),
        "apply_fermion": (psi, n_sites, n_sites // 2, 1),
    }


def agree(a, b):
    if isinstance(a, tuple):
        # COO triplets: compare as dense sums of duplicates.
        ra, ca, va = a
        rb, cb, vb = b
        dim = int(max(ra.max(), rb.max())) + 1
        da = np.zeros((dim, dim))
        db = np.zeros((dim, dim))
        np.add.at(da, (ra, ca), va)
        np.add.at(db, (rb, cb), vb)
        return float(np.abs(da - db).max())
    return float(np.abs(a - b).max())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sites", type=int, default=12)
    parser.add_argument("--theta", type=int, default=20000)
    parser.add_argument("--coeffs", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = [b for b in ("numpy", "numba") if b in _kernels.IMPLEMENTATIONS]
    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'kernel':<15}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    for name, call_args in cases(args.sites, args.theta, args.coeffs).items():
        timings, outputs = {}, {}
        for backend in backends:
            fn = _kernels.IMPLEMENTATIONS[backend][name]
            outputs[backend] = fn(*call_args)
            timings[backend] = best_of(lambda: fn(*call_args), args.repeat)
        row = f"{name:<15}" + "".join(f"{timings[b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) == 2:
            speedup = timings["numpy"] / timings["numba"]
            row += f"{speedup:>9.1f}x{agree(outputs['numpy'], outputs['numba']):>12.1e}"
        print(row)


if __name__ == "__main__":
    main()
