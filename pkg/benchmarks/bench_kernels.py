"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once up front so JIT compilation stays out of the
numbers; the table reports the median of the remaining calls and the speedup.
"""

import argparse
import statistics
import time

import numpy as np

from cubelock import kernels
from cubelock.attacks.gcd import chain_polynomial
from cubelock.bigmath import carmichael, factorize
from cubelock.bigmath.primes import _small_primes


def median_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases():
    rng = np.random.default_rng(0)
    primes = _small_primes()[:2000]
    q0 = int(rng.integers(1 << 40, 1 << 41)) | 1
    residues = np.array([q0 % int(p) for p in primes], dtype=np.int64)
    width = 1 << 13

    m = 4999
    lam = carmichael(m)
    lam_factors = list(factorize(lam))

    p = 1009
    f = np.array(chain_polynomial(p).coeffs, dtype=np.int64)
    f[0] = (f[0] - 123) % p

    yield "sieve 2^13 x 2000 primes", kernels._sieve_nb, kernels._sieve_np, (residues, primes, width)
    yield f"element orders m={m}", kernels._orders_nb, kernels._orders_np, (m, lam, np.array(sorted(set(lam_factors))))
    yield f"z^(p-1) mod deg-9 poly, p={p}", kernels._powmod_x_nb, kernels._powmod_x_np, (p - 1, f, p)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"numba available: {kernels._HAVE_NUMBA}, default dispatch uses numba: {kernels.USING_NUMBA}")
    print(f"{'kernel':<34} {'numba':>12} {'numpy':>12} {'speedup':>8}")
    for name, nb, npy, call in cases():
        a = nb(*call)
        b = npy(*call)
        if not np.array_equal(np.asarray(a), np.asarray(b)):
            raise SystemExit(f"{name}: numba and numpy disagree")
        t_nb = median_time(lambda: nb(*call), args.repeat)
        t_np = median_time(lambda: npy(*call), args.repeat)
        print(f"{name:<34} {t_nb * 1e3:>10.3f}ms {t_np * 1e3:>10.3f}ms {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
