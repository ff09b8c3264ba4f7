"""Fixed-width inner loops behind the desk-scale oracles and attacks.

Every kernel exists twice: a numba ``@njit`` loop and a pure-numpy
equivalent.  The module-level names (``sieve_safe_candidates`` and friends)
point at the numba version unless numba is missing or the environment sets
``CUBELOCK_DISABLE_NUMBA=1``.  Both variants stay importable as ``*_nb`` and
``*_np`` so the test-suite and ``benchmarks/bench_kernels.py`` can compare
them directly.

All arithmetic here is on int64; callers keep moduli below 2**31 (orders,
polynomials) or 2**20 (sieve residues), which keeps every product in range.
"""

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USING_NUMBA = _HAVE_NUMBA and os.environ.get("CUBELOCK_DISABLE_NUMBA", "0") not in ("1", "true", "yes")


def _jit(fn):
    if not _HAVE_NUMBA:
        return fn
    return njit(cache=True)(fn)


# -- safe-prime sieve --------------------------------------------------------
#
# Candidates are q = q0 + 2*i for i in [0, width).  Index i is struck out when
# q or 2q + 1 has a factor in ``primes``.  ``residues[t] = q0 mod primes[t]``.


def _sieve_np(residues, primes, width):
    keep = np.ones(width, dtype=np.bool_)
    for s, r in zip(residues.tolist(), primes.tolist()):
        inv2 = (r + 1) // 2
        inv4 = inv2 * inv2 % r
        keep[(-s * inv2) % r :: r] = False
        keep[(-(2 * s + 1) * inv4) % r :: r] = False
    return keep


def _sieve_loop(residues, primes, width):
    keep = np.ones(width, dtype=np.bool_)
    for t in range(primes.shape[0]):
        r = primes[t]
        s = residues[t]
        inv2 = (r + 1) // 2
        inv4 = inv2 * inv2 % r
        i = (r - s) % r * inv2 % r
        while i < width:
            keep[i] = False
            i += r
        i = (r - (2 * s + 1) % r) % r * inv4 % r
        while i < width:
            keep[i] = False
            i += r
    return keep


_sieve_nb = _jit(_sieve_loop)


# -- multiplicative orders ---------------------------------------------------


def _powmod_scalar(x, e, m):
    result = 1 % m
    base = x % m
    while e > 0:
        if e & 1:
            result = result * base % m
        base = base * base % m
        e >>= 1
    return result


def _gcd_scalar(a, b):
    while b:
        a, b = b, a % b
    return a


_powmod_scalar_nb = _jit(_powmod_scalar)
_gcd_scalar_nb = _jit(_gcd_scalar)

if _HAVE_NUMBA:

    @njit(cache=True)
    def _orders_nb(m, lam, factors):
        out = np.zeros(m, dtype=np.int64)
        for x in range(1, m):
            if _gcd_scalar_nb(x, m) != 1:
                continue
            o = lam
            for t in range(factors.shape[0]):
                q = factors[t]
                while o % q == 0 and _powmod_scalar_nb(x, o // q, m) == 1:
                    o //= q
            out[x] = o
        return out

else:  # pragma: no cover
    _orders_nb = _orders_np


def _vpow(base, exps, m):
    result = np.ones_like(base) % m
    b = base % m
    e = exps.copy()
    while np.any(e > 0):
        odd = (e & 1).astype(bool)
        result = np.where(odd, result * b % m, result)
        b = b * b % m
        e >>= 1
    return result


def _orders_np(m, lam, factors):
    x = np.arange(m, dtype=np.int64)
    units = np.gcd(x, m) == 1
    units[0] = m == 1
    orders = np.where(units, lam, 0).astype(np.int64)
    for q in factors.tolist():
        while True:
            divisible = units & (orders % q == 0)
            if not divisible.any():
                break
            cand = np.where(divisible, orders // q, 1)
            hit = divisible & (_vpow(x, cand, m) == 1)
            if not hit.any():
                break
            orders = np.where(hit, cand, orders)
    if m > 1:
        orders[0] = 0
    return orders


# -- polynomials over Z_p modulo a monic f ------------------------------------
#
# Coefficient arrays run from degree 0 upward.  ``f`` has length d + 1 with
# f[d] == 1; residues have length d.


def _mulmod_loop(a, b, f, p):
    d = f.shape[0] - 1
    prod = np.zeros(2 * d - 1 if d > 0 else 1, dtype=np.int64)
    for i in range(d):
        if a[i] == 0:
            continue
        for j in range(d):
            prod[i + j] = (prod[i + j] + a[i] * b[j]) % p
    for k in range(2 * d - 2, d - 1, -1):
        c = prod[k]
        if c != 0:
            for t in range(d):
                prod[k - d + t] = (prod[k - d + t] - c * f[t]) % p
            prod[k] = 0
    return prod[:d].copy()


_mulmod_nb = _jit(_mulmod_loop)


def _mulmod_np(a, b, f, p):
    d = f.shape[0] - 1
    prod = np.convolve(a, b) % p
    for k in range(prod.shape[0] - 1, d - 1, -1):
        c = prod[k]
        if c:
            prod[k - d : k] = (prod[k - d : k] - c * f[:d]) % p
    return prod[:d].copy()


def _x_residue(f, p):
    d = f.shape[0] - 1
    z = np.zeros(d, dtype=np.int64)
    if d == 1:
        z[0] = (-f[0]) % p
    else:
        z[1] = 1
    return z


def _one_residue(d):
    one = np.zeros(d, dtype=np.int64)
    one[0] = 1
    return one


def _powmod_x_np(e, f, p):
    d = f.shape[0] - 1
    result = _one_residue(d)
    base = _x_residue(f, p)
    while e > 0:
        if e & 1:
            result = _mulmod_np(result, base, f, p)
        base = _mulmod_np(base, base, f, p)
        e >>= 1
    return result


if _HAVE_NUMBA:

    @njit(cache=True)
    def _powmod_x_nb(e, f, p):
        d = f.shape[0] - 1
        result = np.zeros(d, dtype=np.int64)
        result[0] = 1
        base = np.zeros(d, dtype=np.int64)
        if d == 1:
            base[0] = (p - f[0] % p) % p
        else:
            base[1] = 1
        while e > 0:
            if e & 1:
                result = _mulmod_nb(result, base, f, p)
            base = _mulmod_nb(base, base, f, p)
            e >>= 1
        return result

else:  # pragma: no cover
    _powmod_x_nb = _powmod_x_np


# -- public dispatch ----------------------------------------------------------


def sieve_safe_candidates(residues: np.ndarray, primes: np.ndarray, width: int) -> np.ndarray:
    """Boolean mask of offsets i for which neither q0+2i nor 2(q0+2i)+1 has a small factor."""
    residues = np.ascontiguousarray(residues, dtype=np.int64)
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    if USING_NUMBA:
        return _sieve_nb(residues, primes, int(width))
    return _sieve_np(residues, primes, int(width))


def element_orders(m: int, lam: int, lam_factors) -> np.ndarray:
    """ord(x) for every x in [0, m); zero for non-units.  ``lam`` is the Carmichael function of m."""
    factors = np.asarray(sorted(set(lam_factors)), dtype=np.int64)
    if USING_NUMBA:
        return _orders_nb(int(m), int(lam), factors)
    return _orders_np(int(m), int(lam), factors)


def poly_mulmod(a, b, f, p: int) -> np.ndarray:
    a, b, f = (np.asarray(v, dtype=np.int64) for v in (a, b, f))
    if USING_NUMBA:
        return _mulmod_nb(a, b, f, int(p))
    return _mulmod_np(a, b, f, int(p))


def poly_powmod_x(e: int, f, p: int) -> np.ndarray:
    """Residue of z**e modulo the monic polynomial f over Z_p."""
    f = np.asarray(f, dtype=np.int64)
    if USING_NUMBA:
        return _powmod_x_nb(int(e), f, int(p))
    return _powmod_x_np(int(e), f, int(p))
