"""Primality and safe-prime generation.

Safe primes p = 2q + 1 are found by sieving a window of candidate q values
against small primes (both q and 2q + 1 must survive), then running a base-2
Fermat test on p before the full probabilistic tests.
"""

import math
import random
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpz

from ..errors import ParameterError
from ..kernels import sieve_safe_candidates

# 64 Miller-Rabin rounds bound the error by 4**-64 = 2**-128.
DEFAULT_ROUNDS = 64
SIEVE_LIMIT = 1 << 18
SIEVE_WIDTH = 1 << 13
SMALL_BITS = 20


@lru_cache(maxsize=1)
def _small_primes() -> np.ndarray:
    flags = np.ones(SIEVE_LIMIT, dtype=bool)
    flags[:2] = False
    for i in range(2, int(SIEVE_LIMIT**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    # 2 is excluded: q is always odd and 2q + 1 is odd by construction.
    return np.flatnonzero(flags)[1:].astype(np.int64)


def is_prime(n: int, rounds: int = DEFAULT_ROUNDS) -> bool:
    return n >= 2 and bool(gmpy2.is_prime(mpz(n), rounds))


def is_safe_prime(p: int, rounds: int = DEFAULT_ROUNDS) -> bool:
    """True iff p and (p - 1) / 2 are both (probable) primes."""
    if p < 5 or p % 2 == 0:
        return False
    p = mpz(p)
    q = (p - 1) >> 1
    # cheap rejections before the expensive rounds
    if p > 7 and p % 3 != 2:
        return False
    if p > 1000 and gmpy2.powmod(2, p - 1, p) != 1:
        return False
    return is_prime(q, rounds) and is_prime(p, rounds)


def _small_safe_primes(bits: int) -> list[int]:
    lo, hi = 1 << (bits - 1), 1 << bits
    return [p for p in range(max(lo, 5), hi) if is_safe_prime(p)]


def gen_safe_prime(bits: int, rng: random.Random | None = None, rounds: int = DEFAULT_ROUNDS) -> int:
    """Random safe prime with exactly ``bits`` bits.

    ``rng`` must offer ``getrandbits`` and ``randrange`` (``random.Random`` or
    ``secrets.SystemRandom``); pass a seeded ``random.Random`` for repeatable runs.
    """
    if bits < 3:
        raise ParameterError("no safe prime has fewer than 3 bits")
    if rng is None:
        import secrets

        rng = secrets.SystemRandom()
    if bits < SMALL_BITS:
        pool = _small_safe_primes(bits)
        if not pool:
            raise ParameterError(f"there is no {bits}-bit safe prime")
        return pool[rng.randrange(len(pool))]

    primes = _small_primes()
    primes_list = primes.tolist()
    qbits = bits - 1
    q_hi = mpz(1) << qbits
    while True:
        q0 = mpz(rng.getrandbits(qbits)) | (mpz(1) << (qbits - 1)) | 1
        residues = np.fromiter((int(q0 % r) for r in primes_list), dtype=np.int64, count=len(primes_list))
        keep = sieve_safe_candidates(residues, primes, SIEVE_WIDTH)
        for i in np.flatnonzero(keep).tolist():
            q = q0 + 2 * i
            if q >= q_hi:
                break
            p = 2 * q + 1
            if gmpy2.powmod(2, p - 1, p) != 1:
                continue
            if is_prime(q, rounds) and is_prime(p, rounds):
                return int(p)


def factorize(m: int) -> dict[int, int]:
    """Trial-division factorization for the small moduli of the brute-force oracles."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def carmichael(m: int) -> int:
    """Exponent of the unit group of Z_m."""
    lam = 1
    for q, e in factorize(m).items():
        if q == 2 and e >= 3:
            part = 1 << (e - 2)
        else:
            part = (q - 1) * q ** (e - 1)
        lam = math.lcm(lam, part)
    return lam
