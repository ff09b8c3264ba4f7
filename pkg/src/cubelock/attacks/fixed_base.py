"""Delay bypass by fixed-base precomputation.

If g generates Z_p*, then so does h = g**3, and x = log_h(c) gives
g**x = c**(1/3).  An adversary holding a table of g**(2**i) evaluates g**x as
a balanced product tree, with logarithmic depth instead of the ~log2 p
squarings of honest decryption.  The discrete log itself is what stays out
of reach at real sizes; here it is brute force or baby-step giant-step.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from ..bigmath import DepthTrace, FixedBaseTable, fixed_base_memory_bits, powmod_fixed_base
from ..errors import CapacityError, ParameterError, PaddingError
from ..puzzle import Ciphertext, PuzzleParams, unpad

MAX_DLOG_PRIME = 1 << 24
MIB = 1 << 20


def find_generator(p: int) -> int:
    """Smallest generator of Z_p* for a safe prime p."""
    q = (p - 1) // 2
    for g in range(2, p):
        if pow(g, 2, p) != 1 and pow(g, q, p) != 1:
            return g
    raise ParameterError(f"no generator found mod {p}")


def bsgs_dlog(base: int, target: int, p: int, order: int | None = None) -> int:
    """x in [0, order) with base**x = target mod p, by baby-step giant-step."""
    if p > MAX_DLOG_PRIME:
        raise CapacityError("discrete logs are only attempted for p <= 2**24")
    order = order or p - 1
    step = isqrt(order) + 1
    baby = {}
    v = 1
    for j in range(step):
        baby.setdefault(v, j)
        v = v * base % p
    giant = pow(base, -step, p)
    y = target % p
    for i in range(step + 1):
        j = baby.get(y)
        if j is not None:
            return (i * step + j) % order
        y = y * giant % p
    raise ParameterError(f"{target} is not a power of {base} mod {p}")


@dataclass(frozen=True)
class FixedBaseOutcome:
    value: int  # the recovered padded plaintext x
    exponent: int
    trace: DepthTrace
    message: bytes | None  # unpadded message when the prime is large enough to carry one


def fixed_base_attack_demo(
    params: PuzzleParams,
    ct: Ciphertext | int,
    dlog_oracle=None,
    g: int | None = None,
    table: FixedBaseTable | None = None,
    workers: int | None = None,
) -> FixedBaseOutcome:
    """Recover x from c = x**3 without the long exponentiation.

    ``dlog_oracle(base, target, p)`` defaults to baby-step giant-step.
    """
    p = params.p
    c = ct.c if isinstance(ct, Ciphertext) else int(ct)
    if not 0 < c < p:
        raise ParameterError("ciphertext must be a unit mod p")
    g = g if g is not None else find_generator(p)
    h = pow(g, 3, p)
    oracle = dlog_oracle or bsgs_dlog
    x = oracle(h, c, p)
    table = table or FixedBaseTable.build(g, p)
    value, trace = powmod_fixed_base(table, x, workers=workers)
    if pow(value, 3, p) != c:
        raise ParameterError("oracle returned a wrong logarithm")
    message = None
    seed_len = ct.seed_len if isinstance(ct, Ciphertext) else None
    try:
        message = unpad(value, params.n, seed_len)
    except (PaddingError, ValueError, OverflowError):
        pass
    return FixedBaseOutcome(value, x, trace, message)


def expected_exponent_bits(p: int) -> Fraction:
    """n - 2 + (2(p - 2**(n-1)) + n - 1)/(p - 1): mean bit length of x over 1..p-1."""
    n = p.bit_length()
    return n - 2 + Fraction(2 * (p - (1 << (n - 1))) + n - 1, p - 1)


def empirical_exponent_bits(p: int, g: int | None = None) -> Fraction:
    """Mean bit length of log_h(c) over every unit c, taking the log in [1, p-1]."""
    g = g if g is not None else find_generator(p)
    h = pow(g, 3, p)
    total = 0
    for c in range(1, p):
        total += (bsgs_dlog(h, c, p) or p - 1).bit_length()
    return Fraction(total, p - 1)


def table_memory_report(n: int) -> dict:
    bits = fixed_base_memory_bits(n)
    return {"n": n, "bits": bits, "bytes": bits // 8, "MiB": bits / 8 / MIB, "MB": bits / 8 / 1e6}
