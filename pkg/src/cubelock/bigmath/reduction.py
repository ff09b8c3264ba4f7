"""Barrett and Montgomery reduction contexts.

Contexts are immutable and hold gmpy2 ``mpz`` values so that the hot loops in
:mod:`cubelock.bigmath.power` stay in GMP arithmetic.  Public functions take
and return plain ints (``mpz`` compares and hashes like ``int``).
"""

from dataclasses import dataclass

from gmpy2 import mpz

from ..errors import CapacityError, ParameterError


@dataclass(frozen=True)
class BarrettCtx:
    modulus: int
    shift: int
    q: int

    @classmethod
    def create(cls, modulus: int, capacity_bits: int | None = None) -> "BarrettCtx":
        """Precompute ``q = floor(2**shift / modulus)`` with ``shift = capacity_bits + 1``.

        ``capacity_bits`` defaults to twice the modulus size, enough for any
        product of two residues.
        """
        if modulus < 2:
            raise ParameterError("Barrett modulus must be at least 2")
        if capacity_bits is None:
            capacity_bits = 2 * int(modulus).bit_length()
        if capacity_bits < int(modulus).bit_length():
            raise ParameterError("capacity smaller than the modulus itself")
        shift = capacity_bits + 1
        m = mpz(modulus)
        return cls(m, shift, (mpz(1) << shift) // m)


def barrett_reduce(ctx: BarrettCtx, a: int) -> int:
    """``a mod ctx.modulus`` with two multiplications and at most two subtractions."""
    if a < 0 or a >> ctx.shift:
        raise CapacityError(f"Barrett input exceeds 2**{ctx.shift}")
    r = a - ((a * ctx.q) >> ctx.shift) * ctx.modulus
    if r >= ctx.modulus:
        r -= ctx.modulus
        if r >= ctx.modulus:
            r -= ctx.modulus
    return r


@dataclass(frozen=True)
class MontCtx:
    modulus: int
    r_bits: int
    R: int
    neg_inv: int

    @classmethod
    def create(cls, modulus: int, r_bits: int | None = None) -> "MontCtx":
        if modulus < 3 or modulus % 2 == 0:
            raise ParameterError("Montgomery reduction needs an odd modulus >= 3")
        m = mpz(modulus)
        if r_bits is None:
            r_bits = m.bit_length()
        R = mpz(1) << r_bits
        if R <= m:
            raise ParameterError("R must exceed the modulus")
        # -modulus^-1 mod R; the printed b^-1 variant does not make a + m*b divisible by R
        neg_inv = (-pow(m, -1, R)) % R
        return cls(m, r_bits, R, neg_inv)

    @property
    def mask(self) -> int:
        return self.R - 1


def mont_redc(ctx: MontCtx, a: int) -> int:
    """``a * R**-1 mod modulus`` for ``0 <= a < R * modulus``."""
    if a < 0 or a >= ctx.R * ctx.modulus:
        raise CapacityError("REDC input must be below R * modulus")
    mask = ctx.R - 1
    m = ((a & mask) * ctx.neg_inv) & mask
    t = (a + m * ctx.modulus) >> ctx.r_bits
    if t >= ctx.modulus:
        t -= ctx.modulus
    return t


def mont_to(ctx: MontCtx, x: int) -> int:
    if x < 0 or x >= ctx.modulus:
        raise CapacityError("value must be reduced before entering Montgomery form")
    return (mpz(x) << ctx.r_bits) % ctx.modulus


def mont_from(ctx: MontCtx, x: int) -> int:
    if x < 0 or x >= ctx.modulus:
        raise CapacityError("Montgomery residue must be below the modulus")
    return mont_redc(ctx, mpz(x))
