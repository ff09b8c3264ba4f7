"""Arbitrary-precision modular arithmetic with depth instrumentation."""

from .power import (
    DepthTrace,
    FixedBaseTable,
    fixed_base_memory_bits,
    powmod_fixed_base,
    powmod_window,
)
from .primes import carmichael, factorize, gen_safe_prime, is_prime, is_safe_prime
from .reduction import BarrettCtx, MontCtx, barrett_reduce, mont_from, mont_redc, mont_to
from .toom import mul_toom

__all__ = [
    "BarrettCtx",
    "DepthTrace",
    "FixedBaseTable",
    "MontCtx",
    "barrett_reduce",
    "carmichael",
    "factorize",
    "fixed_base_memory_bits",
    "gen_safe_prime",
    "is_prime",
    "is_safe_prime",
    "mont_from",
    "mont_redc",
    "mont_to",
    "mul_toom",
    "powmod_fixed_base",
    "powmod_window",
]
