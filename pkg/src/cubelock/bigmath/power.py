"""Modular exponentiation with dependency-depth instrumentation.

Two evaluators live here:

* :func:`powmod_window` - fixed-window (k-ary) exponentiation, the honest
  decryptor.  Its depth is dominated by the squaring chain.
* :func:`powmod_fixed_base` - product of precomputed ``base**(2**i)`` entries
  combined in a balanced tree, which is what an attacker who knows the base
  in advance can do.  Its depth is logarithmic in the exponent length.

Depth is measured, not derived: every modular multiplication produces a value
whose depth is ``max(depth of inputs) + 1``.
"""

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from gmpy2 import mpz

from ..errors import CapacityError, FormatError, ParameterError
from .reduction import BarrettCtx, MontCtx

STRATEGIES = ("montgomery", "barrett")
MAX_TABLE_ENTRIES = 1 << 16


@dataclass(frozen=True)
class DepthTrace:
    sequential_depth: int = 0
    total_mults: int = 0

    def __post_init__(self):
        if self.sequential_depth > self.total_mults:
            raise ValueError("sequential depth cannot exceed the multiplication count")

    def then(self, other: "DepthTrace") -> "DepthTrace":
        """Sequential composition: ``other`` consumes this trace's output."""
        return DepthTrace(
            self.sequential_depth + other.sequential_depth,
            self.total_mults + other.total_mults,
        )

    def alongside(self, other: "DepthTrace") -> "DepthTrace":
        """Independent branches evaluated side by side."""
        return DepthTrace(
            max(self.sequential_depth, other.sequential_depth),
            self.total_mults + other.total_mults,
        )


def powmod_window(
    base: int,
    exp: int,
    modulus: int,
    w: int = 6,
    strategy: str = "montgomery",
    max_table_entries: int = MAX_TABLE_ENTRIES,
) -> tuple[int, DepthTrace]:
    """``base**exp mod modulus`` by fixed windows of ``w`` bits.

    The exponent's top window is zero-padded when its bit length is not a
    multiple of ``w``.  All ``2**w`` table entries are built up front.
    """
    if w < 1:
        raise ParameterError("window width must be at least 1")
    if (1 << w) > max_table_entries:
        raise ParameterError(f"window table of 2**{w} entries exceeds the cap of {max_table_entries}")
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown reduction strategy {strategy!r}")
    if modulus < 2:
        raise ParameterError("modulus must be at least 2")
    if not 0 <= base < modulus:
        raise ParameterError("base must be reduced modulo the modulus")
    if exp < 0:
        raise ParameterError("negative exponents are not supported")
    if exp == 0:
        return 1, DepthTrace()

    mod = mpz(modulus)
    mults = 0
    if strategy == "montgomery":
        ctx = MontCtx.create(modulus)
        k, mask, ni = ctx.r_bits, ctx.R - 1, ctx.neg_inv

        def mul(x, y):
            t = x * y
            t = (t + (((t & mask) * ni) & mask) * mod) >> k
            return t - mod if t >= mod else t

        one = ctx.R % mod
        a = (mpz(base) << k) % mod
        base_depth = 1  # conversion into Montgomery form
        mults += 1
    else:
        bctx = BarrettCtx.create(modulus)
        shift, q = bctx.shift, bctx.q

        def mul(x, y):
            t = x * y
            r = t - ((t * q) >> shift) * mod
            while r >= mod:
                r -= mod
            return r

        one = mpz(1)
        a = mpz(base)
        base_depth = 0

    size = 1 << w
    table = [one, a]
    tdepth = [0, base_depth]
    for i in range(2, size):
        table.append(mul(table[-1], a))
        tdepth.append(tdepth[-1] + 1)
    mults += size - 2

    e = mpz(exp)
    nwin = -(-e.bit_length() // w)
    wmask = size - 1
    top = int((e >> ((nwin - 1) * w)) & wmask)
    c = table[top]
    depth = tdepth[top]
    for i in range(nwin - 2, -1, -1):
        for _ in range(w):
            c = mul(c, c)
        depth += w
        mults += w
        d = int((e >> (i * w)) & wmask)
        if d:
            c = mul(c, table[d])
            depth = max(depth, tdepth[d]) + 1
            mults += 1

    if strategy == "montgomery":
        c = mul(c, mpz(1))
        depth += 1
        mults += 1
    return int(c), DepthTrace(depth, mults)


@dataclass(frozen=True)
class FixedBaseTable:
    """``powers[i] = base**(2**i) mod modulus`` for ``i`` in ``[0, len(powers))``."""

    modulus: int
    base: int
    powers: tuple

    @classmethod
    def build(cls, base: int, modulus: int, length: int | None = None) -> "FixedBaseTable":
        if modulus < 2:
            raise ParameterError("modulus must be at least 2")
        if length is None:
            length = int(modulus).bit_length()
        if length < 1:
            raise ParameterError("table needs at least one entry")
        m = mpz(modulus)
        v = mpz(base) % m
        powers = [v]
        for _ in range(length - 1):
            v = v * v % m
            powers.append(v)
        return cls(int(modulus), int(base) % int(modulus), tuple(int(x) for x in powers))

    @property
    def entry_bits(self) -> int:
        return int(self.modulus).bit_length()

    @property
    def size_bits(self) -> int:
        """Payload size of the serialized entries: n bits per entry."""
        return self.entry_bits * len(self.powers)

    def to_bytes(self) -> bytes:
        n = self.entry_bits
        width = (n + 7) // 8
        mod_bytes = int(self.modulus).to_bytes((n + 7) // 8, "big")
        parts = [b"CLFB", struct.pack(">BI", 1, n), struct.pack(">I", len(mod_bytes)), mod_bytes]
        parts.extend(int(p).to_bytes(width, "big") for p in self.powers)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "FixedBaseTable":
        if data[:4] != b"CLFB":
            raise FormatError("bad magic, expected CLFB")
        if len(data) < 13:
            raise FormatError("truncated header")
        version, n = struct.unpack(">BI", data[4:9])
        if version != 1:
            raise FormatError(f"unsupported table version {version}")
        (mlen,) = struct.unpack(">I", data[9:13])
        modulus = int.from_bytes(data[13 : 13 + mlen], "big")
        if modulus.bit_length() != n:
            raise FormatError("modulus length disagrees with header")
        width = (n + 7) // 8
        body = data[13 + mlen :]
        if not body or len(body) % width:
            raise FormatError("entry area is not a whole number of words")
        powers = tuple(int.from_bytes(body[i : i + width], "big") for i in range(0, len(body), width))
        for prev, cur in zip(powers, powers[1:]):
            if prev * prev % modulus != cur:
                raise FormatError("table entries are not successive squares")
        return cls(modulus, powers[0], powers)


def fixed_base_memory_bits(n: int, entries: int | None = None) -> int:
    """Bits needed to store ``entries`` words of ``n`` bits.

    The default counts ``g**(2**i)`` for ``i`` in ``1..n-1``: the attacker
    already holds ``g`` itself, so a full table costs ``n * (n - 1)`` bits.
    """
    if entries is None:
        entries = n - 1
    return n * entries


def powmod_fixed_base(table: FixedBaseTable, exp: int, workers: int | None = None) -> tuple[int, DepthTrace]:
    """Multiply the table entries selected by ``exp``'s set bits in a balanced tree.

    With ``workers`` > 1 each tree level is evaluated by a thread pool; the
    pairing is fixed, so the result and trace do not depend on scheduling.
    """
    if exp < 0:
        raise ParameterError("negative exponents are not supported")
    if exp >> len(table.powers):
        raise CapacityError(f"exponent needs more than the {len(table.powers)} table entries")
    m = mpz(table.modulus)
    leaves = [mpz(table.powers[i]) for i in range(int(exp).bit_length()) if (exp >> i) & 1]
    if not leaves:
        return 1 % int(table.modulus), DepthTrace()
    mults = len(leaves) - 1
    depth = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers and workers > 1 else None
    try:
        while len(leaves) > 1:
            pairs = [(leaves[i], leaves[i + 1]) for i in range(0, len(leaves) - 1, 2)]
            if pool is not None:
                level = list(pool.map(lambda ab: ab[0] * ab[1] % m, pairs))
            else:
                level = [x * y % m for x, y in pairs]
            if len(leaves) % 2:
                level.append(leaves[-1])
            leaves = level
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return int(leaves[0]), DepthTrace(depth, mults)
