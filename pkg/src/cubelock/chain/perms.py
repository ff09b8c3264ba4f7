"""Keyed permutations of {0, ..., N-1} used to interleave the cubing stages.

Each kind has a scalar path on Python ints (any N) and a numpy batch path
for N below 2**62, which the enumeration tests and ``forward_batch`` use.
Kinds working on a binary domain (cycle-walk-fpe, both-ends, thorp,
mix-and-cut) cycle-walk: they re-apply the binary permutation to their own
output until it lands below N.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np

from ..errors import ParameterError
from .prf import Prf

KINDS = ("swap-neighbors", "pair-map", "cycle-walk-fpe", "both-ends", "thorp", "swap-or-not", "mix-and-cut")
SHUFFLES = ("thorp", "swap-or-not", "mix-and-cut")
BATCH_LIMIT = 1 << 62
AES_BLOCK_BITS = 128
FEISTEL_ROUNDS = 10
# cycle-walk-fpe refuses domains where the walk would average more steps than this
WALK_CAP = 256
ROUND_KEY_CACHE_BITS = 1 << 26

TAG_FEISTEL, TAG_COIN, TAG_ROUNDKEY, TAG_PAIR, TAG_FLIP = 1, 2, 3, 4, 5


@dataclass(frozen=True)
class PermSpec:
    kind: str
    N: int
    key: bytes = b""
    rounds: int = 0  # shuffles only; 0 means bit-length of N

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown permutation kind {self.kind!r}")
        if self.N < 1:
            raise ParameterError("domain must be nonempty")
        if self.rounds < 0:
            raise ParameterError("rounds must be nonnegative")

    @property
    def effective_rounds(self) -> int:
        return self.rounds or max(1, int(self.N).bit_length())


def _check(x: int, N: int) -> int:
    x = int(x)
    if not 0 <= x < N:
        raise ParameterError(f"{x} is outside the domain [0, {N})")
    return x


def _check_batch(xs, N: int) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    if N > BATCH_LIMIT:
        raise ParameterError("batch evaluation needs N below 2**62")
    if xs.size and (xs.min() < 0 or xs.max() >= N):
        raise ParameterError("batch contains values outside the domain")
    return xs


class Permutation:
    """Common interface: ``forward``/``inverse`` and their batch versions."""

    spec: PermSpec

    def __init__(self, spec: PermSpec):
        self.spec = spec
        self.N = int(spec.N)

    def forward(self, x: int) -> int:
        return self._fwd(_check(x, self.N))

    def inverse(self, y: int) -> int:
        return self._inv(_check(y, self.N))

    def forward_batch(self, xs) -> np.ndarray:
        return self._fwd_batch(_check_batch(xs, self.N))

    def inverse_batch(self, ys) -> np.ndarray:
        return self._inv_batch(_check_batch(ys, self.N))

    # subclasses override the batch hooks when a vectorized form exists
    def _fwd_batch(self, xs):
        return np.fromiter((self._fwd(int(x)) for x in xs), dtype=np.int64, count=xs.size)

    def _inv_batch(self, ys):
        return np.fromiter((self._inv(int(y)) for y in ys), dtype=np.int64, count=ys.size)


# -- algebraic kinds --------------------------------------------------------------


class SwapNeighbors(Permutation):
    """Odd x goes to x + 1 and even x to x - 1; 0 and an unpaired top odd value are fixed."""

    def _fwd(self, x):
        if x & 1:
            return x + 1 if x + 1 < self.N else x
        return x - 1 if x else x

    _inv = _fwd

    def _fwd_batch(self, xs):
        odd = (xs & 1) == 1
        up = odd & (xs + 1 < self.N)
        down = ~odd & (xs > 0)
        return np.where(up, xs + 1, np.where(down, xs - 1, xs))

    _inv_batch = _fwd_batch


class PairMap(Permutation):
    """(x, y) -> (y + c1, x + c2) over Z_q squared, encoded as v = x*q + y."""

    def __init__(self, spec, q: int):
        super().__init__(spec)
        if q * q != self.N:
            raise ParameterError("pair-map domain must be a perfect square")
        self.q = q
        prf = Prf(spec.key, b"cubelock-pair-map")
        self.c1 = prf.uniform(TAG_PAIR, 0, 1, q)
        self.c2 = prf.uniform(TAG_PAIR, 0, 2, q)

    def _fwd(self, v):
        x, y = divmod(v, self.q)
        return (y + self.c1) % self.q * self.q + (x + self.c2) % self.q

    def _inv(self, v):
        a, b = divmod(v, self.q)
        return (b - self.c2) % self.q * self.q + (a - self.c1) % self.q

    def _fwd_batch(self, vs):
        x, y = np.divmod(vs, self.q)
        return (y + self.c1) % self.q * self.q + (x + self.c2) % self.q

    def _inv_batch(self, vs):
        a, b = np.divmod(vs, self.q)
        return (b - self.c2) % self.q * self.q + (a - self.c1) % self.q


# -- block ciphers on bit strings -----------------------------------------------


class SmallFeistel:
    """Alternating-halves Feistel cipher on ``bits`` < 128 bits with an AES round function."""

    def __init__(self, prf: Prf, bits: int, rounds: int = FEISTEL_ROUNDS):
        if not 0 <= bits < AES_BLOCK_BITS:
            raise ParameterError("small Feistel covers fewer than 128 bits")
        self.prf, self.bits, self.rounds = prf, bits, rounds
        self.u = bits // 2
        self.v = bits - self.u

    def _width(self, i):
        return self.u if i % 2 == 0 else self.v

    def encrypt(self, x: int) -> int:
        if self.bits == 0:
            return x
        if self.bits == 1:
            return x ^ (self.prf.narrow(TAG_FLIP, 0, 0, 0) & 1)
        a, b = x >> self.v, x & ((1 << self.v) - 1)
        for i in range(self.rounds):
            m = self._width(i)
            c = (a + self.prf.narrow(TAG_FEISTEL, 0, i, b)) & ((1 << m) - 1)
            a, b = b, c
        return (a << self.v) | b

    def decrypt(self, y: int) -> int:
        if self.bits == 0:
            return y
        if self.bits == 1:
            return y ^ (self.prf.narrow(TAG_FLIP, 0, 0, 0) & 1)
        a, b = y >> self.v, y & ((1 << self.v) - 1)
        for i in reversed(range(self.rounds)):
            m = self._width(i)
            c = b
            b = a
            a = (c - self.prf.narrow(TAG_FEISTEL, 0, i, b)) & ((1 << m) - 1)
        return (a << self.v) | b

    def encrypt_batch(self, xs: np.ndarray) -> np.ndarray:
        if self.bits <= 1:
            return xs ^ (self.prf.narrow(TAG_FLIP, 0, 0, 0) & 1) if self.bits else xs.copy()
        a, b = xs >> self.v, xs & ((1 << self.v) - 1)
        for i in range(self.rounds):
            mask = np.uint64((1 << self._width(i)) - 1)
            f = (self.prf.narrow_batch(TAG_FEISTEL, 0, i, b) & mask).astype(np.int64)
            a, b = b, (a + f) & int(mask)
        return (a << self.v) | b

    def decrypt_batch(self, ys: np.ndarray) -> np.ndarray:
        if self.bits <= 1:
            return ys ^ (self.prf.narrow(TAG_FLIP, 0, 0, 0) & 1) if self.bits else ys.copy()
        a, b = ys >> self.v, ys & ((1 << self.v) - 1)
        for i in reversed(range(self.rounds)):
            mask = np.uint64((1 << self._width(i)) - 1)
            f = (self.prf.narrow_batch(TAG_FEISTEL, 0, i, a) & mask).astype(np.int64)
            a, b = (b - f) & int(mask), a
        return (a << self.v) | b


class AesBlocks:
    """AES-256 applied independently to each 128-bit block of a ``bits``-bit integer."""

    def __init__(self, prf: Prf, bits: int):
        if bits % AES_BLOCK_BITS:
            raise ParameterError("block cipher width must be a multiple of 128 bits")
        self.prf, self.nbytes = prf, bits // 8

    def encrypt(self, x: int) -> int:
        return int.from_bytes(self.prf.ecb_encrypt(x.to_bytes(self.nbytes, "big")), "big")

    def decrypt(self, y: int) -> int:
        return int.from_bytes(self.prf.ecb_decrypt(y.to_bytes(self.nbytes, "big")), "big")


class _Walking(Permutation):
    """Cycle walking around a permutation E of [0, 2**bits)."""

    bits: int

    def _e(self, c):
        raise NotImplementedError

    def _d(self, c):
        raise NotImplementedError

    def _e_batch(self, cs):
        return np.fromiter((self._e(int(c)) for c in cs), dtype=np.int64, count=cs.size)

    def _d_batch(self, cs):
        return np.fromiter((self._d(int(c)) for c in cs), dtype=np.int64, count=cs.size)

    def forward_counted(self, x: int) -> tuple[int, int]:
        """Forward value and the number of E applications the walk needed."""
        c, steps = self._e(_check(x, self.N)), 1
        while c >= self.N:
            c, steps = self._e(c), steps + 1
        return c, steps

    def _fwd(self, x):
        return self.forward_counted(x)[0]

    def _inv(self, y):
        c = self._d(y)
        while c >= self.N:
            c = self._d(c)
        return c

    @staticmethod
    def _walk_batch(step, xs, N):
        out = step(xs)
        todo = np.flatnonzero(out >= N)
        while todo.size:
            out[todo] = step(out[todo])
            todo = todo[out[todo] >= N]
        return out

    def _fwd_batch(self, xs):
        return self._walk_batch(self._e_batch, xs, self.N)

    def _inv_batch(self, ys):
        return self._walk_batch(self._d_batch, ys, self.N)


class CycleWalkFpe(_Walking):
    """A 256-bit-keyed block cipher on bit strings, cycle-walked down to N.

    From 128 bits upward the string is padded to whole AES blocks and each
    block is encrypted on its own; below that a small Feistel cipher is used.
    """

    def __init__(self, spec, walk_cap: int = WALK_CAP):
        super().__init__(spec)
        bits = int(self.N - 1).bit_length()
        prf = Prf(spec.key, b"cubelock-fpe")
        if bits >= AES_BLOCK_BITS:
            bits = -(-bits // AES_BLOCK_BITS) * AES_BLOCK_BITS
            if (1 << bits) > walk_cap * self.N:
                raise ParameterError(
                    f"padding {int(self.N).bit_length()} bits to {bits} makes the walk too long; "
                    "use both-ends for this prime"
                )
            self.cipher = AesBlocks(prf, bits)
        else:
            self.cipher = SmallFeistel(prf, bits)
        self.bits = bits

    def _e(self, c):
        return self.cipher.encrypt(c)

    def _d(self, c):
        return self.cipher.decrypt(c)

    def _e_batch(self, cs):
        return self.cipher.encrypt_batch(cs)

    def _d_batch(self, cs):
        return self.cipher.decrypt_batch(cs)


class BothEnds(_Walking):
    """Two block-cipher passes over an l-bit string, offset so that every bit is covered.

    With x = l mod b, the first pass encrypts the top l - x bits with k1 and
    keeps the low x bits; the second keeps the top x bits and encrypts the
    low l - x bits with k2.
    """

    def __init__(self, spec):
        super().__init__(spec)
        l = int(self.N - 1).bit_length()
        if l >= AES_BLOCK_BITS:
            b = AES_BLOCK_BITS
        else:
            b = max(1, l - max(1, l // 4))
        self.bits, self.block = l, b
        self.x = l % b if l else 0
        self.body = l - self.x
        k1, k2 = Prf(spec.key, b"cubelock-both-ends-1"), Prf(spec.key, b"cubelock-both-ends-2")
        if b == AES_BLOCK_BITS:
            self.e1, self.e2 = AesBlocks(k1, self.body), AesBlocks(k2, self.body)
            self._small = False
        else:
            self.e1, self.e2 = SmallFeistel(k1, b), SmallFeistel(k2, b)
            self._small = True

    def _blocks(self, cipher, v, decrypt=False):
        if not self._small:
            return cipher.decrypt(v) if decrypt else cipher.encrypt(v)
        fn = cipher.decrypt if decrypt else cipher.encrypt
        b, mask, out = self.block, (1 << self.block) - 1, 0
        for i in range(self.body // b):
            out |= fn((v >> (i * b)) & mask) << (i * b)
        return out

    def _blocks_batch(self, cipher, v, decrypt=False):
        fn = cipher.decrypt_batch if decrypt else cipher.encrypt_batch
        b, mask = self.block, (1 << self.block) - 1
        out = np.zeros_like(v)
        for i in range(self.body // b):
            out |= fn((v >> (i * b)) & mask) << (i * b)
        return out

    def _e(self, s):
        if self.bits == 0:
            return s
        x, low_mask = self.x, (1 << self.x) - 1
        t = (self._blocks(self.e1, s >> x) << x) | (s & low_mask)
        body_mask = (1 << self.body) - 1
        return ((t >> self.body) << self.body) | self._blocks(self.e2, t & body_mask)

    def _d(self, r):
        if self.bits == 0:
            return r
        body_mask = (1 << self.body) - 1
        t = ((r >> self.body) << self.body) | self._blocks(self.e2, r & body_mask, decrypt=True)
        x = self.x
        return (self._blocks(self.e1, t >> x, decrypt=True) << x) | (t & ((1 << x) - 1))

    def _e_batch(self, s):
        if self.bits == 0:
            return s.copy()
        x = self.x
        t = (self._blocks_batch(self.e1, s >> x) << x) | (s & ((1 << x) - 1))
        body_mask = (1 << self.body) - 1
        return ((t >> self.body) << self.body) | self._blocks_batch(self.e2, t & body_mask)

    def _d_batch(self, r):
        if self.bits == 0:
            return r.copy()
        body_mask = (1 << self.body) - 1
        t = ((r >> self.body) << self.body) | self._blocks_batch(self.e2, r & body_mask, decrypt=True)
        x = self.x
        return (self._blocks_batch(self.e1, t >> x, decrypt=True) << x) | (t & ((1 << x) - 1))


# -- card shuffles ------------------------------------------------------------------


def thorp_forward(x: int, size: int, rounds: int, coin) -> int:
    """Trace card ``x`` through ``rounds`` Thorp shuffles of a deck of ``size`` (even) cards.

    ``coin(i, xm)`` is the flip for the pair (xm, xm + size/2) in round i.
    """
    half = size >> 1
    for i in range(rounds):
        xm = x % half
        b = coin(i, xm)
        x = 2 * xm + 1 - b if x < half else 2 * xm + b
    return x


def thorp_inverse(y: int, size: int, rounds: int, coin) -> int:
    half = size >> 1
    for i in reversed(range(rounds)):
        xm = y >> 1
        b = coin(i, xm)
        y = xm if (y & 1) == 1 - b else xm + half
    return y


class Thorp(_Walking):
    def __init__(self, spec):
        super().__init__(spec)
        self.bits = int(self.N - 1).bit_length()
        self.size = 1 << self.bits
        self.rounds = spec.effective_rounds
        self.prf = Prf(spec.key, b"cubelock-thorp")

    def _coin(self, i, xm):
        return self.prf.bit(TAG_COIN, 0, i, xm, self.size)

    def _e(self, c):
        if self.size == 1:
            return c
        return thorp_forward(c, self.size, self.rounds, self._coin)

    def _d(self, c):
        if self.size == 1:
            return c
        return thorp_inverse(c, self.size, self.rounds, self._coin)

    def _e_batch(self, xs):
        if self.size == 1:
            return xs.copy()
        half = self.size >> 1
        x = xs.copy()
        for i in range(self.rounds):
            xm = x & (half - 1)
            b = self.prf.bit_batch(TAG_COIN, 0, i, xm)
            x = np.where(x < half, 2 * xm + 1 - b, 2 * xm + b)
        return x

    def _d_batch(self, ys):
        if self.size == 1:
            return ys.copy()
        half = self.size >> 1
        y = ys.copy()
        for i in reversed(range(self.rounds)):
            xm = y >> 1
            b = self.prf.bit_batch(TAG_COIN, 0, i, xm)
            y = np.where((y & 1) == 1 - b, xm, xm + half)
        return y


class _SwapOrNotCore:
    """Swap-or-not rounds on [0, size) with keys and coins bound to ``level``."""

    def __init__(self, prf: Prf, size: int, rounds: int, level: int, coin_domain: int):
        self.prf, self.size, self.rounds, self.level = prf, size, rounds, level
        self.coin_domain = coin_domain
        self._keys = None
        if rounds * max(1, size.bit_length()) <= ROUND_KEY_CACHE_BITS:
            self._keys = [self._round_key(i) for i in range(rounds)]

    def _round_key(self, i):
        return self.prf.uniform(TAG_ROUNDKEY, self.level, i, self.size)

    def key(self, i):
        return self._keys[i] if self._keys is not None else self._round_key(i)

    def round(self, i, x):
        y = (self.key(i) - x) % self.size
        if self.prf.bit(TAG_COIN, self.level, i, max(x, y), self.coin_domain):
            return y
        return x

    def forward(self, x):
        for i in range(self.rounds):
            x = self.round(i, x)
        return x

    def inverse(self, y):
        for i in reversed(range(self.rounds)):
            y = self.round(i, y)
        return y

    def round_batch(self, i, x):
        y = (self.key(i) - x) % self.size
        b = self.prf.bit_batch(TAG_COIN, self.level, i, np.maximum(x, y))
        return np.where(b == 1, y, x)

    def forward_batch(self, x):
        for i in range(self.rounds):
            x = self.round_batch(i, x)
        return x

    def inverse_batch(self, y):
        for i in reversed(range(self.rounds)):
            y = self.round_batch(i, y)
        return y


class SwapOrNot(Permutation):
    def __init__(self, spec):
        super().__init__(spec)
        self.core = _SwapOrNotCore(Prf(spec.key, b"cubelock-swap-or-not"), self.N, spec.effective_rounds, 0, self.N)

    def _fwd(self, x):
        return self.core.forward(x)

    def _inv(self, y):
        return self.core.inverse(y)

    def _fwd_batch(self, xs):
        return self.core.forward_batch(xs.copy())

    def _inv_batch(self, ys):
        return self.core.inverse_batch(ys.copy())


class MixAndCut(_Walking):
    """Swap-or-not on the whole deck, then recurse on the lower half while the card is there."""

    def __init__(self, spec):
        super().__init__(spec)
        self.bits = int(self.N - 1).bit_length()
        self.size = 1 << self.bits
        self.rounds = spec.effective_rounds
        self.prf = Prf(spec.key, b"cubelock-mix-and-cut")
        self._levels: dict[int, _SwapOrNotCore] = {}

    def level(self, j) -> _SwapOrNotCore:
        core = self._levels.get(j)
        if core is None:
            core = _SwapOrNotCore(self.prf, self.size >> j, self.rounds, j, self.size)
            self._levels[j] = core
        return core

    def _e(self, x):
        j, s = 0, self.size
        while s > 1:
            x = self.level(j).forward(x)
            if x >= s >> 1:
                return x
            j, s = j + 1, s >> 1
        return 0

    def _d(self, y):
        j, s = 0, self.size
        while s > 1 and y < s >> 1:
            j, s = j + 1, s >> 1
        # y left the recursion at level j (or bottomed out at size 1)
        if s > 1:
            y = self.level(j).inverse(y)
        for k in reversed(range(j)):
            y = self.level(k).inverse(y)
        return y

    def _e_batch(self, xs):
        x = xs.copy()
        active = np.ones(x.size, dtype=bool)
        j, s = 0, self.size
        while s > 1 and active.any():
            idx = np.flatnonzero(active)
            x[idx] = self.level(j).forward_batch(x[idx])
            active[idx[x[idx] >= s >> 1]] = False
            j, s = j + 1, s >> 1
        x[active] = 0
        return x

    def _d_batch(self, ys):
        y = ys.copy()
        exit_level = np.zeros(y.size, dtype=np.int64)
        s, j = self.size, 0
        pending = np.ones(y.size, dtype=bool)
        while s > 1:
            leaving = pending & (y >= s >> 1)
            exit_level[leaving] = j
            pending &= ~leaving
            j, s = j + 1, s >> 1
        exit_level[pending] = j  # reached size 1; nothing to undo at that level
        top = j
        for k in range(top, -1, -1):
            if self.size >> k <= 1:
                continue
            idx = np.flatnonzero(exit_level >= k)
            if idx.size:
                y[idx] = self.level(k).inverse_batch(y[idx])
        return y


# -- construction ------------------------------------------------------------------


_CLASSES = {
    "swap-neighbors": SwapNeighbors,
    "cycle-walk-fpe": CycleWalkFpe,
    "both-ends": BothEnds,
    "thorp": Thorp,
    "swap-or-not": SwapOrNot,
    "mix-and-cut": MixAndCut,
}


@lru_cache(maxsize=256)
def build(spec: PermSpec) -> Permutation:
    """Permutation object for ``spec``.  Objects are cached and safe to share."""
    if spec.kind == "pair-map":
        return PairMap(spec, isqrt(spec.N))
    return _CLASSES[spec.kind](spec)


def perm_forward(spec: PermSpec, x: int) -> int:
    return build(spec).forward(x)


def perm_inverse(spec: PermSpec, y: int) -> int:
    return build(spec).inverse(y)
