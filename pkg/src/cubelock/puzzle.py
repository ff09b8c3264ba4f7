"""The cubing delay-encryption scheme.

Encryption cubes a padded message modulo a safe prime p; decryption raises
the ciphertext to ``b = (1 + 2(p - 1)) / 3``, which costs about ``log2 p``
sequential squarings.  ``lambda`` throughout is the squaring speed an
adversary is assumed to reach, so a prime with ``floor(log2 p) = lambda * T``
holds a message for roughly ``T`` seconds.

Padded layout, least-significant bit first::

    [0, 32)            message length L in bytes
    [32, 32 + 8L)      message, big-endian
    next l bits        seed
    up to bit n - 3    fill expanded from the seed
    bit n - 2          1
    bit n - 1          0

so every padded value lies in ``[2**(n-2), 2**(n-1))`` and can be unpadded
without the seed.
"""

import hashlib
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import NamedTuple

from gmpy2 import mpz

from .bigmath import DepthTrace, carmichael, factorize, gen_safe_prime, is_prime, is_safe_prime, powmod_window
from .errors import CapacityError, FormatError, PaddingError, ParameterError, WrongKeyError
from .formats import fields, parse_hex, parse_lines, parse_number

DEFAULT_SEED_LEN = 256
MIN_PRIME_BITS = 64
CURATED_THRESHOLD = 16384  # lambda*T above this uses a bundled prime
FULL_CHECK_BITS = 8192  # keys larger than this get a single probabilistic round
LENGTH_BITS = 32
FILL_LABEL = b"cubelock-fill-v1"


# -- parameters ---------------------------------------------------------------


def fingerprint(p: int) -> bytes:
    """First 16 bytes of SHA-256 over p's minimal big-endian encoding."""
    p = int(p)
    return hashlib.sha256(p.to_bytes(max(1, (p.bit_length() + 7) // 8), "big")).digest()[:16]


def decryption_exponent(p: int) -> int:
    if p % 3 != 2:
        raise ParameterError("p must be 2 mod 3 for cubing to be invertible")
    return (1 + 2 * (int(p) - 1)) // 3


@dataclass(frozen=True)
class PuzzleParams:
    p: int
    b: int
    T: float = 0.0
    lam: float = 0.0
    source: str = "generated"
    deviation: int = 0  # floor(log2 p) - lambda*T, nonzero only on the curated path

    def __post_init__(self):
        if self.b != decryption_exponent(self.p):
            raise ParameterError("b does not match p")

    @property
    def n(self) -> int:
        return int(self.p).bit_length()

    @property
    def fingerprint(self) -> bytes:
        return fingerprint(self.p)

    @classmethod
    def from_prime(cls, p: int, T: float = 0.0, lam: float = 0.0, check: bool = True, **kw) -> "PuzzleParams":
        p = int(p)
        if check and not _check_safe_prime(p):
            raise ParameterError("p is not a safe prime")
        return cls(p, decryption_exponent(p), T, lam, **kw)


def _check_safe_prime(p: int) -> bool:
    if p in curated_primes():
        return True
    if p.bit_length() <= FULL_CHECK_BITS:
        return is_safe_prime(p)
    # Full tests at these sizes cost more than decrypting; settle for one round each.
    return p % 3 == 2 and is_prime(p, rounds=1) and is_prime((p - 1) // 2, rounds=1)


_PRIME_EXPR = re.compile(r"^(\d+)\*2\^(\d+)([+-]\d+)$")


def parse_prime_expr(text: str) -> int:
    text = text.replace(" ", "")
    if text.lower().startswith("0x"):
        return int(text, 16)
    m = _PRIME_EXPR.match(text)
    if not m:
        raise FormatError(f"cannot parse prime expression {text!r}")
    return int(m.group(1)) * (1 << int(m.group(2))) + int(m.group(3))


def load_curated_primes(path=None, bundled: str = "curated_primes.txt") -> tuple[int, ...]:
    if path is None:
        text = resources.files("cubelock").joinpath("data", bundled).read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    primes = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            primes.append(parse_prime_expr(line))
        except FormatError as exc:
            raise FormatError(str(exc), line=lineno) from None
    return tuple(primes)


@lru_cache(maxsize=1)
def curated_primes() -> tuple[int, ...]:
    return load_curated_primes()


@lru_cache(maxsize=1)
def bench_primes() -> dict[int, int]:
    """Bundled safe primes of 512 to 4096 bits for timing sweeps, keyed by bit length."""
    return {p.bit_length(): p for p in load_curated_primes(bundled="bench_primes.txt")}


def setup(T: float, lam: float, rng=None, curated: tuple[int, ...] | None = None) -> PuzzleParams:
    """Pick p with ``floor(log2 p) = lambda * T``.

    Up to 16384 bits the prime is generated.  Beyond that the nearest bundled
    prime is used and the shortfall or excess is stored in ``deviation``.
    """
    if T <= 0 or lam <= 0:
        raise ParameterError("T and lambda must be positive")
    target = int(math.floor(lam * T))
    if target < MIN_PRIME_BITS:
        raise ParameterError(f"lambda*T = {target} is below the {MIN_PRIME_BITS}-bit minimum")
    if target <= CURATED_THRESHOLD:
        p = gen_safe_prime(target + 1, rng)
        return PuzzleParams(p, decryption_exponent(p), T, lam)
    pool = curated if curated is not None else curated_primes()
    if not pool:
        raise ParameterError("no curated primes available for this size")
    p = min(pool, key=lambda q: (abs(q.bit_length() - 1 - target), q))
    return PuzzleParams(p, decryption_exponent(p), T, lam, source="curated", deviation=p.bit_length() - 1 - target)


# -- padding --------------------------------------------------------------------


def max_message_bytes(n: int, seed_len: int = DEFAULT_SEED_LEN) -> int:
    """Largest |m| with 32 + 8|m| + l + 1 <= n - 2."""
    return max(-1, (n - 3 - LENGTH_BITS - seed_len) // 8)


def _fill(seed: int, seed_len: int, nbits: int) -> int:
    if nbits <= 0:
        return 0
    h = hashlib.shake_256(FILL_LABEL + seed_len.to_bytes(4, "big") + seed.to_bytes((seed_len + 7) // 8, "big"))
    return int.from_bytes(h.digest((nbits + 7) // 8), "big") >> (-nbits % 8)


def pad(m: bytes, seed: int, seed_len: int, n: int) -> int:
    if seed_len < 0 or not 0 <= seed < (1 << seed_len):
        raise ParameterError("seed does not fit in seed_len bits")
    if LENGTH_BITS + 8 * len(m) + seed_len + 1 > n - 2:
        raise CapacityError(
            f"{len(m)}-byte message does not fit a {n}-bit prime with a {seed_len}-bit seed "
            f"(max {max_message_bytes(n, seed_len)} bytes)"
        )
    pos = LENGTH_BITS + 8 * len(m)
    x = len(m) | (int.from_bytes(m, "big") << LENGTH_BITS) | (seed << pos)
    pos += seed_len
    x |= _fill(seed, seed_len, n - 2 - pos) << pos
    return x | (1 << (n - 2))


def unpad(x: int, n: int, seed_len: int | None = None) -> bytes:
    """Recover the message.  With ``seed_len`` the fill bits are verified too."""
    x = int(x)
    if x >> (n - 2) != 1:
        raise PaddingError("marker bit missing")
    length = x & ((1 << LENGTH_BITS) - 1)
    if LENGTH_BITS + 8 * length + 1 > n - 2:
        raise PaddingError(f"declared length {length} does not fit a {n}-bit prime")
    m = ((x >> LENGTH_BITS) & ((1 << (8 * length)) - 1)).to_bytes(length, "big")
    if seed_len is not None:
        pos = LENGTH_BITS + 8 * length
        if pos + seed_len + 1 > n - 2:
            raise PaddingError("declared length leaves no room for the seed")
        seed = (x >> pos) & ((1 << seed_len) - 1)
        pos += seed_len
        width = n - 2 - pos
        if (x >> pos) & ((1 << width) - 1) != _fill(seed, seed_len, width):
            raise PaddingError("fill bits do not match the seed")
    return m


# -- encryption -------------------------------------------------------------------


@dataclass(frozen=True)
class Ciphertext:
    c: int
    fingerprint: bytes
    seed_len: int
    chain_id: str | None = field(default=None)


def cube(x: int, p: int) -> int:
    """x**3 mod p as one squaring and one multiplication."""
    x = mpz(x)
    return int(x * x % p * x % p)


def encrypt_value(x: int, params: PuzzleParams) -> tuple[int, DepthTrace]:
    if not 0 <= x < params.p:
        raise ParameterError("value must be below p")
    return cube(x, params.p), DepthTrace(2, 2)


def encrypt(m: bytes, params: PuzzleParams, rng=None, seed_len: int = DEFAULT_SEED_LEN) -> Ciphertext:
    if rng is None:
        import secrets

        rng = secrets.SystemRandom()
    seed = rng.getrandbits(seed_len) if seed_len else 0
    x = pad(m, seed, seed_len, params.n)
    c, _ = encrypt_value(x, params)
    return Ciphertext(c, params.fingerprint, seed_len)


def decrypt_value(c: int, params: PuzzleParams, w: int = 6, strategy: str = "montgomery") -> tuple[int, DepthTrace]:
    if not 0 <= c < params.p:
        raise ParameterError("ciphertext must be below p")
    return powmod_window(c, params.b, params.p, w=w, strategy=strategy)


def decrypt_traced(
    ct: Ciphertext, params: PuzzleParams, w: int = 6, strategy: str = "montgomery"
) -> tuple[bytes, DepthTrace]:
    if ct.fingerprint != params.fingerprint:
        raise WrongKeyError("ciphertext was made for a different prime")
    x, trace = decrypt_value(ct.c, params, w, strategy)
    return unpad(x, params.n, ct.seed_len), trace


def decrypt(ct: Ciphertext, params: PuzzleParams, w: int = 6, strategy: str = "montgomery") -> bytes:
    return decrypt_traced(ct, params, w, strategy)[0]


# -- analysis -----------------------------------------------------------------------


class SeedBound(NamedTuple):
    minimum: int
    recommended: int


def seed_length_bound(C: float, n: int, epsilon: float, recommended: int = DEFAULT_SEED_LEN) -> SeedBound:
    """Smallest integer l with l > log C + log(n - 1) - log eps - 1 (base 2).

    An adversary testing C seeds concurrently, each test costing n - 1
    squarings, should succeed with probability below eps.
    """
    if C < 1 or not 0 < epsilon < 1 or n < 2:
        raise ParameterError("need C >= 1, 0 < epsilon < 1 and n >= 2")
    bound = math.log2(C) + math.log2(n - 1) - math.log2(epsilon) - 1
    minimum = max(0, math.floor(bound) + 1)
    return SeedBound(minimum, max(recommended, minimum))


@dataclass(frozen=True)
class ExponentSizes:
    m: int
    H: int
    units: int
    K: dict  # epsilon -> K^eps_m
    bitsizes: dict  # element order -> bit size of 3^-1 mod order (absent when 3 | order)


ENUMERATION_LIMIT = 10**4


def exponent_size_oracle(m: int, epsilons=(1, 2, 3, 4)) -> ExponentSizes:
    """Brute-force the cube-root exponent sizes over all units of Z_m.

    For each unit x with 3 not dividing ord(x), b = 3^-1 mod ord(x) needs
    ``b.bit_length()`` bits; H is the largest such size and K^eps counts the
    units whose size is more than eps - 1 bits below H (or that have no b).
    """
    from .kernels import element_orders

    if m < 3:
        raise ParameterError("modulus must be at least 3")
    if m > ENUMERATION_LIMIT:
        raise CapacityError(f"enumeration is capped at m <= {ENUMERATION_LIMIT}")
    lam = carmichael(m)
    orders = element_orders(m, lam, list(factorize(lam)) or [1])
    unit_orders = orders[orders > 0]
    counts: dict[int, int] = {}
    for o in unit_orders.tolist():
        counts[o] = counts.get(o, 0) + 1
    bitsizes = {o: (pow(3, -1, o) if o > 1 else 0).bit_length() for o in counts if o % 3}
    units = int(unit_orders.size)
    H = max(bitsizes.values())
    K = {}
    for eps in epsilons:
        near = sum(counts[o] for o, bits in bitsizes.items() if H - bits < eps)
        K[eps] = units - near
    return ExponentSizes(m, H, units, K, bitsizes)


# -- files --------------------------------------------------------------------------


def dump_key(params: PuzzleParams) -> str:
    return (
        "cubelock-key v1\n"
        f"p={params.p:x}\n"
        f"b={params.b:x}\n"
        f"T={params.T:g}\n"
        f"lambda={params.lam:g}\n"
    )


def load_key(text: str, check: bool = True) -> PuzzleParams:
    f = fields(parse_lines(text, "cubelock-key v1"), ("p", "b", "T", "lambda"))
    p = parse_hex(f["p"][1], f["p"][0], "p")
    b = parse_hex(f["b"][1], f["b"][0], "b")
    T = parse_number(f["T"][1], f["T"][0], "T")
    lam = parse_number(f["lambda"][1], f["lambda"][0], "lambda")
    if p % 3 != 2 or b != decryption_exponent(p):
        raise FormatError("b is not the decryption exponent for p", line=f["b"][0])
    if check and not _check_safe_prime(p):
        raise FormatError("p is not a safe prime", line=f["p"][0])
    source = "curated" if p in curated_primes() else "generated"
    deviation = p.bit_length() - 1 - int(math.floor(lam * T)) if source == "curated" else 0
    return PuzzleParams(p, b, T, lam, source=source, deviation=deviation)


def dump_ciphertext(ct: Ciphertext) -> str:
    return (
        "cubelock-ct v1\n"
        f"fp={ct.fingerprint.hex()}\n"
        f"l={ct.seed_len}\n"
        f"chain={ct.chain_id or 'none'}\n"
        f"c={ct.c:x}\n"
    )


def load_ciphertext(text: str) -> Ciphertext:
    f = fields(parse_lines(text, "cubelock-ct v1"), ("fp", "l", "chain", "c"))
    line, fp = f["fp"]
    if not re.fullmatch(r"[0-9a-fA-F]{32}", fp):
        raise FormatError("fp must be 32 hex characters", line=line)
    seed_len = parse_number(f["l"][1], f["l"][0], "l", int)
    if seed_len < 0:
        raise FormatError("l must be nonnegative", line=f["l"][0])
    chain = f["chain"][1]
    if chain != "none" and not re.fullmatch(r"[0-9a-f]{32}", chain):
        raise FormatError("chain must be 'none' or a 32-hex-digit chain id", line=f["chain"][0])
    c = parse_hex(f["c"][1], f["c"][0], "c")
    return Ciphertext(c, bytes.fromhex(fp), seed_len, None if chain == "none" else chain)
