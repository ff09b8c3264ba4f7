"""Polynomial-gcd attack on a two-stage swap-neighbors chain.

With both stages known up to their +-1 shifts, c = ((m + s1)**3 + s2)**3 is
a degree-9 polynomial identity in m.  If the guessed signs are right, m is a
root of P(z) - c, and gcd(P(z) - c, z**(p-1) - 1) collects the nonzero
roots.  The expensive power z**(p-1) is taken modulo P(z) - c, so every
intermediate has degree below 9.

For p = 2 mod 3 cubing is a bijection and the gcd is exactly z - m.  For
p = 1 mod 3 it can have up to nine roots; the attack keeps those whose
parities agree with the guessed signs and answers only when one is left.
"""

from dataclasses import dataclass

from ..chain import ChainSpec, StageSpec, chain_apply
from ..errors import CapacityError, ParameterError
from ..kernels import poly_powmod_x

MAX_PRIME = 1 << 20
DEFAULT_SIGNS = (1, -1)


@dataclass(frozen=True)
class PolyModP:
    """Coefficients from degree 0 upward, reduced mod p, no trailing zeros."""

    coeffs: tuple
    p: int

    @classmethod
    def make(cls, coeffs, p: int) -> "PolyModP":
        c = [int(x) % p for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        return cls(tuple(c), p)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return PolyModP.make([x + y for x, y in zip(a, b)], self.p)

    def __neg__(self):
        return PolyModP.make([-x for x in self.coeffs], self.p)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not self.coeffs or not other.coeffs:
            return PolyModP((), self.p)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyModP.make(out, self.p)

    def divmod(self, other):
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        r = list(self.coeffs)
        q = [0] * max(0, len(r) - len(other.coeffs) + 1)
        inv = pow(other.coeffs[-1], -1, p)
        d = other.degree
        for k in range(len(r) - 1, d - 1, -1):
            c = r[k] * inv % p
            if c:
                q[k - d] = c
                for t, b in enumerate(other.coeffs):
                    r[k - d + t] = (r[k - d + t] - c * b) % p
        return PolyModP.make(q, p), PolyModP.make(r, p)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self):
        if not self.coeffs:
            return self
        inv = pow(self.coeffs[-1], -1, self.p)
        return PolyModP.make([c * inv for c in self.coeffs], self.p)

    def __call__(self, z: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * z + c) % self.p
        return acc


def poly_powmod(base: PolyModP, e: int, mod: PolyModP) -> PolyModP:
    result, base = PolyModP.make([1], base.p), base % mod
    while e:
        if e & 1:
            result = result * base % mod
        base = base * base % mod
        e >>= 1
    return result


def split_roots(g: PolyModP) -> list[int]:
    """Roots of a monic g that is a product of distinct linear factors (p odd).

    Cantor-Zassenhaus with the deterministic shifts z + 0, z + 1, ...
    """
    p = g.p
    if g.degree <= 0:
        return []
    if g.degree == 1:
        return [(-g.coeffs[0]) % p]
    for delta in range(p):
        t = poly_powmod(PolyModP.make([delta, 1], p), (p - 1) // 2, g) - PolyModP.make([1], p)
        h = poly_gcd(g, t)
        if 0 < h.degree < g.degree:
            return sorted(split_roots(h) + split_roots(g.divmod(h)[0].monic()))
    raise ParameterError("polynomial does not split into distinct linear factors")


def poly_gcd(a: PolyModP, b: PolyModP) -> PolyModP:
    while b.coeffs:
        a, b = b, a % b
    return a.monic()


def chain_polynomial(p: int, signs=DEFAULT_SIGNS) -> PolyModP:
    """((z + s1)**3 + s2)**3 over Z_p."""
    s1, s2 = signs
    inner = PolyModP.make([s1, 1], p)
    cubed = inner * inner * inner + PolyModP.make([s2], p)
    return cubed * cubed * cubed


def swap_neighbors_chain(p: int) -> ChainSpec:
    return ChainSpec(p, (StageSpec("swap-neighbors"), StageSpec("swap-neighbors")))


def signs_of(p: int, m: int) -> tuple[int, int]:
    """The shifts the two swap-neighbors stages actually apply to m (0 where a value is fixed)."""

    def shift(x):
        if x & 1:
            return 1 if x + 1 < p else 0
        return -1 if x else 0

    s1 = shift(m)
    return s1, shift(pow(m + s1, 3, p))


def gcd_attack_swap_neighbors(p: int, c: int, signs=DEFAULT_SIGNS) -> int | None:
    """Recover m from c = h(m) for the two-stage swap-neighbors chain, or None.

    A candidate is returned only if it is the single root consistent with
    ``signs`` and re-running the chain on it gives c, so a wrong sign guess
    gives None rather than a wrong answer.
    """
    if p > MAX_PRIME:
        raise CapacityError("the polynomial kernel works with p below 2**20")
    if not 0 <= c < p:
        raise ParameterError("ciphertext must be below p")
    if c == 0:
        raise ParameterError("c = 0 is excluded: z = 0 drops out of the gcd")
    signs = tuple(signs)
    f = chain_polynomial(p, signs) - PolyModP.make([c], p)
    r = poly_powmod_x(p - 1, list(f.coeffs), p)
    r = PolyModP.make([int(v) for v in r], p) - PolyModP.make([1], p)
    g = poly_gcd(f, r)
    candidates = [z for z in split_roots(g) if signs_of(p, z) == signs]
    if len(candidates) != 1:
        return None
    m = candidates[0]
    if chain_apply(swap_neighbors_chain(p), m) != c:
        return None
    return m


def gcd_attack_success_rate(p: int, signs=DEFAULT_SIGNS) -> tuple[float, int, int]:
    """Attack every m in Z_p; returns (rate, successes, verified) with verified == successes."""
    chain = swap_neighbors_chain(p)
    successes = verified = 0
    for m in range(p):
        c = chain_apply(chain, m)
        if c == 0:
            continue
        got = gcd_attack_swap_neighbors(p, c, signs)
        if got is not None:
            successes += 1
            verified += chain_apply(chain, got) == c
    return successes / p, successes, verified
