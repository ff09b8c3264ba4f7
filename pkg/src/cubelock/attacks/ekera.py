"""Exact classical simulation of the short discrete-log quantum experiment at toy sizes.

The register holds a in [0, 2**(m+l)) and b in [0, 2**l); after computing
y = g**a * x**-b and Fourier-transforming both indices, the probability of
reading (j, k) is

    P(j, k) = sum_y |sum_{a,b : g^a x^-b = y} e^{2 pi i (a j / 2^(m+l) + b k / 2^l)}|^2 / 2^(2(m+2l))

which we get from one 2-D FFT per group element y.  Post-processing turns
n samples into a lattice and reads the logarithm off the closest vector.
"""

from dataclasses import dataclass
from math import ceil

import numpy as np

from ..bigmath import FixedBaseTable, carmichael, factorize
from ..errors import CapacityError, ParameterError
from ..kernels import element_orders
from .lattice import babai_cvp

MAX_STATE_BITS = 24


@dataclass(frozen=True)
class EkeraInstance:
    p: int
    g: int
    x: int
    s: int = 1

    def __post_init__(self):
        if self.p < 3 or self.p >= 1 << 12:
            raise ParameterError("toy instances need 3 <= p < 2**12")
        if self.s < 1:
            raise ParameterError("s must be at least 1")
        if not 0 < self.x < self.p:
            raise ParameterError("x must be a unit mod p")
        if group_order(self.p, self.g) != self.p - 1:
            raise ParameterError(f"{self.g} does not generate Z_{self.p}*")
        if self.m + 2 * self.l > MAX_STATE_BITS:
            raise CapacityError(f"m + 2l = {self.m + 2 * self.l} exceeds {MAX_STATE_BITS}")

    @property
    def m(self) -> int:
        """2**(m-1) <= p < 2**m."""
        return self.p.bit_length()

    @property
    def l(self) -> int:
        return ceil(self.m / self.s)


def group_order(p: int, g: int) -> int:
    lam = carmichael(p)
    orders = element_orders(p, lam, list(factorize(lam)))
    return int(orders[g % p])


def discrete_log(p: int, g: int, x: int) -> int:
    """Exhaustive log for tests: smallest d >= 0 with g**d = x."""
    v = 1
    for d in range(p):
        if v == x % p:
            return d
        v = v * g % p
    raise ParameterError(f"{x} is not a power of {g} mod {p}")


def _powers(g: int, p: int, count: int) -> np.ndarray:
    """g**a mod p for a in [0, count), each a product of fixed-base table entries."""
    bits = max(1, (count - 1).bit_length())
    table = np.array(FixedBaseTable.build(g, p, bits).powers, dtype=np.int64)
    a = np.arange(count, dtype=np.int64)
    out = np.ones(count, dtype=np.int64)
    for i in range(bits):
        sel = ((a >> i) & 1).astype(bool)
        out[sel] = out[sel] * table[i] % p
    return out


def distribution(inst: EkeraInstance) -> np.ndarray:
    """P[j, k] for j < 2**(m+l), k < 2**l."""
    m, l, p = inst.m, inst.l, inst.p
    A, B = 1 << (m + l), 1 << l
    ga = _powers(inst.g, p, A)
    xinv = _powers(pow(inst.x, -1, p), p, B)
    y = (ga[:, None] * xinv[None, :]) % p
    probs = np.zeros((A, B))
    for value in np.unique(y).tolist():
        amp = np.fft.fft2((y == value).astype(np.float64))
        probs += amp.real**2 + amp.imag**2
    return probs / float(A * B) ** 2


class Sampler:
    """Draws (j, k) pairs from the exact distribution of an instance."""

    def __init__(self, inst: EkeraInstance):
        self.inst = inst
        self.probs = distribution(inst)
        flat = self.probs.ravel()
        self._cdf = np.cumsum(flat)
        self._cdf /= self._cdf[-1]
        self._cols = self.probs.shape[1]

    def sample(self, rng: np.random.Generator, size: int | None = None):
        u = rng.random(size if size is not None else 1)
        idx = np.minimum(np.searchsorted(self._cdf, u, side="right"), self._cdf.size - 1)
        j, k = np.divmod(idx, self._cols)
        if size is None:
            return int(j[0]), int(k[0])
        return j, k


def ekera_simulate(inst: EkeraInstance, rng: np.random.Generator) -> tuple[int, int]:
    return Sampler(inst).sample(rng)


def total_variation(probs: np.ndarray, j: np.ndarray, k: np.ndarray) -> float:
    counts = np.zeros(probs.shape)
    np.add.at(counts, (j, k), 1)
    return 0.5 * float(np.abs(counts / counts.sum() - probs).sum())


def center(v: int, modulus: int) -> int:
    """(v mod M) - M * floor((v mod M) / (M/2)); lands in [-M/2, M/2)."""
    r = v % modulus
    return r - modulus * (r // (modulus // 2))


def ekera_postprocess(pairs, m: int, s: int, order: int | None = None) -> int | None:
    """Logarithm candidate from n (j, k) pairs via Babai's nearest plane.

    The last coordinate of the closest vector is reduced modulo ``order``
    (pass p - 1): Babai often lands on d - (p - 1) rather than d itself.
    """
    pairs = [(int(j), int(k)) for j, k in pairs]
    if not pairs:
        raise ParameterError("need at least one pair")
    l = ceil(m / s)
    M = 1 << (m + l)
    n = len(pairs)
    basis = [[j for j, _ in pairs] + [1]]
    for i in range(n):
        row = [0] * (n + 1)
        row[i] = M
        basis.append(row)
    target = [center(-(1 << m) * k, M) for _, k in pairs] + [0]
    try:
        u = babai_cvp(basis, target)
    except ParameterError:
        return None
    return u[n] % order if order else u[n]


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    pairs: tuple
    recovered: int | None
    ok: bool

    def line(self) -> str:
        js = ",".join(str(j) for j, _ in self.pairs)
        ks = ",".join(str(k) for _, k in self.pairs)
        rec = "none" if self.recovered is None else str(self.recovered)
        return f"trial={self.trial} j={js} k={ks} recovered={rec} ok={int(self.ok)}"


def run_trials(inst: EkeraInstance, trials: int, n: int | None = None, rng=None) -> list[TrialRecord]:
    """End-to-end: sample n pairs per trial, post-process, check g**d = x."""
    rng = rng if rng is not None else np.random.default_rng()
    n = n or inst.s + 1
    sampler = Sampler(inst)
    records = []
    for t in range(trials):
        j, k = sampler.sample(rng, n)
        pairs = tuple(zip(j.tolist(), k.tolist()))
        d = ekera_postprocess(pairs, inst.m, inst.s, order=inst.p - 1)
        ok = d is not None and pow(inst.g, d, inst.p) == inst.x
        records.append(TrialRecord(t, pairs, d, ok))
    return records
