"""LLL reduction and Babai's nearest-plane CVP in exact rational arithmetic.

Meant for the handful of dimensions the discrete-log post-processing needs;
everything is recomputed from scratch after each swap, which is fine below
dimension 16 and keeps the code easy to check.
"""

from fractions import Fraction
from math import floor

from ..errors import CapacityError, ParameterError

MAX_DIM = 16
DELTA = Fraction(3, 4)


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def gram_schmidt(basis) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """Orthogonal vectors b*_i and coefficients mu[i][j] = <b_i, b*_j> / |b*_j|^2."""
    ortho: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * len(basis) for _ in basis]
    for i, b in enumerate(basis):
        v = [Fraction(x) for x in b]
        for j in range(i):
            mu[i][j] = _dot(b, ortho[j]) / norms[j] if norms[j] else Fraction(0)
            v = [a - mu[i][j] * c for a, c in zip(v, ortho[j])]
        ortho.append(v)
        norms.append(_dot(v, v))
    return ortho, mu


def check_independent(basis) -> None:
    ortho, _ = gram_schmidt(basis)
    if any(_dot(v, v) == 0 for v in ortho):
        raise ParameterError("basis vectors are linearly dependent")


def lll_reduce(basis, delta: Fraction = DELTA) -> list[list[int]]:
    """LLL-reduced basis of the lattice spanned by the integer rows of ``basis``."""
    b = [[int(x) for x in row] for row in basis]
    if len(b) > MAX_DIM:
        raise CapacityError(f"lattice dimension above {MAX_DIM}")
    check_independent(b)
    n = len(b)
    ortho, mu = gram_schmidt(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = _nearest(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                ortho, mu = gram_schmidt(b)
        nk, nk1 = _dot(ortho[k], ortho[k]), _dot(ortho[k - 1], ortho[k - 1])
        if nk >= (delta - mu[k][k - 1] ** 2) * nk1:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            ortho, mu = gram_schmidt(b)
            k = max(k - 1, 1)
    return b


def _nearest(x: Fraction) -> int:
    return floor(x + Fraction(1, 2))


def is_lll_reduced(basis, delta: Fraction = DELTA) -> bool:
    ortho, mu = gram_schmidt(basis)
    norms = [_dot(v, v) for v in ortho]
    n = len(basis)
    size_ok = all(abs(mu[i][j]) <= Fraction(1, 2) for i in range(n) for j in range(i))
    lovasz_ok = all(norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1] for k in range(1, n))
    return size_ok and lovasz_ok


def babai_cvp(basis, target, reduce: bool = True) -> list[int]:
    """Lattice vector near ``target``: LLL, Gram-Schmidt, then the nearest-plane loop."""
    b = lll_reduce(basis) if reduce else [[int(x) for x in row] for row in basis]
    if len(target) != len(b[0]):
        raise ParameterError("target dimension does not match the basis")
    ortho, _ = gram_schmidt(b)
    t = [Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(1 << 40) for x in target]
    x = list(t)
    for j in range(len(b) - 1, -1, -1):
        c = _nearest(_dot(x, ortho[j]) / _dot(ortho[j], ortho[j]))
        if c:
            x = [xi - c * bi for xi, bi in zip(x, b[j])]
    return [int(ti - xi) for ti, xi in zip(t, x)]
