"""Reference Toom-Cook multiplication for k = 2 (Karatsuba) and k = 3.

This is an oracle-tested reference, not a fast path: below ``threshold``
bits the backend product takes over.
"""

from ..errors import ParameterError

DEFAULT_THRESHOLD = 256


def mul_toom(a: int, b: int, k: int = 2, threshold: int = DEFAULT_THRESHOLD) -> int:
    if k not in (2, 3):
        raise ParameterError("only Toom-2 and Toom-3 are implemented")
    if a < 0 or b < 0:
        raise ParameterError("operands must be non-negative")
    if threshold < 2 * k:
        raise ParameterError("threshold too small to split operands")
    return _toom(a, b, k, threshold)


def _split(x: int, width: int, k: int) -> list[int]:
    mask = (1 << width) - 1
    parts = []
    for _ in range(k - 1):
        parts.append(x & mask)
        x >>= width
    parts.append(x)
    return parts


def _signed(a: int, b: int, k: int, threshold: int) -> int:
    sign = -1 if (a < 0) != (b < 0) else 1
    return sign * _toom(abs(a), abs(b), k, threshold)


def _toom(a: int, b: int, k: int, threshold: int) -> int:
    n = max(a.bit_length(), b.bit_length())
    if min(a.bit_length(), b.bit_length()) <= threshold:
        return a * b
    width = n // k  # lambda = 2**width
    A = _split(a, width, k)
    B = _split(b, width, k)

    if k == 2:
        # points 0, 1, inf
        v0 = _toom(A[0], B[0], k, threshold)
        v1 = _toom(A[0] + A[1], B[0] + B[1], k, threshold)
        vinf = _toom(A[1], B[1], k, threshold)
        coeffs = [v0, v1 - v0 - vinf, vinf]
    else:
        # points 0, 1, -1, 2, inf
        a0, a1, a2 = A
        b0, b1, b2 = B
        v0 = _toom(a0, b0, k, threshold)
        v1 = _toom(a0 + a1 + a2, b0 + b1 + b2, k, threshold)
        vm1 = _signed(a0 - a1 + a2, b0 - b1 + b2, k, threshold)
        v2 = _toom(a0 + 2 * a1 + 4 * a2, b0 + 2 * b1 + 4 * b2, k, threshold)
        vinf = _toom(a2, b2, k, threshold)
        c0, c4 = v0, vinf
        c2 = (v1 + vm1) // 2 - c0 - c4
        odd = (v1 - vm1) // 2  # c1 + c3
        c3 = (v2 - c0 - 4 * c2 - 16 * c4 - 2 * odd) // 6
        c1 = odd - c3
        coeffs = [c0, c1, c2, c3, c4]

    result = 0
    for c in reversed(coeffs):
        result = (result << width) + c
    return result
