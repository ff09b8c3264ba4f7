"""Cost of reducing once every m multiplications instead of after each one.

Multiplying k times and reducing only after every m-th product means the
operands grow to 2**i * n bits between reductions, so the total is

    (k / m) * (sum_{i < m} M(2**i * n) + R(2**m * n))

for a multiplication cost M and reduction cost R.
"""

import math

from ..errors import ParameterError


def reduction_schedule_cost(M, R, n: int, k: int, m: int) -> float:
    if m < 1 or k < 1 or n < 1:
        raise ParameterError("n, k and m must be positive")
    return (k / m) * (sum(M((1 << i) * n) for i in range(m)) + R((1 << m) * n))


def best_reduction_interval(M, R, n: int, k: int) -> int:
    """argmin over m in 1..k; ties go to the smaller m."""
    costs = [(reduction_schedule_cost(M, R, n, k, m), m) for m in range(1, k + 1)]
    return min(costs)[1]


def linear(x: float) -> float:
    return float(x)


def logarithmic(x: float) -> float:
    return math.log2(x)
