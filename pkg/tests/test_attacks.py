import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from cubelock.attacks import (
    EkeraInstance,
    PolyModP,
    Sampler,
    babai_cvp,
    best_reduction_interval,
    bsgs_dlog,
    ekera_postprocess,
    expected_exponent_bits,
    find_generator,
    fixed_base_attack_demo,
    gcd_attack_swap_neighbors,
    is_lll_reduced,
    lll_reduce,
    reduction_schedule_cost,
    signs_of,
    swap_neighbors_chain,
    table_memory_report,
)
from cubelock.attacks.costmodel import linear, logarithmic
from cubelock.attacks.ekera import center, discrete_log, distribution, group_order, run_trials
from cubelock.attacks.fixed_base import empirical_exponent_bits
from cubelock.attacks.gcd import chain_polynomial, poly_gcd, split_roots
from cubelock.chain import chain_apply
from cubelock.errors import CapacityError, ParameterError
from cubelock.puzzle import PuzzleParams, cube

# -- polynomial gcd -------------------------------------------------------------------------


def test_poly_arithmetic():
    p = 23
    a = PolyModP.make([1, 1], p)  # z + 1
    b = PolyModP.make([22, 1], p)  # z - 1
    prod = a * b
    assert prod.coeffs == (22, 0, 1)
    q, r = prod.divmod(a)
    assert q == b and not r.coeffs
    assert poly_gcd(prod, a * a) == a


def test_chain_polynomial_expansion():
    # ((z + 1)**3 - 1)**3 expanded and evaluated
    f = chain_polynomial(1009, (1, -1))
    for z in range(0, 1009, 97):
        assert f(z) == pow(pow(z + 1, 3, 1009) - 1, 3, 1009)


def test_split_roots():
    p = 1009
    roots = [3, 77, 500, 1000]
    g = PolyModP.make([1], p)
    for r in roots:
        g = g * PolyModP.make([-r, 1], p)
    assert split_roots(g) == sorted(roots)


def instances(p, signs):
    spec = swap_neighbors_chain(p)
    for m in range(p):
        if signs_of(p, m) == signs and chain_apply(spec, m) != 0:
            yield m, chain_apply(spec, m)


def test_gcd_attack_recovers_plus_plus_at_23():
    found = list(instances(23, (1, 1)))
    assert found
    for m, c in found:
        assert gcd_attack_swap_neighbors(23, c, (1, 1)) == m


def test_gcd_attack_sign_mismatch_fails_cleanly():
    spec = swap_neighbors_chain(23)
    for m, c in instances(23, (-1, -1)):
        got = gcd_attack_swap_neighbors(23, c, (1, 1))
        assert got is None or chain_apply(spec, got) == c


def test_gcd_attack_rejects_zero_and_large():
    with pytest.raises(ParameterError):
        gcd_attack_swap_neighbors(23, 0)
    with pytest.raises(CapacityError):
        gcd_attack_swap_neighbors((1 << 20) + 7, 5)


# -- fixed base -----------------------------------------------------------------------------


def test_find_generator_and_bsgs():
    assert find_generator(23) == 5
    for x in range(1, 23):
        d = bsgs_dlog(5, x, 23)
        assert pow(5, d, 23) == x


def test_fixed_base_demo_toy():
    params = PuzzleParams.from_prime(23)
    out = fixed_base_attack_demo(params, cube(5, 23), g=5)
    assert out.value == 5
    assert out.trace.sequential_depth <= 5


def test_fixed_base_demo_all_units_1019():
    params = PuzzleParams.from_prime(1019)
    for x in range(1, 1019, 41):
        out = fixed_base_attack_demo(params, cube(x, 1019))
        assert out.value == x
        assert out.trace.sequential_depth <= (1019).bit_length().bit_length()


def test_expected_exponent_bits_matches_enumeration():
    for p in (23, 47, 59, 107):
        assert expected_exponent_bits(p) == empirical_exponent_bits(p)
    assert expected_exponent_bits(23) == Fraction(42, 11)


def test_table_memory_report():
    r = table_memory_report(70034)
    assert r["bits"] == 70034 * 70033
    assert abs(r["MiB"] - 584.68) < 0.01


# -- lattice --------------------------------------------------------------------------------


def test_babai_identity_example():
    assert babai_cvp([[1, 0], [0, 1]], [0.4, 2.6]) == [0, 3]


def test_lll_output_is_reduced():
    r = random.Random(5)
    for _ in range(10):
        basis = [[r.randrange(-50, 50) for _ in range(4)] for _ in range(4)]
        try:
            reduced = lll_reduce(basis)
        except ParameterError:
            continue
        assert is_lll_reduced(reduced)
        assert abs(round(np.linalg.det(np.array(reduced, dtype=float)))) == abs(
            round(np.linalg.det(np.array(basis, dtype=float)))
        )


def test_lll_rejects_dependent_and_large():
    with pytest.raises(ParameterError):
        lll_reduce([[1, 2], [2, 4]])
    with pytest.raises(CapacityError):
        lll_reduce([[int(i == j) for j in range(17)] for i in range(17)])


def test_babai_against_exhaustive_search():
    r = random.Random(11)
    checked = 0
    while checked < 20:
        basis = [[r.randrange(1, 100) for _ in range(3)] for _ in range(3)]
        if abs(round(np.linalg.det(np.array(basis, dtype=float)))) == 0:
            continue
        target = [r.uniform(-500, 500) for _ in range(3)]
        got = babai_cvp(basis, target)
        B = np.array(basis)
        best = min(
            float(np.sum((np.array(c) @ B - target) ** 2))
            for c in itertools.product(range(-20, 21), repeat=3)
        )
        dist = float(np.sum((np.array(got) - target) ** 2))
        # got is a lattice vector
        coeffs = np.linalg.solve(B.T.astype(float), np.array(got, dtype=float))
        assert np.allclose(coeffs, np.round(coeffs), atol=1e-6)
        # nearest-plane guarantee with delta = 3/4 in dimension 3: factor 2**(d/2)
        assert dist <= 2**3 * best + 1e-9
        checked += 1


# -- Ekera simulation -----------------------------------------------------------------------


def test_center_range():
    M = 64
    assert center(0, M) == 0
    assert center(31, M) == 31
    assert center(32, M) == -32
    assert center(-1, M) == -1
    assert all(-M // 2 <= center(v, M) < M // 2 for v in range(-200, 200))


def test_instance_limits():
    with pytest.raises(ParameterError):
        EkeraInstance(23, 2, 5)  # 2 has order 11
    with pytest.raises(ParameterError):
        EkeraInstance(5000, 3, 5)


def test_distribution_sums_to_one():
    inst = EkeraInstance(23, 5, 7)
    probs = distribution(inst)
    assert probs.shape == (1 << 10, 1 << 5)
    assert abs(probs.sum() - 1) < 1e-9
    assert probs.min() >= -1e-15


def test_discrete_log_and_order():
    assert group_order(23, 5) == 22
    assert group_order(23, 2) == 11
    assert pow(5, discrete_log(23, 5, 7), 23) == 7


def test_postprocess_on_ideal_pair():
    # the most likely outcomes should mostly lead back to the logarithm
    inst = EkeraInstance(23, 5, 7)
    probs = distribution(inst)
    d = discrete_log(23, 5, 7)
    order = np.argsort(probs.ravel())[::-1]
    hits = 0
    for idx in order[:20]:
        j, k = divmod(int(idx), probs.shape[1])
        hits += ekera_postprocess([(j, k), (j, k)], inst.m, inst.s, order=22) == d
    assert hits >= 5


def test_run_trials_records():
    inst = EkeraInstance(23, 5, 7)
    records = run_trials(inst, 10, rng=np.random.default_rng(0))
    assert len(records) == 10
    assert records[0].line().startswith("trial=0 j=")
    assert sum(r.ok for r in records) >= 5


def test_sampler_reproducible():
    inst = EkeraInstance(23, 5, 7)
    s = Sampler(inst)
    a = s.sample(np.random.default_rng(3), 100)
    b = s.sample(np.random.default_rng(3), 100)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


# -- reduction cost model ------------------------------------------------------------------


def test_cost_model_single_multiplication():
    n = 1000
    assert reduction_schedule_cost(linear, linear, n, 1, 1) == linear(n) + linear(2 * n)


def test_cost_model_linear_prefers_eager_reduction():
    for k in (1, 2, 4, 8, 16):
        assert best_reduction_interval(linear, linear, 70034, k) == 1


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_cost_model_log_prefers_lazy_reduction(k):
    assert best_reduction_interval(logarithmic, logarithmic, 70034, k) == k


def test_cost_model_rejects_bad_interval():
    with pytest.raises(ParameterError):
        reduction_schedule_cost(linear, linear, 10, 4, 0)


def test_poly_ring_matches_schoolbook():
    from cubelock.kernels import poly_mulmod

    r = random.Random(12)
    p = 1009
    for _ in range(50):
        a = [r.randrange(p) for _ in range(r.randrange(1, 9))]
        b = [r.randrange(p) for _ in range(r.randrange(1, 9))]
        h = [r.randrange(p) for _ in range(9)] + [1]
        # schoolbook product, then long division by the monic h
        prod = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
        for k in range(len(prod) - 1, len(h) - 2, -1):
            c = prod[k]
            for t in range(len(h)):
                prod[k - len(h) + 1 + t] = (prod[k - len(h) + 1 + t] - c * h[t]) % p
        expected = PolyModP.make(prod[: len(h) - 1], p)
        got = (PolyModP.make(a, p) * PolyModP.make(b, p)) % PolyModP.make(h, p)
        assert got == expected
        pad = lambda v: list(v) + [0] * (9 - len(v))  # noqa: E731
        kernel = poly_mulmod(pad(a), pad(b), h, p)
        assert [int(v) for v in kernel] == pad(expected.coeffs)
