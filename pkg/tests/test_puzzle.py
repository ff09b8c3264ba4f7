import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubelock import puzzle
from cubelock.errors import CapacityError, FormatError, PaddingError, ParameterError, WrongKeyError
from cubelock.puzzle import (
    Ciphertext,
    PuzzleParams,
    bench_primes,
    curated_primes,
    decrypt,
    decrypt_value,
    encrypt,
    max_message_bytes,
    pad,
    seed_length_bound,
    setup,
    exponent_size_oracle,
    unpad,
)

P512 = PuzzleParams.from_prime(bench_primes()[512], check=False)
REFERENCE_PRIME = 2566851867 * (1 << 70002) - 1


# -- parameters ---------------------------------------------------------------------


def test_decryption_exponent_small():
    params = PuzzleParams.from_prime(23)
    assert params.b == 15
    assert 3 * params.b % 22 == 1


def test_decryption_exponent_needs_two_mod_three():
    with pytest.raises(ParameterError):
        puzzle.decryption_exponent(13)


def test_from_prime_rejects_non_safe():
    with pytest.raises(ParameterError):
        PuzzleParams.from_prime(29)


def test_setup_generated_size(rng):
    params = setup(1, 300, rng=rng)
    assert params.n - 1 == 300
    assert params.source == "generated" and params.deviation == 0


def test_setup_curated_70034_bit():
    params = setup(19, 70034 / 19)
    assert params.p == REFERENCE_PRIME
    assert params.source == "curated"
    # a 70034-bit prime has floor(log2 p) = 70033
    assert params.deviation == -1
    assert setup(1, 70033).deviation == 0


def test_setup_curated_records_deviation():
    params = setup(1, 40000)
    assert params.source == "curated"
    assert params.deviation == params.n - 1 - 40000
    assert params.p in curated_primes()


def test_setup_rejects_tiny():
    with pytest.raises(ParameterError):
        setup(1, 10)
    with pytest.raises(ParameterError):
        setup(0, 1000)


def test_curated_primes_parse():
    sizes = sorted(p.bit_length() for p in curated_primes())
    assert sizes == [33279, 43519, 44031, 70034]
    assert puzzle.parse_prime_expr("1030710193*2^44001+3") == 1030710193 * (1 << 44001) + 3


# -- padding --------------------------------------------------------------------------


def test_pad_degenerate():
    x = pad(b"", 0, 16, 64)
    assert x >> 62 == 1
    assert x & 0xFFFFFFFF == 0
    assert unpad(x, 64, 16) == b""


def test_pad_round_trip_many(rng):
    n = P512.n
    for _ in range(300):
        m = rng.randbytes(rng.randrange((n - 80) // 8 - 32))
        seed = rng.getrandbits(256)
        x = pad(m, seed, 256, n)
        assert x < P512.p
        assert unpad(x, n, 256) == m


def test_pad_different_seeds_differ(rng):
    seen = set()
    for _ in range(1000):
        seen.add(pad(b"same", rng.getrandbits(64), 64, 512))
    assert len(seen) == 1000


def test_pad_capacity():
    cap = max_message_bytes(512, 256)
    pad(b"\0" * cap, 0, 256, 512)
    with pytest.raises(CapacityError):
        pad(b"\0" * (cap + 1), 0, 256, 512)


def test_unpad_detects_tampering():
    x = pad(b"hello", 12345, 64, 512)
    with pytest.raises(PaddingError):
        unpad(x ^ (1 << 400), 512, 64)
    with pytest.raises(PaddingError):
        unpad(x ^ (1 << 510), 512, 64)
    with pytest.raises(PaddingError):
        unpad((x & ~0xFFFFFFFF) | 0xFFFF, 512)


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=20), st.integers(min_value=0, max_value=(1 << 96) - 1))
def test_pad_property(m, seed):
    assert unpad(pad(m, seed, 96, 400), 400, 96) == m


# -- encryption ---------------------------------------------------------------------------


def test_encrypt_forced_value():
    params = PuzzleParams.from_prime(23)
    assert puzzle.encrypt_value(5, params)[0] == 10
    assert decrypt_value(10, params)[0] == 5


def test_cube_root_identity(rng):
    for _ in range(200):
        x = rng.randrange(P512.p)
        c, trace = puzzle.encrypt_value(x, P512)
        assert trace.sequential_depth == 2
        assert decrypt_value(c, P512)[0] == x


def test_encrypt_randomized(rng):
    cts = {encrypt(b"msg", P512, rng=rng).c for _ in range(1000)}
    assert len(cts) == 1000


@pytest.mark.parametrize("bits", [512, 1024, 2048])
def test_round_trip_bench_sizes(bits, rng):
    params = PuzzleParams.from_prime(bench_primes()[bits], check=False)
    for _ in range(5):
        m = rng.randbytes(rng.randrange(max_message_bytes(params.n) + 1))
        assert decrypt(encrypt(m, params, rng=rng), params) == m


def test_wrong_key():
    other = PuzzleParams.from_prime(bench_primes()[1024], check=False)
    ct = encrypt(b"x", P512, rng=random.Random(1))
    with pytest.raises(WrongKeyError):
        decrypt(ct, other)


def test_decrypt_depth_floor():
    ct = encrypt(b"depth", P512, rng=random.Random(2))
    _, trace = puzzle.decrypt_traced(ct, P512)
    assert trace.sequential_depth >= P512.b.bit_length() - 1


# -- seed length bound --------------------------------------------------------------------


def test_seed_bound_reference_example():
    n = (1 << 16) + 1
    bound = seed_length_bound(1e12, n, 1e-12)
    # log2(1e12) - log2(1e-12) - 1 = 78.73 so the strict bound gives 79.73 + 16 -> 95
    assert bound.minimum == 95
    assert bound.recommended == 256


def test_seed_bound_degenerate():
    assert seed_length_bound(1, 2, 0.5).minimum == 1


def test_seed_bound_rejects_bad_input():
    with pytest.raises(ParameterError):
        seed_length_bound(1, 2, 1.0)


# -- cube-root exponent sizes ------------------------------------------------------------


def test_exponent_sizes_m23():
    r = exponent_size_oracle(23)
    assert r.units == 22
    assert r.H == 4
    assert r.K == {1: 12, 2: 2, 3: 2, 4: 1}
    low = {o for o in r.bitsizes if o <= 2}
    assert low == {1, 2}


def test_exponent_sizes_small_orders_are_plus_minus_one():
    from cubelock.kernels import element_orders

    orders = element_orders(23, 22, [2, 11])
    assert {x for x in range(1, 23) if orders[x] <= 2} == {1, 22}


def test_exponent_sizes_capacity():
    with pytest.raises(CapacityError):
        exponent_size_oracle(10**4 + 1)


def test_exponent_sizes_composites_not_below_two():
    for m in range(17, 32, 2):
        if m % 3 == 0:
            continue
        assert exponent_size_oracle(m).K[3] >= 1


# -- file formats ------------------------------------------------------------------------


def test_key_file_round_trip():
    text = puzzle.dump_key(P512)
    assert puzzle.load_key(text).p == P512.p


def test_key_file_line_numbers():
    text = puzzle.dump_key(P512).replace("b=", "b=zz")
    with pytest.raises(FormatError) as err:
        puzzle.load_key(text)
    assert err.value.line == 3


def test_ciphertext_file_round_trip():
    ct = Ciphertext(12345, bytes(range(16)), 256, "ab" * 16)
    assert puzzle.load_ciphertext(puzzle.dump_ciphertext(ct)) == ct
    ct = Ciphertext(1, bytes(16), 0)
    assert puzzle.load_ciphertext(puzzle.dump_ciphertext(ct)) == ct


def test_ciphertext_file_errors():
    with pytest.raises(FormatError):
        puzzle.load_ciphertext("cubelock-ct v2\n")
    with pytest.raises(FormatError) as err:
        puzzle.load_ciphertext("cubelock-ct v1\nfp=00\nl=1\nchain=none\nc=1\n")
    assert err.value.line == 2


def test_decrypt_depth_grows_linearly():
    # fixed windows cost 1 + 1/w multiplications per exponent bit; w = 10 keeps that near 1
    import numpy as np

    from cubelock.bigmath import powmod_window

    xs, ys = [], []
    for bits in (512, 1024, 2048, 4096):
        params = PuzzleParams.from_prime(bench_primes()[bits], check=False)
        _, trace = powmod_window(12345, params.b, params.p, w=10)
        xs.append(params.b.bit_length())
        ys.append(trace.sequential_depth)
    slope = np.polyfit(xs, ys, 1)[0]
    assert 0.9 <= slope <= 1.1


def test_encrypt_constant_work():
    for bits in (512, 4096):
        params = PuzzleParams.from_prime(bench_primes()[bits], check=False)
        assert puzzle.encrypt_value(3, params)[1].total_mults == 2


def test_exponent_identity_small_safe_primes():
    from cubelock.bigmath import is_safe_prime

    for p in range(11, 2000, 2):
        if not is_safe_prime(p):
            continue
        b = puzzle.decryption_exponent(p)
        assert all(pow(x, 3 * b, p) == x for x in range(1, p))


def test_exponent_identity_large_sampled(rng):
    p, b = P512.p, P512.b
    for _ in range(1000):
        x = rng.randrange(1, p)
        assert pow(x, 3 * b, p) == x


def test_padded_values_avoid_square_roots_of_one(rng):
    from cubelock.bigmath import gen_safe_prime

    for bits in range(40, 49):
        p = gen_safe_prime(bits, rng)
        n = p.bit_length()
        for length in range(max_message_bytes(n, 2) + 1):
            for seed in range(4):
                x = pad(rng.randbytes(length), seed, 2, n)
                assert 1 < x < p - 1
                assert x * x % p != 1


def test_ciphertext_bytes_not_fixed(rng):
    width = (P512.p.bit_length() + 7) // 8
    rows = [encrypt(bytes([rng.getrandbits(1)]), P512, rng=rng).c.to_bytes(width, "big") for _ in range(1000)]
    # the top byte is bounded by p, so skip it; every other position must take many values
    for pos in range(1, width):
        assert len({r[pos] for r in rows}) > 100
