"""Command-line front end: ``cubelock calibrate|setup|encrypt|decrypt|chain|attack|bench``.

Exit codes: 0 success, 2 usage, 3 integrity / wrong key / bad file,
4 parameter or capacity.  ``--seed <hex>`` makes every random choice
reproducible; without it system entropy is used.
"""

import argparse
import json
import math
import random
import secrets
import statistics
import sys
import time

import numpy as np
from gmpy2 import mpz

from . import attacks, chain, puzzle
from .config import Config, load_config
from .errors import CubelockError, IntegrityError, ParameterError, UsageError, WrongKeyError

MAX_MESSAGE_BYTES = 1 << 20
CALIBRATION_BITS = (4096, 16384, 70034)
CALIBRATION_TARGETS = (1, 5, 30, 60)
BENCH_SIZES = (512, 1024, 2048)


# -- helpers ----------------------------------------------------------------------


def _rng(args) -> random.Random:
    if args.seed is None:
        return secrets.SystemRandom()
    return random.Random(_seed_int(args.seed))


def _np_rng(args) -> np.random.Generator:
    return np.random.default_rng(None if args.seed is None else _seed_int(args.seed))


def _seed_int(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise UsageError(f"--seed expects hex digits, got {text!r}") from None


def _read_text(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, data, binary: bool = False) -> None:
    if path is None or path == "-":
        if binary:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            sys.stdout.write(data)
        return
    with open(path, "wb" if binary else "w") as fh:
        fh.write(data)


def _hex_int(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hex number: {text!r}") from None


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v

    return conv


def _load_key(args) -> puzzle.PuzzleParams:
    return puzzle.load_key(_read_text(args.key))


def _curated(cfg: Config):
    if cfg.curated_primes_path:
        try:
            return puzzle.load_curated_primes(cfg.curated_primes_path)
        except OSError as exc:
            raise ParameterError(f"cannot read curated primes: {exc.strerror}") from None
    return None


def _trace_summary(trace) -> str:
    return f"depth={trace.sequential_depth} mults={trace.total_mults}"


# -- calibrate ----------------------------------------------------------------------


def _squarings_per_second(modulus: int, budget: float, rng) -> float:
    m = mpz(modulus)
    x = mpz(rng.randrange(2, modulus))
    count, batch = 0, 64
    t0 = time.perf_counter()
    while True:
        for _ in range(batch):
            x = x * x % m
        count += batch
        elapsed = time.perf_counter() - t0
        if elapsed >= budget:
            return count / elapsed


def _reference_modulus(bits: int, rng) -> int:
    if bits == 70034:
        return next(p for p in puzzle.curated_primes() if p.bit_length() == bits)
    bench = puzzle.bench_primes()
    if bits in bench:
        return bench[bits]
    # squaring cost depends on size only, so any odd modulus of the right length will do
    return rng.getrandbits(bits) | (1 << (bits - 1)) | 1


def recommended_bits(rates: dict[int, float], T: float) -> int:
    """Largest n with n <= lambda(n) * T.

    lambda is interpolated linearly in log-log space between the measured
    sizes and extended along the outer segments, so it keeps falling with n.
    """
    sizes = sorted(rates)
    xs = [math.log(s) for s in sizes]
    ys = [math.log(rates[s]) for s in sizes]

    def log_lam(x):
        if len(xs) == 1:
            return ys[0]
        i = min(max(1, next((k for k, v in enumerate(xs) if v >= x), len(xs) - 1)), len(xs) - 1)
        slope = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])
        return ys[i - 1] + slope * (x - xs[i - 1])

    lo, hi = 1, 1 << 40
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if math.log(mid) <= log_lam(math.log(mid)) + math.log(T):
            lo = mid
        else:
            hi = mid
    return lo


def cmd_calibrate(args, cfg) -> int:
    if args.duration <= 0:
        raise UsageError("--duration must be positive")
    rng = _rng(args)
    budget = args.duration / len(CALIBRATION_BITS)
    rates = {bits: _squarings_per_second(_reference_modulus(bits, rng), budget, rng) for bits in CALIBRATION_BITS}
    table = {T: recommended_bits(rates, T) for T in CALIBRATION_TARGETS}
    if args.json:
        print(json.dumps({"lambda": rates, "recommended_log2_p": table}, indent=2))
        return 0
    for bits, lam in rates.items():
        print(f"lambda[{bits}] = {lam:.0f} squarings/s")
    print("T(s)  floor(log2 p)")
    for T, n in table.items():
        print(f"{T:>4}  {n}")
    return 0


# -- setup / encrypt / decrypt --------------------------------------------------------


def cmd_setup(args, cfg) -> int:
    params = puzzle.setup(args.T, args.lam, rng=_rng(args), curated=_curated(cfg))
    _write(args.out, puzzle.dump_key(params))
    info = f"p: {params.n} bits ({params.source}), fingerprint {params.fingerprint.hex()}"
    if params.deviation:
        info += f", deviation {params.deviation:+d} bits from lambda*T"
    print(info, file=sys.stderr)
    return 0


def _read_message(args) -> bytes:
    if args.message is not None:
        data = args.message.encode()
    elif args.infile in (None, "-"):
        data = sys.stdin.buffer.read(MAX_MESSAGE_BYTES + 1)
    else:
        try:
            with open(args.infile, "rb") as fh:
                data = fh.read(MAX_MESSAGE_BYTES + 1)
        except OSError as exc:
            raise UsageError(f"cannot read {args.infile}: {exc.strerror}") from None
    if len(data) > MAX_MESSAGE_BYTES:
        raise ParameterError("messages are capped at 1 MiB")
    return data


def _load_chain_for(args, params) -> chain.ChainSpec:
    spec = chain.load_chain(_read_text(args.chain))
    if spec.p != params.p:
        raise WrongKeyError("chain file was built for a different prime")
    return spec


def cmd_encrypt(args, cfg) -> int:
    params = _load_key(args)
    message = _read_message(args)
    seed_len = args.seed_len if args.seed_len is not None else cfg.seed_len
    if args.chain:
        # the chain's own cubings replace the single cubing of plain encryption
        spec = _load_chain_for(args, params)
        rng = _rng(args)
        seed = rng.getrandbits(seed_len) if seed_len else 0
        x = puzzle.pad(message, seed, seed_len, params.n)
        ct = puzzle.Ciphertext(chain.chain_apply(spec, x), params.fingerprint, seed_len, spec.chain_id)
    else:
        ct = puzzle.encrypt(message, params, rng=_rng(args), seed_len=seed_len)
    _write(args.out, puzzle.dump_ciphertext(ct))
    return 0


def cmd_decrypt(args, cfg) -> int:
    params = _load_key(args)
    ct = puzzle.load_ciphertext(_read_text(args.ct))
    if ct.fingerprint != params.fingerprint:
        raise WrongKeyError("wrong key: ciphertext was made for a different prime")
    t0 = time.perf_counter()
    if ct.chain_id is not None:
        if not args.chain:
            raise UsageError("ciphertext is chained; pass --chain")
        spec = _load_chain_for(args, params)
        if spec.chain_id != ct.chain_id:
            raise WrongKeyError("wrong chain: ciphertext names a different chain id")
        x, trace = chain.chain_invert_traced(spec, ct.c, cfg.window_width, cfg.reduction_strategy)
        message = puzzle.unpad(x, params.n, ct.seed_len)
    else:
        message, trace = puzzle.decrypt_traced(ct, params, cfg.window_width, cfg.reduction_strategy)
    elapsed = time.perf_counter() - t0
    _write(args.out, message, binary=True)
    print(f"wall={elapsed:.6f}s {_trace_summary(trace)}", file=sys.stderr)
    return 0


# -- chain -----------------------------------------------------------------------------


def cmd_chain(args, cfg) -> int:
    return args.chain_func(args, cfg)


def cmd_chain_build(args, cfg) -> int:
    if (args.key is None) == (args.p is None):
        raise UsageError("give exactly one of --key and --p")
    p = _load_key(args).p if args.key else args.p
    stages = chain.parse_stage_list(args.stages, rng=_rng(args))
    if cfg.shuffle_rounds:
        stages = [s if s.rounds else chain.StageSpec(s.kind, cfg.shuffle_rounds, s.key) for s in stages]
    spec = chain.ChainSpec(p, tuple(stages))
    for stage in spec.stages:
        spec.perm(stage)  # surface size errors now rather than at encryption time
    _write(args.out, chain.dump_chain(spec))
    print(f"chain={spec.chain_id}", file=sys.stderr)
    return 0


def cmd_chain_apply(args, cfg) -> int:
    spec = chain.load_chain(_read_text(args.chain))
    print(f"{chain.chain_apply(spec, args.value):x}")
    return 0


def cmd_chain_invert(args, cfg) -> int:
    spec = chain.load_chain(_read_text(args.chain))
    t0 = time.perf_counter()
    x, trace = chain.chain_invert_traced(spec, args.value, cfg.window_width, cfg.reduction_strategy)
    elapsed = time.perf_counter() - t0
    print(f"{x:x}")
    print(f"wall={elapsed:.6f}s {_trace_summary(trace)}", file=sys.stderr)
    return 0


def cmd_chain_bench(args, cfg) -> int:
    if args.p is not None:
        p = args.p
    else:
        matches = [q for q in puzzle.curated_primes() if q.bit_length() == args.bits]
        if not matches:
            sizes = ", ".join(str(q.bit_length()) for q in puzzle.curated_primes())
            raise ParameterError(f"no bundled prime of {args.bits} bits (have {sizes}); use --p")
        p = matches[0]
    kinds = tuple(k.strip() for k in args.kinds.split(",")) if args.kinds else chain.SHUFFLES
    rounds = args.rounds or cfg.shuffle_rounds or None
    rng = random.Random(_seed_int(args.seed)) if args.seed is not None else random.Random(0)
    result = chain.chain_bench(p, kinds, trials=args.trials, rounds=rounds, rng=rng)
    if args.json:
        print(json.dumps({"p_bits": result.p_bits, "rounds": result.rounds, "trials": result.trials,
                          "fpe_kind": result.fpe_kind, "median_seconds": result.medians}, indent=2))
    else:
        sys.stdout.write(result.report())
    return 0


# -- attacks -----------------------------------------------------------------------------


def cmd_attack(args, cfg) -> int:
    return args.attack_func(args, cfg)


def _signs(text: str) -> tuple[int, int]:
    try:
        signs = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("signs look like 1,-1") from None
    if len(signs) != 2 or any(s not in (-1, 1) for s in signs):
        raise argparse.ArgumentTypeError("signs are two of +1/-1")
    return signs


def cmd_attack_gcd(args, cfg) -> int:
    p = args.p
    spec = attacks.swap_neighbors_chain(p)
    targets = [args.m] if args.m is not None else range(p)
    hits = exact = 0
    for m in targets:
        if not 0 <= m < p:
            raise ParameterError("m must be below p")
        c = chain.chain_apply(spec, m)
        if c == 0:
            continue
        got = attacks.gcd_attack_swap_neighbors(p, c, args.signs)
        # a success is any preimage of c; for p = 1 mod 3 it need not be m itself
        ok = got is not None and chain.chain_apply(spec, got) == c
        hits += ok
        exact += got == m
        if args.records or args.m is not None:
            rec = "none" if got is None else got
            print(f"m={m} c={c} recovered={rec} ok={int(ok)} exact={int(got == m)}")
    total = 1 if args.m is not None else p
    print(f"verdict: gcd-swap found a preimage for {hits}/{total} ({hits / total:.2%}), "
          f"the original message for {exact}, with signs {args.signs}")
    return 0


def cmd_attack_fixed_base(args, cfg) -> int:
    if args.memory is not None:
        r = attacks.table_memory_report(args.memory)
        print(f"n={r['n']} bits={r['bits']} MiB={r['MiB']:.2f} MB={r['MB']:.2f}")
        print(f"verdict: a full table for a {args.memory}-bit prime needs {r['MiB']:.2f} MiB")
        return 0
    if args.key:
        params = _load_key(args)
        if args.ct is None:
            raise UsageError("--key needs --ct")
        ct = puzzle.load_ciphertext(_read_text(args.ct))
        if ct.fingerprint != params.fingerprint:
            raise WrongKeyError("wrong key: ciphertext was made for a different prime")
    else:
        if args.p is None or args.x is None:
            raise UsageError("give --p and --x, or --key and --ct")
        params = puzzle.PuzzleParams.from_prime(args.p)
        if not 0 < args.x < params.p:
            raise ParameterError("x must be a unit mod p")
        ct = puzzle.cube(args.x, params.p)
    out = attacks.fixed_base_attack_demo(params, ct, g=args.g, workers=args.parallel)
    _, honest = puzzle.decrypt_value(puzzle.cube(out.value, params.p), params, cfg.window_width, cfg.reduction_strategy)
    print(f"value={out.value} exponent={out.exponent} {_trace_summary(out.trace)} "
          f"honest_depth={honest.sequential_depth}")
    if out.message is not None:
        print(f"message={out.message.hex()}")
    print(f"verdict: recovered the cube root at depth {out.trace.sequential_depth} "
          f"(honest decryption: {honest.sequential_depth})")
    return 0


def cmd_attack_ekera(args, cfg) -> int:
    inst = attacks.EkeraInstance(args.p, args.g, args.x, args.s)
    records = attacks.run_trials(inst, args.trials, n=args.pairs, rng=_np_rng(args))
    for rec in records:
        print(rec.line())
    ok = sum(r.ok for r in records)
    print(f"verdict: ekera recovered the logarithm in {ok}/{len(records)} trials ({ok / len(records):.0%})")
    return 0


# -- bench --------------------------------------------------------------------------------


def cmd_bench(args, cfg) -> int:
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else list(BENCH_SIZES)
    primes = puzzle.bench_primes()
    rng = random.Random(_seed_int(args.seed)) if args.seed is not None else random.Random(0)
    rows = []
    for bits in sizes:
        if bits not in primes:
            raise ParameterError(f"no bundled bench prime of {bits} bits (have {sorted(primes)})")
        params = puzzle.PuzzleParams.from_prime(primes[bits], check=False)
        seed_len = min(cfg.seed_len, max(0, params.n - 3 - puzzle.LENGTH_BITS - 8 * 16))
        enc, dec = [], []
        for _ in range(args.trials):
            msg = rng.randbytes(16)
            t0 = time.perf_counter()
            ct = puzzle.encrypt(msg, params, rng=rng, seed_len=seed_len)
            t1 = time.perf_counter()
            got = puzzle.decrypt(ct, params, cfg.window_width, cfg.reduction_strategy)
            t2 = time.perf_counter()
            if got != msg:
                raise IntegrityError("round trip failed during benchmark")
            enc.append(t1 - t0)
            dec.append(t2 - t1)
        e, d = statistics.median(enc), statistics.median(dec)
        rows.append({"bits": bits, "encrypt_s": e, "decrypt_s": d, "ratio": d / e})
    if args.json:
        print(json.dumps({"trials": args.trials, "results": rows}, indent=2))
        return 0
    print(f"{'bits':>6} {'encrypt':>12} {'decrypt':>12} {'ratio':>10}")
    for r in rows:
        print(f"{r['bits']:>6} {r['encrypt_s'] * 1e6:>10.1f}us {r['decrypt_s'] * 1e3:>10.2f}ms {r['ratio']:>10.0f}")
    return 0


# -- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", help="hex seed for reproducible randomness")

    ap = argparse.ArgumentParser(prog="cubelock", description="Cube-root time-lock puzzles.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", parents=[seed], help="measure squarings per second")
    p.add_argument("--duration", type=float, default=3.0, help="total seconds to spend measuring")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("setup", parents=[seed], help="create a key file")
    p.add_argument("--T", type=_positive(float), required=True, help="target decryption time in seconds")
    p.add_argument("--lambda", dest="lam", type=_positive(float), required=True, help="squarings per second")
    p.add_argument("--out", help="key file (default stdout)")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("encrypt", parents=[seed], help="encrypt a message")
    p.add_argument("--key", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--message", help="message text")
    src.add_argument("--in", dest="infile", help="message file (default stdin)")
    p.add_argument("--seed-len", type=int, help="padding seed bits")
    p.add_argument("--chain", help="chain file to apply after padding")
    p.add_argument("--out", help="ciphertext file (default stdout)")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="solve a puzzle")
    p.add_argument("--key", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--chain", help="chain file for chained ciphertexts")
    p.add_argument("--out", help="plaintext file (default stdout)")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("chain", help="chained delays")
    p.set_defaults(func=cmd_chain)
    csub = p.add_subparsers(dest="chain_command", required=True)
    q = csub.add_parser("build", parents=[seed])
    q.add_argument("--key")
    q.add_argument("--p", type=_hex_int, help="prime in hex")
    q.add_argument("--stages", required=True, help="kind[:rounds],...")
    q.add_argument("--out")
    q.set_defaults(chain_func=cmd_chain_build)
    for name, fn in (("apply", cmd_chain_apply), ("invert", cmd_chain_invert)):
        q = csub.add_parser(name)
        q.add_argument("--chain", required=True)
        q.add_argument("--value", type=_hex_int, required=True, help="hex value")
        q.set_defaults(chain_func=fn)
    q = csub.add_parser("bench", parents=[seed], help="per-stage timing table")
    q.add_argument("--bits", type=int, default=33279, help="size of a bundled prime")
    q.add_argument("--p", type=_hex_int, help="explicit prime in hex")
    q.add_argument("--trials", type=_positive(int), default=5)
    q.add_argument("--rounds", type=_positive(int), help="shuffle rounds (default: bit length of p)")
    q.add_argument("--kinds", help="comma-separated shuffle kinds")
    q.add_argument("--json", action="store_true")
    q.set_defaults(chain_func=cmd_chain_bench)

    p = sub.add_parser("attack", help="attack demonstrations")
    p.set_defaults(func=cmd_attack)
    asub = p.add_subparsers(dest="attack_command", required=True)
    q = asub.add_parser("gcd-swap", help="polynomial gcd on a two-stage swap-neighbors chain")
    q.add_argument("--p", type=int, default=1009)
    q.add_argument("--m", type=int, help="attack one message instead of all of Z_p")
    q.add_argument("--signs", type=_signs, default=attacks.gcd.DEFAULT_SIGNS)
    q.add_argument("--records", action="store_true", help="one line per message in a sweep")
    q.set_defaults(attack_func=cmd_attack_gcd)
    q = asub.add_parser("fixed-base", help="precomputed-table shortcut at toy sizes")
    q.add_argument("--p", type=int)
    q.add_argument("--x", type=int, help="plaintext to cube and recover")
    q.add_argument("--g", type=int, help="generator (default: smallest)")
    q.add_argument("--key")
    q.add_argument("--ct")
    q.add_argument("--parallel", type=_positive(int), help="threads per tree level")
    q.add_argument("--memory", type=_positive(int), metavar="BITS", help="only report table size for BITS-bit p")
    q.set_defaults(attack_func=cmd_attack_fixed_base)
    q = asub.add_parser("ekera", parents=[seed], help="simulated short discrete-log experiment")
    q.add_argument("--p", type=int, default=23)
    q.add_argument("--g", type=int, default=5)
    q.add_argument("--x", type=int, required=True)
    q.add_argument("--s", type=_positive(int), default=1)
    q.add_argument("--trials", type=_positive(int), default=50)
    q.add_argument("--pairs", type=_positive(int), help="pairs per trial (default s + 1)")
    q.set_defaults(attack_func=cmd_attack_ekera)

    p = sub.add_parser("bench", parents=[seed], help="encryption/decryption timing sweep")
    p.add_argument("--sizes", help="comma-separated bit sizes of bundled primes")
    p.add_argument("--trials", type=_positive(int), default=5)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config()
        return args.func(args, cfg)
    except CubelockError as exc:
        print(f"cubelock: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
