"""Chained delays: alternate cubing with keyed permutations.

A chain over p with stages k_1..k_n maps x to f(g_n(...f(g_1(x))...)) with
f(v) = v**3 mod p: stages run in list order, each permutation followed by a
cubing.  Inverting costs one slow exponentiation per stage.

When a pair-map stage is present the chain works on pairs (a, b) of Z_p
elements, encoded as a*p + b.  Cubing and every other stage then act on each
component separately.
"""

import hashlib
import random
import statistics
import time
from dataclasses import dataclass

from ..bigmath import DepthTrace, powmod_window
from ..errors import FormatError, ParameterError
from ..formats import parse_hex
from ..puzzle import cube, decryption_exponent
from .perms import KINDS, SHUFFLES, PermSpec, build

CHAIN_MAGIC = "cubelock-chain v1"
DEFAULT_KEY_BYTES = 32


@dataclass(frozen=True)
class StageSpec:
    kind: str
    rounds: int = 0
    key: bytes = b""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown stage kind {self.kind!r}")
        if self.rounds < 0:
            raise ParameterError("rounds must be nonnegative")


@dataclass(frozen=True)
class ChainSpec:
    p: int
    stages: tuple[StageSpec, ...] = ()

    def __post_init__(self):
        # p = 1 mod 3 is accepted for the forward direction (attack harnesses);
        # inversion then fails because cubing is not a bijection.
        if self.p < 5 or self.p % 2 == 0:
            raise ParameterError("chain modulus must be an odd prime")
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def paired(self) -> bool:
        return any(s.kind == "pair-map" for s in self.stages)

    @property
    def domain(self) -> int:
        return self.p * self.p if self.paired else self.p

    @property
    def b(self) -> int:
        return decryption_exponent(self.p)

    def perm(self, stage: StageSpec):
        N = self.p * self.p if stage.kind == "pair-map" else self.p
        return build(PermSpec(stage.kind, N, stage.key, stage.rounds))

    def body(self) -> str:
        lines = [CHAIN_MAGIC, f"p={self.p:x}"]
        lines += [f"stage={s.kind}:{s.rounds}:{s.key.hex()}" for s in self.stages]
        return "\n".join(lines) + "\n"

    @property
    def chain_id(self) -> str:
        return hashlib.sha256(self.body().encode()).digest()[:16].hex()


def parse_stage_list(text: str, rng=None, key_bytes: int = DEFAULT_KEY_BYTES) -> list[StageSpec]:
    """Parse ``kind[:rounds],...`` and draw a fresh key for every stage."""
    if rng is None:
        import secrets

        rng = secrets.SystemRandom()
    stages = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        kind, _, rounds = item.partition(":")
        try:
            r = int(rounds) if rounds else 0
        except ValueError:
            raise ParameterError(f"bad round count in {item!r}") from None
        key = rng.getrandbits(8 * key_bytes).to_bytes(key_bytes, "big")
        stages.append(StageSpec(kind, r, key))
    return stages


def dump_chain(spec: ChainSpec) -> str:
    return spec.body()


def load_chain(text: str) -> ChainSpec:
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0][1] != CHAIN_MAGIC:
        raise FormatError(f"expected header {CHAIN_MAGIC!r}", line=lines[0][0] if lines else 1)
    if len(lines) < 2 or not lines[1][1].startswith("p="):
        raise FormatError("expected p=<hex>", line=lines[1][0] if len(lines) > 1 else lines[0][0])
    p = parse_hex(lines[1][1][2:], lines[1][0], "p")
    stages = []
    for i, ln in lines[2:]:
        if not ln.startswith("stage="):
            raise FormatError("expected stage=<kind>:<rounds>:<hex key>", line=i)
        parts = ln[6:].split(":")
        if len(parts) != 3:
            raise FormatError("stage needs kind, rounds and key", line=i)
        kind, rounds, key = parts
        if kind not in KINDS:
            raise FormatError(f"unknown stage kind {kind!r}", line=i)
        try:
            stages.append(StageSpec(kind, int(rounds), bytes.fromhex(key)))
        except ValueError:
            raise FormatError("bad rounds or key", line=i) from None
    try:
        return ChainSpec(p, tuple(stages))
    except ParameterError as exc:
        raise FormatError(str(exc), line=lines[1][0]) from None


def _split(spec: ChainSpec, x: int) -> list[int]:
    if not 0 <= x < spec.domain:
        raise ParameterError("value outside the chain domain")
    return list(divmod(x, spec.p)) if spec.paired else [x]


def _join(spec: ChainSpec, parts: list[int]) -> int:
    return parts[0] * spec.p + parts[1] if spec.paired else parts[0]


def _permute(spec: ChainSpec, stage: StageSpec, parts: list[int], inverse: bool) -> list[int]:
    perm = spec.perm(stage)
    fn = perm.inverse if inverse else perm.forward
    if stage.kind == "pair-map":
        return list(divmod(fn(parts[0] * spec.p + parts[1]), spec.p))
    return [fn(v) for v in parts]


def chain_apply(spec: ChainSpec, x: int) -> int:
    """The fast direction: one permutation and one cubing per stage."""
    parts = _split(spec, x)
    for stage in spec.stages:
        parts = [cube(v, spec.p) for v in _permute(spec, stage, parts, False)]
    return _join(spec, parts)


def chain_invert_traced(spec: ChainSpec, c: int, w: int = 6, strategy: str = "montgomery") -> tuple[int, DepthTrace]:
    parts = _split(spec, c)
    b = spec.b
    trace = DepthTrace()
    for stage in reversed(spec.stages):
        step = DepthTrace()
        roots = []
        for v in parts:
            r, t = powmod_window(v, b, spec.p, w=w, strategy=strategy)
            roots.append(r)
            step = step.alongside(t)
        trace = trace.then(step)
        parts = _permute(spec, stage, roots, True)
    return _join(spec, parts), trace


def chain_invert(spec: ChainSpec, c: int, w: int = 6, strategy: str = "montgomery") -> int:
    return chain_invert_traced(spec, c, w, strategy)[0]


# -- benchmark ------------------------------------------------------------------

BENCH_COLUMNS = ("Cubing", "AES-256", "Thorp", "Swap-Or-Not", "Mix-And-Cut")
_SHUFFLE_COLUMNS = dict(zip(SHUFFLES, BENCH_COLUMNS[2:]))


@dataclass(frozen=True)
class BenchResult:
    p_bits: int
    rounds: int
    trials: int
    fpe_kind: str
    medians: dict  # column -> seconds

    def report(self) -> str:
        head = " | ".join(f"{c:>12}" for c in self.medians)
        vals = " | ".join(f"{_fmt_time(t):>12}" for t in self.medians.values())
        info = f"p: {self.p_bits} bits, R = {self.rounds}, median of {self.trials}, FPE = {self.fpe_kind}"
        return f"{info}\n{head}\n{vals}\n"


def _fmt_time(t: float) -> str:
    if t >= 1:
        return f"{t:.2f}s"
    if t >= 1e-3:
        return f"{t * 1e3:.2f}ms"
    return f"{t * 1e6:.1f}us"


def _median_time(fn, inputs) -> float:
    times = []
    for x in inputs:
        t0 = time.perf_counter()
        fn(x)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def pick_fpe_kind(p: int) -> str:
    """cycle-walk-fpe when p sits just below a multiple of 128 bits, both-ends otherwise."""
    try:
        build(PermSpec("cycle-walk-fpe", p, b"probe"))
        return "cycle-walk-fpe"
    except ParameterError:
        return "both-ends"


def chain_bench(
    p: int,
    kinds=SHUFFLES,
    trials: int = 5,
    rounds: int | None = None,
    rng: random.Random | None = None,
    key: bytes | None = None,
) -> BenchResult:
    """Median wall time of one cubing, one FPE stage and one run of each shuffle kind."""
    if trials < 1:
        raise ParameterError("need at least one trial")
    rng = rng or random.Random(0)
    key = key if key is not None else rng.getrandbits(256).to_bytes(32, "big")
    R = rounds or p.bit_length()
    inputs = [rng.randrange(p) for _ in range(trials)]
    medians = {"Cubing": _median_time(lambda x: cube(x, p), inputs)}
    fpe = pick_fpe_kind(p)
    perm = build(PermSpec(fpe, p, key))
    medians["AES-256"] = _median_time(perm.forward, inputs)
    for kind in kinds:
        if kind not in _SHUFFLE_COLUMNS:
            raise ParameterError(f"{kind!r} is not a shuffle")
        perm = build(PermSpec(kind, p, key, R))
        medians[_SHUFFLE_COLUMNS[kind]] = _median_time(perm.forward, inputs)
    return BenchResult(p.bit_length(), R, trials, fpe, medians)
