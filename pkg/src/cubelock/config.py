"""Operator configuration, read from the file named by ``CUBELOCK_CONFIG``.

The file holds ``key=value`` lines; ``#`` starts a comment.  Recognised keys:
``seed_len``, ``window_width``, ``reduction_strategy``, ``shuffle_rounds``
(0 means the bit length of p) and ``curated_primes_path``.
"""

import os
from dataclasses import dataclass, fields, replace

from .bigmath.power import MAX_TABLE_ENTRIES, STRATEGIES
from .errors import FormatError, ParameterError

ENV_VAR = "CUBELOCK_CONFIG"


@dataclass(frozen=True)
class Config:
    seed_len: int = 256
    window_width: int = 6
    reduction_strategy: str = "montgomery"
    shuffle_rounds: int = 0
    curated_primes_path: str | None = None

    def validate(self) -> "Config":
        if self.seed_len < 0:
            raise ParameterError("seed_len must be nonnegative")
        if not 1 <= self.window_width or (1 << self.window_width) > MAX_TABLE_ENTRIES:
            raise ParameterError(f"window_width must be in 1..{MAX_TABLE_ENTRIES.bit_length() - 1}")
        if self.reduction_strategy not in STRATEGIES:
            raise ParameterError(f"reduction_strategy must be one of {', '.join(STRATEGIES)}")
        if self.shuffle_rounds < 0:
            raise ParameterError("shuffle_rounds must be nonnegative")
        return self


_TYPES = {f.name: f.type for f in fields(Config)}


def parse_config(text: str) -> Config:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError("expected key=value", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise FormatError(f"unknown config key {key!r}", line=lineno)
        if _TYPES[key] in (int, "int"):
            try:
                values[key] = int(value)
            except ValueError:
                raise FormatError(f"{key} must be an integer", line=lineno) from None
        else:
            values[key] = value
    return replace(Config(), **values).validate()


def load_config(env=None) -> Config:
    env = os.environ if env is None else env
    path = env.get(ENV_VAR)
    if not path:
        return Config()
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ParameterError(f"cannot read {ENV_VAR} file {path}: {exc.strerror}") from None
