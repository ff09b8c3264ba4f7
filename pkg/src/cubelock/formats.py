"""Helpers for the line-oriented ``key=value`` file formats."""

from .errors import FormatError


def parse_lines(text: str, magic: str) -> list[tuple[int, str, str]]:
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0][1] != magic:
        raise FormatError(f"expected header {magic!r}", line=lines[0][0] if lines else 1)
    out = []
    for i, ln in lines[1:]:
        if "=" not in ln:
            raise FormatError("expected key=value", line=i)
        k, v = ln.split("=", 1)
        out.append((i, k.strip(), v.strip()))
    return out


def fields(entries, required) -> dict[str, tuple[int, str]]:
    seen: dict[str, tuple[int, str]] = {}
    for i, k, v in entries:
        if k in seen:
            raise FormatError(f"duplicate field {k!r}", line=i)
        seen[k] = (i, v)
    for k in required:
        if k not in seen:
            raise FormatError(f"missing field {k!r}")
    return seen


def parse_hex(value: str, line: int, name: str) -> int:
    try:
        return int(value, 16)
    except ValueError:
        raise FormatError(f"{name} is not hexadecimal", line=line) from None


def parse_number(value: str, line: int, name: str, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise FormatError(f"{name} is not a number", line=line) from None
