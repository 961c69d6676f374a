"""Small shared helpers: seeded RNG streams and input validation."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigError, InputError

_MASK64 = (1 << 64) - 1


def read_text_file(path: str | Path) -> str:
    """Read a UTF-8 input file; unreadable paths are input errors."""
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def derive_seed(seed: int, *path: int | str) -> int:
    """Derive a child seed from a base seed and a salt path.

    String salts are hashed into the entropy stream so distinct consumers
    (e.g. "init" vs "train") never share a stream even for equal ints.
    """
    entropy: list[int] = [int(seed) & _MASK64]
    for part in path:
        if isinstance(part, str):
            entropy.append(int.from_bytes(part.encode("utf-8"), "little") & _MASK64)
        else:
            entropy.append(int(part) & _MASK64)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def make_rng(seed: int, *path: int | str) -> np.random.Generator:
    """Build an independent Generator for (seed, *path)."""
    return np.random.default_rng(derive_seed(seed, *path))


def check_positive(name: str, value: float) -> None:
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")


def check_at_least(name: str, value: int, minimum: int) -> None:
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value!r}")


def check_fractions(name: str, fractions: Iterable[float]) -> tuple[float, ...]:
    """Validate a ratio vector: entries in [0, 1], summing to 1."""
    out = tuple(float(f) for f in fractions)
    if any(f < 0 or f > 1 for f in out):
        raise ConfigError(f"{name} entries must lie in [0, 1], got {out!r}")
    if abs(sum(out) - 1.0) > 1e-9:
        raise ConfigError(f"{name} must sum to 1, got {out!r}")
    return out
