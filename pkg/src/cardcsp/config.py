"""Runtime caps and tolerances, overridable from a key=value config file."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import InputError


@dataclass(frozen=True)
class SolverConfig:
    enum_cap: int = 10 ** 7          # max slice points any exhaustive walk may visit
    kernel_cap: int = 40             # max kernel variables the solver will enumerate
    dense_cap: int = 2000            # max dimension for dense set-symmetric builds
    float_tol: float = 1e-9          # tolerance of float-mode linear algebra
    p0: Fraction = Fraction(1, 100)  # solver accepts p in [p0, 1-p0]
    threads: int | None = None       # accepted for CLI compatibility; results
                                     # are independent of it by construction


DEFAULT_CONFIG = SolverConfig()

_INT_KEYS = {"enum_cap", "kernel_cap", "dense_cap", "threads"}
_FLOAT_KEYS = {"float_tol"}
_FRACTION_KEYS = {"p0"}


def parse_config(text: str, base: SolverConfig = DEFAULT_CONFIG) -> SolverConfig:
    """Parse 'key = value' lines ('#' comments allowed) over a base config."""
    updates = {}
    for idx, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise InputError(f"config line {idx}: expected key = value")
        key, value = (part.strip() for part in body.split("=", 1))
        if key in _INT_KEYS:
            updates[key] = int(value)
        elif key in _FLOAT_KEYS:
            updates[key] = float(value)
        elif key in _FRACTION_KEYS:
            updates[key] = Fraction(value)
        else:
            raise InputError(f"config line {idx}: unknown key {key!r}")
    return replace(base, **updates)


def load_config(path: str, base: SolverConfig = DEFAULT_CONFIG) -> SolverConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base)
