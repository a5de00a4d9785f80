"""Plain ``key = value`` configuration files.

Recognised keys are the command-line option names (``nbar``, ``kappa``,
``G``, ``O_range``, ``family``, ``mode``, ``out``, ``tail_tol``,
``threads``, ``form``), the effective-parameter fields, the ``input.*``
state keys and ``physical.*`` keys named after the SI parameter fields.
Anything else is rejected.
"""

from __future__ import annotations

import configparser
import math
from pathlib import Path

from .params import EFFECTIVE_KEYS, PHYSICAL_KEYS, derive_effective, physical_from_mapping
from .states import InputState

CLI_KEYS = ("nbar", "kappa", "G", "O_range", "family", "mode", "out", "tail_tol", "threads", "form")
INPUT_KEYS = ("input.kind", "input.alpha_re", "input.alpha_im", "input.r", "input.theta", "input.nbar")
ALLOWED = set(CLI_KEYS) | set(EFFECTIVE_KEYS) | set(INPUT_KEYS) | {f"physical.{k}" for k in PHYSICAL_KEYS}

_SECTION = "config"


def load(path) -> dict:
    """Read ``path`` into a flat dict of strings, rejecting unknown keys."""
    text = Path(path).read_text(encoding="utf-8")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string(f"[{_SECTION}]\n" + text)
    values = dict(cp[_SECTION])
    unknown = sorted(set(values) - ALLOWED)
    if unknown:
        raise KeyError(f"unknown configuration keys: {unknown}")
    return values


def input_state(values: dict):
    """InputState from ``input.*`` keys, or None if ``input.kind`` is absent."""
    kind = values.get("input.kind")
    if kind is None:
        return None
    if "input.nbar" in values:
        phase = float(values.get("input.theta", 0.0))
        return InputState.from_nbar(kind, float(values["input.nbar"]), phase)
    if kind == "coherent":
        return InputState.coherent(complex(float(values.get("input.alpha_re", 0.0)), float(values.get("input.alpha_im", 0.0))))
    return InputState.squeezed(float(values.get("input.r", 0.0)), float(values.get("input.theta", 0.0)))


def physical_effective(values: dict):
    """EffectiveParams derived from ``physical.*`` keys, or None."""
    phys = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("physical.")}
    if not phys:
        return None
    return derive_effective(physical_from_mapping(phys))


def effective_overrides(values: dict) -> dict:
    return {k: float(v) for k, v in values.items() if k in EFFECTIVE_KEYS}


def parse_list(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def parse_range(text: str) -> list[float]:
    """``a:b:steps`` to an inclusive grid of ``steps`` points."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be a:b:steps, got {text!r}")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ValueError("range needs at least one point")
    if n == 1:
        return [a]
    if not b > a:
        raise ValueError("range must be strictly increasing")
    return [a + (b - a) * i / (n - 1) for i in range(n)]


def check_grid(values) -> None:
    if len(values) == 0:
        raise ValueError("grid is empty")
    if any(not math.isfinite(v) for v in values):
        raise ValueError("grid contains non-finite values")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("grid must be strictly increasing")
