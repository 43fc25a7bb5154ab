"""Deterministic serialization: 17-significant-digit floats, CSV, JSON.

Every float leaving the package goes through :func:`format_float`, which
prints 17 significant digits — enough to round-trip any IEEE-754 double
exactly — so repeated runs produce byte-identical artifacts.  The stdlib
``json`` module offers no control over float formatting, hence the small
recursive emitter here; parsing is plain ``json.loads``.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .fock import TruncatedFockState

__all__ = [
    "format_float",
    "dumps_json",
    "write_csv_rows",
    "state_to_obj",
    "state_from_obj",
]

#: State-JSON amplitudes with magnitude below this are omitted.
AMPLITUDE_FLOOR = 1e-15


def format_float(x: float) -> str:
    """Render a finite float with 17 significant digits (round-trip exact)."""
    if not math.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite float {x!r}")
    return format(float(x), ".17g")


def _emit(obj: Any, parts: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    closing_pad = " " * (indent * level)
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(float(obj)))
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            parts.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(value, parts, indent, level + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(closing_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, value in enumerate(obj):
            parts.append(pad)
            _emit(value, parts, indent, level + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(closing_pad + "]")
    else:
        raise ValidationError(f"cannot serialize object of type {type(obj).__name__}")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """JSON text with 17-significant-digit floats and insertion-ordered keys."""
    parts: list[str] = []
    _emit(obj, parts, indent, 0)
    parts.append("\n")
    return "".join(parts)


def write_csv_rows(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV text: a header row, then rows with floats at 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(format_float(float(cell)))
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def state_to_obj(state: TruncatedFockState) -> dict:
    """State as a JSON-ready object; amplitudes below 1e-15 are omitted."""
    entries = []
    amps = state.amplitudes
    for idx in np.ndindex(*state.cutoffs):
        amp = amps[idx]
        if abs(amp) < AMPLITUDE_FLOOR:
            continue
        entries.append({"idx": list(idx), "re": float(amp.real), "im": float(amp.imag)})
    return {
        "cutoffs": list(state.cutoffs),
        "sector": None if state.sector is None else int(state.sector),
        "amplitudes": entries,
    }


def state_from_obj(obj: dict) -> TruncatedFockState:
    """Inverse of :func:`state_to_obj`."""
    try:
        cutoffs = tuple(int(c) for c in obj["cutoffs"])
        sector = obj.get("sector")
        entries = obj["amplitudes"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed state object: {exc}") from exc
    amps = np.zeros(cutoffs, dtype=complex)
    for entry in entries:
        idx = tuple(int(i) for i in entry["idx"])
        if len(idx) != 4 or any(i < 0 or i >= c for i, c in zip(idx, cutoffs)):
            raise ValidationError(f"amplitude index {idx!r} outside cutoffs {cutoffs!r}")
        amps[idx] = float(entry["re"]) + 1j * float(entry["im"])
    return TruncatedFockState(
        cutoffs=cutoffs, amplitudes=amps, sector=None if sector is None else int(sector)
    )
