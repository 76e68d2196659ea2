"""Literal formats, experiment configuration and report files.

Matrices in configuration files are nested arrays of ``[re, im]`` pairs in
row-major order; state vectors are flat arrays of ``[re, im]`` pairs. Plain
real numbers are accepted wherever a pair is expected. All floats written
by this module carry 17 significant digits.
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .conservation import spin_z


class ConfigError(ValueError):
    """A configuration problem, attributed to one field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def fmt(x: Any) -> str:
    """Text form used in CSV cells and console reports."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _parse_entry(e, field: str) -> complex:
    if isinstance(e, bool):
        raise ConfigError(field, f"expected a number or [re, im] pair, got {e!r}")
    if isinstance(e, (int, float)):
        return complex(e)
    if isinstance(e, (list, tuple)) and len(e) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in e
    ):
        return complex(e[0], e[1])
    raise ConfigError(field, f"expected a number or [re, im] pair, got {e!r}")


def parse_matrix(value, field: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(field, "expected a matrix literal (list of rows of [re, im] pairs)")
    rows = [[_parse_entry(e, field) for e in r] for r in value]
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(field, "matrix rows have different lengths")
    m = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ConfigError(field, "matrix has non-finite entries")
    return m


def parse_vector(value, field: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(field, "expected a state literal (list of [re, im] pairs)")
    return np.array([_parse_entry(e, field) for e in value], dtype=complex)


_SPIN_Z = re.compile(r"^\s*spin-z\(\s*(\d+)\s*\)\s*$")


def parse_observable(value, field: str) -> np.ndarray:
    """Matrix literal or the preset ``spin-z(n)``."""
    if isinstance(value, str):
        m = _SPIN_Z.match(value)
        if not m:
            raise ConfigError(field, f"unknown preset {value!r}; expected 'spin-z(n)' or a matrix literal")
        return spin_z(int(m.group(1)))
    mat = parse_matrix(value, field)
    if mat.shape[0] != mat.shape[1]:
        raise ConfigError(field, f"observable must be square, got shape {mat.shape}")
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
        raise ConfigError(field, "observable must be Hermitian")
    return mat


def matrix_literal(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def vector_literal(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


# --- output -------------------------------------------------------------------

_FLOAT_TAG = "\x00f:"


def _tag_floats(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _FLOAT_TAG + format(x, ".17g") if math.isfinite(x) else None
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Mapping):
        return {str(k): _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """JSON text with every float printed to 17 significant digits."""
    text = json.dumps(_tag_floats(obj), indent=2)
    return re.sub(r'"\\u0000f:([^"]*)"', r"\1", text) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps(obj))


def write_csv(path: str | Path, fields: Sequence[str], rows: Iterable[Mapping]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([fmt(row[k]) for k in fields])
