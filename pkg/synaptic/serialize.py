"""JSON input and output of pairs, elements and reports."""
from decimal import Decimal
from typing import NamedTuple

import numpy as np
import simplejson as json

from synaptic.elements import Effect, Projection
from synaptic.errors import ValidationError
from synaptic.linalg import SymmetricElement, DEFAULT_TOLERANCE, ToleranceConfig

# Keys of a serialized battery failure, used to replay it
REPLAY_KEYS = ("check", "seed", "trial")


def to_number(x):
    """A float as a Decimal with 17 significant digits, exact on reading."""
    x = float(x)
    if x == 0:
        return Decimal(0)
    return Decimal(format(x, ".17g"))


def prepare(obj):
    """Convert numbers, arrays and elements to JSON-ready values."""
    if isinstance(obj, SymmetricElement):
        obj = obj.entries
    if isinstance(obj, np.ndarray):
        return prepare(obj.tolist())
    if isinstance(obj, dict):
        return {str(key): prepare(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [prepare(value) for value in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return to_number(obj) if np.isfinite(obj) else None
    return obj


def dumps(obj):
    return json.dumps(prepare(obj), use_decimal=True, indent=2)


def dump(obj, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(obj))
        f.write("\n")


def load(path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as ex:
        raise ValidationError("input", f"cannot read {path}: {ex}") from ex
    except json.JSONDecodeError as ex:
        raise ValidationError("input", f"{path} is not valid JSON: {ex}") from ex


def _matrix(data, name, dim=None):
    try:
        m = np.array(data, dtype=float)
    except (TypeError, ValueError) as ex:
        raise ValidationError(name, f"not a numeric matrix: {ex}") from ex
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(name, f"expected a square matrix, got {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValidationError(
            "dim", f"{name} is {m.shape[0]}×{m.shape[0]}, dim is {dim}")
    return m


class PairInput(NamedTuple):
    """A validated pair (p, e) with its tolerances and any extra fields."""
    dim: int
    p: Projection
    e: Effect
    tol: ToleranceConfig
    extra: dict

    @property
    def replay(self):
        """(check, seed, trial) if the input is a serialized battery failure."""
        if all(key in self.extra for key in REPLAY_KEYS):
            return tuple(self.extra[key] for key in REPLAY_KEYS)
        return None


def _tolerance(data, base, overrides):
    stored = data.get("tol") or {}
    if not isinstance(stored, dict):
        raise ValidationError("tolerance", "tol must be an object")
    merged = dict(base.to_dict())
    merged.update(stored)
    merged.update(overrides or {})
    return ToleranceConfig.from_dict(merged)


def parse_pair(data, tol=DEFAULT_TOLERANCE, overrides=None):
    """
    Validate {"dim": n, "p": [[...]], "e": [[...]], "tol": {...}}.

    Tolerances stored in the input replace those of `tol`, and `overrides`
    (explicit command-line values) replace both.
    """
    if not isinstance(data, dict):
        raise ValidationError("input", "expected a JSON object")
    missing = [key for key in ("p", "e") if key not in data]
    if missing:
        raise ValidationError("input", f"missing keys: {', '.join(missing)}")
    dim = data.get("dim")
    if dim is not None and (not isinstance(dim, int) or dim < 1):
        raise ValidationError("dim", f"dim must be a positive integer, got {dim!r}")
    tol = _tolerance(data, tol, overrides)
    p = _matrix(data["p"], "projection", dim)
    e = _matrix(data["e"], "effect", dim)
    if p.shape != e.shape:
        raise ValidationError("dim", "p and e have different dimensions")
    extra = {key: value for key, value in data.items()
             if key not in ("dim", "p", "e", "tol")}
    return PairInput(p.shape[0], Projection(p, tol), Effect(e, tol), tol, extra)


def load_pair(path, tol=DEFAULT_TOLERANCE, overrides=None):
    return parse_pair(load(path), tol, overrides)


def load_projection(path, dim, tol=DEFAULT_TOLERANCE):
    """A projection stored as {"q": [[...]]} or as a bare matrix."""
    data = load(path)
    if isinstance(data, dict):
        if "q" not in data:
            raise ValidationError("input", "missing key: q")
        data = data["q"]
    return Projection(_matrix(data, "projection", dim), tol)


def pair_to_dict(p, e, tol=None, **extra):
    data = {"dim": np.shape(p)[0], "p": p, "e": e}
    if tol is not None and tol != DEFAULT_TOLERANCE:
        data["tol"] = tol.to_dict()
    data.update(extra)
    return data
