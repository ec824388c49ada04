"""JSON grid files.

Layout::

    {
      "family": "normal-scale(5.0)",
      "delta": 0.01,
      "epsilon": 0.001,
      "reference_points": [...],
      "margins": [...],
      "weights": [...],
      "dropped_tail": 0.00047,
      "renormalized": true,
      "lower": 0.158,
      "upper": 22.2
    }

Weights are stored as computed (before renormalisation); ``renormalized``
tells readers to divide them by their sum.  ``lower``/``upper`` are optional
and give the latent range over which the bound was enforced.
"""

from dataclasses import dataclass
import json
import re

from .direct import Grid
from .mixture import from_grid
from .specs import parse_family


class GridFileError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class GridFile:
    grid: Grid
    family: str
    delta: float
    epsilon: float
    renormalized: bool = True

    def conditional_family(self):
        return parse_family(self.family)

    def mixture(self):
        return from_grid(self.grid, self.conditional_family(), renormalize=self.renormalized)


def to_dict(gf):
    g = gf.grid
    return {
        "family": gf.family,
        "delta": float(gf.delta),
        "epsilon": float(gf.epsilon),
        "reference_points": [float(v) for v in g.reference_points],
        "margins": [float(v) for v in g.margins],
        "weights": [float(v) for v in g.weights],
        "dropped_tail": float(g.dropped_tail),
        "renormalized": bool(gf.renormalized),
        "lower": float(g.lower),
        "upper": float(g.upper),
    }


def dumps(gf):
    return json.dumps(to_dict(gf), indent=2)


def write(gf, path):
    with open(path, "w") as fh:
        fh.write(dumps(gf) + "\n")


_REQUIRED = ("family", "delta", "epsilon", "reference_points", "margins", "weights",
             "dropped_tail", "renormalized")


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GridFileError(exc.msg, exc.lineno) from None
    if not isinstance(data, dict):
        raise GridFileError("top level must be a JSON object", 1)
    for key in _REQUIRED:
        if key not in data:
            raise GridFileError(f"missing field {key!r}", 1)

    def number(key):
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise GridFileError(f"field {key!r} must be a number", _line_of(text, key))
        return float(v)

    def numbers(key):
        v = data[key]
        if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
            raise GridFileError(f"field {key!r} must be a list of numbers", _line_of(text, key))
        return [float(x) for x in v]

    if not isinstance(data["family"], str):
        raise GridFileError("field 'family' must be a string", _line_of(text, "family"))
    if not isinstance(data["renormalized"], bool):
        raise GridFileError("field 'renormalized' must be true or false", _line_of(text, "renormalized"))
    extra = {k: number(k) for k in ("lower", "upper") if k in data}
    try:
        grid = Grid(numbers("reference_points"), numbers("margins"), numbers("weights"),
                    number("dropped_tail"), **extra)
    except ValueError as exc:
        if isinstance(exc, GridFileError):
            raise
        raise GridFileError(str(exc), _line_of(text, "reference_points")) from None
    return GridFile(grid, data["family"], number("delta"), number("epsilon"), data["renormalized"])


def read(path):
    with open(path) as fh:
        return loads(fh.read())

