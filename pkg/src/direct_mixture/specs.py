"""Text forms for distributions and conditional families.

Distributions::

    normal(mu,sigma)  chisq(nu)  t(nu)  logistic(loc,scale)  skewnormal(xi,omega,alpha)

Conditional families::

    normal-scale(nu)     p(y|s) = normal(0, sqrt(nu/s)), s > 0
    location(<dist>)     p(y|x) = <dist> shifted by x
"""

import re

from .distributions import ChiSquared, Logistic, Normal, SkewNormal, StudentT
from .direct import location_family, normal_scale_family


class SpecError(ValueError):
    """A distribution or family spec could not be parsed."""


_DISTRIBUTIONS = {
    "normal": (Normal, ("mu", "sigma")),
    "chisq": (ChiSquared, ("nu",)),
    "t": (StudentT, ("nu",)),
    "logistic": (Logistic, ("loc", "scale")),
    "skewnormal": (SkewNormal, ("xi", "omega", "alpha")),
}

_CALL = re.compile(r"^\s*([a-z][a-z0-9-]*)\s*\((.*)\)\s*$", re.DOTALL)


def _split_call(text):
    m = _CALL.match(text)
    if not m:
        raise SpecError(f"expected name(args...), got {text!r}")
    return m.group(1), m.group(2)


def _number(field, token):
    try:
        return float(token)
    except ValueError:
        raise SpecError(f"field {field!r}: {token.strip()!r} is not a number") from None


def parse_distribution(text):
    name, body = _split_call(text)
    if name not in _DISTRIBUTIONS:
        raise SpecError(f"unknown distribution {name!r}; expected one of {sorted(_DISTRIBUTIONS)}")
    cls, fields = _DISTRIBUTIONS[name]
    tokens = body.split(",") if body.strip() else []
    if len(tokens) != len(fields):
        raise SpecError(f"{name} takes {len(fields)} arguments ({', '.join(fields)}), got {len(tokens)}")
    values = [_number(f"{name}.{f}", t) for f, t in zip(fields, tokens)]
    try:
        return cls(*values)
    except ValueError as exc:
        raise SpecError(f"{name}: {exc}") from None


def format_distribution(dist):
    for name, (cls, fields) in _DISTRIBUTIONS.items():
        if type(dist) is cls:
            return f"{name}({','.join(repr(float(getattr(dist, f))) for f in fields)})"
    raise SpecError(f"no text form for {dist!r}")


def parse_family(text):
    name, body = _split_call(text)
    if name == "normal-scale":
        nu = _number("normal-scale.nu", body)
        if not nu > 0:
            raise SpecError("field 'normal-scale.nu' must be positive")
        return normal_scale_family(nu)
    if name == "location":
        base = parse_distribution(body)
        return location_family(base, spec=f"location({format_distribution(base)})")
    raise SpecError(f"unknown family {name!r}; expected 'normal-scale' or 'location'")
