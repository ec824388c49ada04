"""Distribution of ``Z = X + Y`` as a mixture of shifted copies of one summand.

Conditioning on ``X = x`` leaves ``Z | x ~ Y + x``, so the convolution is the
marginal of a location family mixed over ``X``.  Either summand can play the
mixing role.
"""

from typing import NamedTuple

from .direct import ConditionalFamily, DirectError, Grid, direct_location, location_family
from .mixture import FiniteMixture, from_grid
from .specs import SpecError, format_distribution


class ConvolutionGrid(NamedTuple):
    grid: Grid
    family: ConditionalFamily
    mixing: object
    shifted: object


def _family_for(dist):
    try:
        spec = f"location({format_distribution(dist)})"
    except SpecError:
        spec = None
    return location_family(dist, spec=spec)


def convolution_grid(p_x, p_y, config, mixing="auto"):
    """DIRECT grid for ``X + Y``.

    ``mixing`` selects which summand is discretised: ``"x"``, ``"y"`` or
    ``"auto"``.  ``"auto"`` builds both grids and keeps the one with fewer
    components, preferring ``X`` as the mixing variable on ties.
    """
    if mixing not in ("auto", "x", "y"):
        raise ValueError(f"mixing must be 'auto', 'x' or 'y', got {mixing!r}")
    options = []
    if mixing in ("auto", "x"):
        options.append((p_x, p_y))
    if mixing in ("auto", "y"):
        options.append((p_y, p_x))
    best, failure = None, None
    for mix, shift in options:
        try:
            grid = direct_location(shift, mix, config)
        except DirectError as exc:
            if len(options) == 1:
                raise
            failure = exc
            continue
        if best is None or grid.k < best.grid.k:
            best = ConvolutionGrid(grid, _family_for(shift), mix, shift)
    if best is None:
        raise failure
    return best


def convolve(p_x, p_y, config, mixing="auto") -> FiniteMixture:
    """Finite-mixture approximation to the distribution of ``X + Y``."""
    res = convolution_grid(p_x, p_y, config, mixing)
    return from_grid(res.grid, res.family)
