"""Divergence-restricted binning of a mixing distribution.

A conditional family ``x -> p(y|x)`` and a mixing distribution ``p(x)`` are
turned into a :class:`Grid` of reference points, bin margins and bin weights
such that, within every bin, the symmetrised divergence between ``p(y|x)``
and the conditional at the bin's reference point stays below ``delta``.
"""

from dataclasses import dataclass, field
import math
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._roots import BracketError
from .distributions import Distribution, Normal
from .divergence import DEFAULT_SETTINGS, QuadratureSettings, sym_kl_normal, sym_kl_numeric


class DirectError(RuntimeError):
    """The grid construction cannot proceed (non-finite or discontinuous divergence)."""


@dataclass(frozen=True)
class ConditionalFamily:
    """Map from a scalar latent value to the conditional distribution ``p(y|x)``.

    ``divergence(x1, x2)`` may supply a closed-form symmetrised divergence;
    otherwise it is computed by quadrature with ``settings``.  ``spec`` is the
    textual form used in grid files, when one exists.
    """

    map: Callable[[float], Distribution]
    latent_domain: tuple = (-math.inf, math.inf)
    divergence: Optional[Callable[[float, float], float]] = None
    location_base: Optional[Distribution] = None
    spec: Optional[str] = None
    settings: QuadratureSettings = DEFAULT_SETTINGS

    def __call__(self, x):
        return self.map(float(x))

    def sym_divergence(self, x1, x2):
        if self.divergence is not None:
            return float(self.divergence(x1, x2))
        return sym_kl_numeric(self(x1), self(x2), self.settings)


def normal_scale_family(nu):
    """Zero-mean normals with scale ``sqrt(nu / s)``; mixing over ``s ~ chi2(nu)`` gives Student-t."""
    nu = float(nu)
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")

    def div(s1, s2):
        return sym_kl_normal(0.0, math.sqrt(nu / s1), 0.0, math.sqrt(nu / s2))

    return ConditionalFamily(
        map=lambda s: Normal(0.0, math.sqrt(nu / s)),
        latent_domain=(0.0, math.inf),
        divergence=div,
        spec=f"normal-scale({nu!r})",
    )


def location_family(base, spec=None, settings=DEFAULT_SETTINGS):
    """Shifted copies ``p(y|x) = base(y - x)``; normal bases get the closed form."""
    div = None
    if isinstance(base, Normal):
        sigma = base.sigma
        div = lambda x1, x2: sym_kl_normal(x1, sigma, x2, sigma)
    return ConditionalFamily(
        map=base.shifted,
        divergence=div,
        location_base=base,
        spec=spec,
        settings=settings,
    )


@dataclass(frozen=True)
class DirectConfig:
    """Tuning parameters of the grid construction.

    ``start=None`` places the first reference point at the ``epsilon/2``
    quantile of the mixing distribution.  ``root_tol`` is measured in
    divergence units and defaults to ``delta * 1e-6``.
    """

    delta: float
    epsilon: float = 1e-3
    start: Optional[float] = None
    root_tol: Optional[float] = None
    step_factor: float = 2.0
    max_expansions: int = 200
    max_bins: int = 100_000

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not self.step_factor > 1:
            raise ValueError("step_factor must exceed 1")
        if self.root_tol is not None and not self.root_tol > 0:
            raise ValueError("root_tol must be positive")

    @property
    def tol(self):
        return self.delta * 1e-6 if self.root_tol is None else self.root_tol


@dataclass
class Grid:
    """Discretised mixing distribution.

    Bin ``i`` is ``(margins[i-1], margins[i]]`` with the outer bins open
    towards the infinite ends.  ``weights`` are the raw bin probabilities;
    ``dropped_tail`` is the right-tail mass beyond ``upper`` that no bin
    carries.  ``lower``/``upper`` delimit the latent range over which the
    divergence bound was enforced.
    """

    reference_points: np.ndarray
    margins: np.ndarray
    weights: np.ndarray
    dropped_tail: float = 0.0
    lower: float = field(default=math.nan)
    upper: float = field(default=math.nan)

    def __post_init__(self):
        self.reference_points = np.asarray(self.reference_points, dtype=float).reshape(-1)
        self.margins = np.asarray(self.margins, dtype=float).reshape(-1)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        k = self.reference_points.size
        if k < 1:
            raise ValueError("a grid needs at least one reference point")
        if self.margins.size != k - 1 or self.weights.size != k:
            raise ValueError(
                f"inconsistent grid: {k} reference points, {self.margins.size} margins, "
                f"{self.weights.size} weights")
        if np.any(np.diff(self.reference_points) <= 0) or np.any(np.diff(self.margins) <= 0):
            raise ValueError("reference points and margins must be strictly increasing")
        if k > 1 and (np.any(self.reference_points[:-1] > self.margins)
                      or np.any(self.margins >= self.reference_points[1:])):
            raise ValueError("each reference point must lie inside its own bin")
        if np.any(self.weights < 0) or self.dropped_tail < 0:
            raise ValueError("weights must be non-negative")
        if math.isnan(self.lower):
            self.lower = float(self.reference_points[0])
        if math.isnan(self.upper):
            self.upper = float(self.reference_points[-1])

    @property
    def k(self):
        return self.reference_points.size

    def bin_bounds(self, i):
        """Latent interval of bin ``i`` over which the bound is enforced."""
        lo = self.lower if i == 0 else self.margins[i - 1]
        hi = self.upper if i == self.k - 1 else self.margins[i]
        return float(lo), float(hi)


class Crossing(NamedTuple):
    x: float
    saturated: bool


def advance_to_delta(family, anchor, delta, config, initial_step=None, upper=None):
    """Smallest ``x > anchor`` at which the divergence from ``p(y|anchor)`` reaches ``delta``.

    Steps forward from ``anchor`` with geometrically growing steps until the
    divergence first reaches ``delta``, then bisects the bracket until the
    divergence is within ``config.tol`` of ``delta``.  If ``upper`` (default:
    the end of the latent domain) is hit first, returns ``Crossing(upper,
    saturated=False)``.
    """
    anchor = float(anchor)
    if upper is None:
        upper = family.latent_domain[1]
    if initial_step is None:
        initial_step = 0.1 * max(1.0, abs(anchor))
    tol = config.tol

    def div(x):
        d = family.sym_divergence(anchor, x)
        if not math.isfinite(d):
            raise DirectError(f"non-finite divergence between x={anchor} and x={x}")
        return d

    lo, step = anchor, float(initial_step)
    for _ in range(config.max_expansions):
        x = min(lo + step, upper)
        d = div(x)
        if d >= delta:
            hi = x
            break
        if x >= upper:
            return Crossing(float(upper), False)
        lo = x
        step *= config.step_factor
    else:
        raise BracketError(
            f"divergence from x={anchor} stayed below {delta} after {config.max_expansions} steps")

    if abs(d - delta) <= tol:
        return Crossing(hi, True)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            if lo == anchor:
                raise DirectError(f"divergence jumps above delta immediately at x={anchor}")
            # discontinuous crossing: keep the side that honours the bound
            return Crossing(lo, True)
        d = div(mid)
        if abs(d - delta) <= tol:
            return Crossing(mid, True)
        if d < delta:
            lo = mid
        else:
            hi = mid


def bin_weights(mixing, margins):
    """Probabilities of the bins cut by ``margins``, outer bins open to -inf/+inf."""
    margins = np.asarray(margins, dtype=float).reshape(-1)
    if np.any(np.diff(margins) <= 0):
        raise ValueError("margins must be strictly increasing")
    if margins.size == 0:
        return np.ones(1)
    cdf = np.atleast_1d(mixing.cdf(margins))
    return np.diff(np.concatenate([[0.0], cdf, [1.0]]))


# fraction of the right-tail budget beyond which crossings are no longer searched
SEARCH_TAIL_FRACTION = 1e-3


def _upper_limit(mixing, budget, domain_hi):
    if budget > 0 and 1.0 - budget < 1.0:
        return min(float(mixing.quantile(1.0 - budget)), domain_hi)
    return min(mixing.support[1], domain_hi)


def _start_point(mixing, family, config):
    if config.start is not None:
        return float(config.start)
    if config.epsilon > 0:
        return float(mixing.quantile(0.5 * config.epsilon))
    lo = max(mixing.support[0], family.latent_domain[0])
    if not math.isfinite(lo):
        raise ValueError("epsilon = 0 needs a finite lower end of the latent domain or an explicit start")
    return lo


def direct_sequential(family, mixing, config):
    """Left-to-right DIRECT binning of ``mixing`` for the conditional ``family``.

    Alternates between placing a bin margin at divergence ``delta`` to the right
    of the current reference point and the next reference point at divergence
    ``delta`` to the right of that margin.  Stops once the mass to the right of
    the latest margin is at most ``epsilon - P(X <= start)``.
    """
    x1 = _start_point(mixing, family, config)
    dom_lo, dom_hi = family.latent_domain
    if not dom_lo <= x1 <= dom_hi:
        raise ValueError(f"start {x1} lies outside the latent domain {family.latent_domain}")
    eps1 = float(mixing.cdf(x1))
    if eps1 > config.epsilon:
        raise ValueError(
            f"invalid start: P(X <= {x1}) = {eps1:.3g} exceeds epsilon = {config.epsilon}")
    budget = config.epsilon - eps1
    # searches may run past the stopping quantile so the last margin can saturate
    limit = _upper_limit(mixing, SEARCH_TAIL_FRACTION * budget, dom_hi)
    q25, q75 = (float(v) for v in mixing.quantile(np.array([0.25, 0.75])))
    step0 = 0.1 * (q75 - q25)

    def advance(x):
        return advance_to_delta(family, x, config.delta, config, initial_step=step0, upper=limit)

    refs, margins = [x1], []
    closed = True
    c = advance(x1)
    if not c.saturated:
        closed = False
        closure = c.x
    else:
        margins.append(c.x)
        while float(mixing.sf(margins[-1])) > budget:
            if len(refs) >= config.max_bins:
                raise DirectError(f"more than {config.max_bins} bins required")
            r = advance(margins[-1])
            refs.append(r.x)
            if not r.saturated:
                closed = False
                closure = r.x
                break
            m = advance(r.x)
            if not m.saturated:
                closed = False
                closure = m.x
                break
            margins.append(m.x)

    if closed:
        closure = margins.pop()
        cut = np.asarray(margins + [closure])
        w = bin_weights(mixing, cut)
        weights, dropped = w[:-1], float(w[-1])
    else:
        weights, dropped = bin_weights(mixing, margins), 0.0
    return Grid(np.asarray(refs), np.asarray(margins), weights, dropped, lower=x1, upper=closure)


def shift_half_width(shift_family, delta, config, initial_step=None):
    """Shift ``h`` with ``D_s(p_Y(y) || p_Y(y - h)) = delta``."""
    fam = location_family(shift_family)
    if initial_step is None:
        q25, q75 = (float(v) for v in shift_family.quantile(np.array([0.25, 0.75])))
        initial_step = 0.1 * (q75 - q25)
    c = advance_to_delta(fam, 0.0, delta, config, initial_step=initial_step)
    if not c.saturated:
        raise DirectError("shift divergence never reaches delta")
    return c.x


def direct_location(shift_family, mixing, config):
    """Equally spaced grid for a pure location family ``p(y|x) = p_Y(y - x)``.

    With ``h`` the shift at which the divergence reaches ``delta``, every
    latent value within ``h`` of a reference point is within ``delta`` of it.
    Reference points therefore sit at most ``2 h`` apart between the
    ``epsilon/2`` and ``1 - epsilon/2`` quantiles of ``mixing``; margins are
    the midpoints and the outer bins absorb the tails.
    """
    h = shift_half_width(shift_family, config.delta, config)
    eps = config.epsilon
    if eps > 0:
        lo, hi = (float(v) for v in mixing.quantile(np.array([0.5 * eps, 1.0 - 0.5 * eps])))
    else:
        lo, hi = mixing.support
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("epsilon = 0 requires a mixing distribution with bounded support")
    gaps = math.ceil((hi - lo) / (2.0 * h)) if hi > lo else 0
    if gaps + 1 > config.max_bins:
        raise DirectError(f"{gaps + 1} bins required, more than max_bins={config.max_bins}")
    refs = np.linspace(lo, hi, gaps + 1)
    margins = 0.5 * (refs[:-1] + refs[1:])
    return Grid(refs, margins, bin_weights(mixing, margins), 0.0, lower=lo, upper=hi)
