"""Finite mixtures ``q(y) = sum_i w_i p(y | x_i)`` built from a grid."""

import math

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from ._roots import expand_bracket
from .distributions import Distribution, Logistic, Normal
from .divergence import integrate_gk_many


class FiniteMixture(Distribution):
    """Weighted finite mixture of univariate distributions.

    Densities are evaluated as a log-sum-exp over ``log w_i + log p_i(y)`` so
    that far-tail log densities stay finite.
    """

    def __init__(self, components, weights):
        components = list(components)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if not components:
            raise ValueError("a mixture needs at least one component")
        if len(components) != weights.size:
            raise ValueError(f"{len(components)} components but {weights.size} weights")
        if np.any(weights < 0) or not np.isfinite(weights).all():
            raise ValueError("mixture weights must be finite and non-negative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {weights.sum():.15g}, not 1")
        self.components = components
        self.weights = weights
        with np.errstate(divide="ignore"):
            self._log_w = np.log(weights)
        self._stack = self._vectorised_params()

    def __repr__(self):
        return f"FiniteMixture(k={self.k})"

    @property
    def k(self):
        return len(self.components)

    @property
    def support(self):
        lo = min(c.support[0] for c in self.components)
        hi = max(c.support[1] for c in self.components)
        return lo, hi

    def _vectorised_params(self):
        # fast path for the homogeneous families produced by the examples
        kinds = {type(c) for c in self.components}
        if kinds == {Normal}:
            loc = np.array([c.mu for c in self.components])
            scale = np.array([c.sigma for c in self.components])
            return Normal, loc[:, None], scale[:, None]
        if kinds == {Logistic}:
            loc = np.array([c.loc for c in self.components])
            scale = np.array([c.scale for c in self.components])
            return Logistic, loc[:, None], scale[:, None]
        return None

    def _component_log_pdf(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self._stack is not None:
            kind, loc, scale = self._stack
            z = (y[None, :] - loc) / scale
            if kind is Normal:
                return -0.5 * z * z - 0.5 * math.log(2 * math.pi) - np.log(scale)
            z = -np.abs(z)
            return z - 2.0 * np.log1p(np.exp(z)) - np.log(scale)
        return np.array([np.atleast_1d(c.log_pdf(y)) for c in self.components])

    def log_pdf(self, y):
        shape = np.shape(y)
        lp = self._component_log_pdf(y) + self._log_w[:, None]
        return logsumexp(lp, axis=0).reshape(shape)[()]

    def cdf(self, y):
        shape = np.shape(y)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        f = np.array([np.atleast_1d(c.cdf(y)) for c in self.components])
        out = np.clip(self.weights @ f, 0.0, 1.0)
        out[y == np.inf] = 1.0
        return out.reshape(shape)[()]

    def sf(self, y):
        shape = np.shape(y)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        s = np.array([np.atleast_1d(c.sf(y)) for c in self.components])
        out = np.clip(self.weights @ s, 0.0, 1.0)
        out[y == -np.inf] = 1.0
        return out.reshape(shape)[()]

    def _quantile_bracket(self, p):
        # the envelope of component quantiles brackets the mixture quantile
        live = [c for c, w in zip(self.components, self.weights) if w > 0]
        qs = np.array([np.atleast_1d(c.quantile(p)) for c in live])
        lo, hi = qs.min(axis=0), qs.max(axis=0)
        width = np.maximum(hi - lo, 1e-8 * np.maximum(1.0, np.abs(lo)))
        s_lo, s_hi = self.support
        lo, _ = expand_bracket(self.cdf, p, lo, float(width.max()), s_lo, s_hi)
        _, hi = expand_bracket(self.cdf, p, hi, float(width.max()), s_lo, s_hi)
        return lo, hi

    def sample(self, rng, n):
        """Pick a component per draw from the weights, then sample from it."""
        n = int(n)
        idx = rng.choice(self.k, size=n, p=self.weights)
        out = np.empty(n)
        for i, comp in enumerate(self.components):
            mask = idx == i
            m = int(mask.sum())
            if m:
                out[mask] = comp.sample(rng, m)
        return out

    def moments(self):
        """``(mean, variance)`` by the law of total variance."""
        mu = np.array([c.mean for c in self.components], dtype=float)
        var = np.array([c.variance for c in self.components], dtype=float)
        mean = float(self.weights @ mu)
        second = float(self.weights @ (var + mu * mu))
        return mean, second - mean * mean

    @property
    def mean(self):
        return self.moments()[0]

    @property
    def variance(self):
        return self.moments()[1]


def from_grid(grid, family, renormalize=True):
    """Mixture of the conditionals at the grid's reference points.

    With ``renormalize`` (the default) the weights are divided by their sum so
    that mass dropped in the tails is spread proportionally.
    """
    if grid.k < 1:
        raise ValueError("empty grid")
    weights = np.asarray(grid.weights, dtype=float)
    if renormalize:
        weights = weights / weights.sum()
    components = [family(x) for x in grid.reference_points]
    return FiniteMixture(components, weights)


class ContinuousMixture(Distribution):
    """Exact marginal ``p(y) = integral p(y|x) p(x) dx`` evaluated by quadrature.

    Slow compared with a finite mixture; meant as the reference against which
    finite approximations are checked.

    Location families are integrated over the whole latent support for all
    evaluation points at once: finite panels between the ``tail`` and
    ``1 - tail`` quantiles of the mixing distribution, with breaks where
    ``p(y|x)`` peaks for each ``y``, and infinite ends mapped onto ``(0, 1]``.
    Other families fall back to one adaptive quadrature per point over the
    truncated central range.
    """

    def __init__(self, family, mixing, tail=1e-12, rel_tol=1e-11, max_subdivisions=2000):
        self.family = family
        self.mixing = mixing
        self.tail = tail
        self.rel_tol = rel_tol
        self.max_subdivisions = max_subdivisions
        lo, hi = mixing.quantile(np.array([tail, 1.0 - tail]))
        d_lo, d_hi = family.latent_domain
        self._outer = (max(mixing.support[0], d_lo), min(mixing.support[1], d_hi))
        self._trunc = (max(float(lo), self._outer[0]), min(float(hi), self._outer[1]))
        levels = np.array([1e-6, 1e-3, 0.01, 0.25, 0.5, 0.75, 0.99, 1 - 1e-3, 1 - 1e-6])
        self._breaks = np.asarray(mixing.quantile(levels), dtype=float)
        # a finite support end is reached through the power map from the 1% quantiles
        self._range = (float(self._breaks[2]) if math.isfinite(self._outer[0]) else max(float(lo), self._outer[0]),
                       float(self._breaks[-3]) if math.isfinite(self._outer[1]) else min(float(hi), self._outer[1]))
        q25, q75 = mixing.quantile(np.array([0.25, 0.75]))
        self._tail_scale = float(q75 - q25)
        self._base = family.location_base
        if self._base is not None:
            # kernel breaks out to where its remaining mass is below the tolerance
            kernel_levels = np.array([1e-12, 1e-6, 1e-3, 0.25, 0.5, 0.75, 1 - 1e-3, 1 - 1e-6, 1 - 1e-12])
            self._offsets = np.asarray(self._base.quantile(kernel_levels))

    def __repr__(self):
        return f"ContinuousMixture({self.family.spec or self.family.map!r}, {self.mixing!r})"

    @property
    def support(self):
        if self._base is not None:
            return -math.inf, math.inf
        return super().support

    # batched path for location families

    _DIRECT, _LEFT, _RIGHT, _LEFT_END, _RIGHT_END = 0, 1, 2, 3, 4
    # power of the map onto a finite support end; absorbs density singularities
    # up to |x - end|^(-7/8)
    _END_POWER = 8

    def _to_x(self, t, tag, y, lo, hi):
        """Kernel argument ``y - x``, latent value ``x`` and Jacobian at panel coordinates ``t``.

        Finite panels on ``[lo, hi]`` use ``t = x - y`` so the kernel is
        evaluated without cancellation when ``|y|`` is large; the regions
        beyond use their own maps.
        """
        s = self._tail_scale
        arg = -t
        x = y + t
        jac = np.ones_like(t)
        with np.errstate(divide="ignore"):
            u = (1.0 - t) / t
        for tg, sign, end in ((self._LEFT, -1.0, lo), (self._RIGHT, 1.0, hi)):
            sel = tag == tg
            if sel.any():
                x[sel] = end[sel] + sign * s * u[sel]
                arg[sel] = (y[sel] - end[sel]) - sign * s * u[sel]
                jac[sel] = s / t[sel] ** 2
        k = self._END_POWER
        for tg, end, outer in ((self._LEFT_END, lo, self._outer[0]), (self._RIGHT_END, hi, self._outer[1])):
            sel = tag == tg
            if sel.any():
                w = end[sel] - outer
                x[sel] = outer + w * t[sel] ** k
                arg[sel] = (y[sel] - outer) - w * t[sel] ** k
                jac[sel] = np.abs(w) * k * t[sel] ** (k - 1)
        return arg, x, jac

    def _panels(self, y):
        """Panels ``(a, b, owner, tag)`` plus the per-point finite range ``(lo, hi)``."""
        a, b = self._range
        s = self._tail_scale
        peaks = y[:, None] - self._offsets[None, :]
        lo = np.full(y.size, a)
        hi = np.full(y.size, b)
        # keep each kernel peak inside the finite panels
        if not math.isfinite(self._outer[0]):
            lo = np.minimum(lo, peaks.min(axis=1))
        if not math.isfinite(self._outer[1]):
            hi = np.maximum(hi, peaks.max(axis=1))

        def segment(edges, tag):
            edges = np.sort(edges, axis=1)
            e0, e1 = edges[:, :-1], edges[:, 1:]
            owner = np.broadcast_to(np.arange(y.size)[:, None], e0.shape)
            keep = e1 > e0
            return e0[keep], e1[keep], owner[keep], np.full(int(keep.sum()), tag)

        parts = []
        # finite panels are laid out in x - y
        inner = np.concatenate([lo[:, None], hi[:, None], np.tile(self._breaks, (y.size, 1)), peaks], axis=1)
        inner = np.clip(inner, lo[:, None], hi[:, None]) - y[:, None]
        inner[:, -self._offsets.size:] = np.clip(-self._offsets[None, :], (lo - y)[:, None], (hi - y)[:, None])
        parts.append(segment(inner, self._DIRECT))
        ends = ((lo, self._outer[0], self._LEFT, self._LEFT_END),
                (hi, self._outer[1], self._RIGHT, self._RIGHT_END))
        for end, outer, tag, end_tag in ends:
            if math.isfinite(outer):
                if np.all(end == outer):
                    continue
                # x = outer + (end - outer) t^k on t in (0, 1]
                with np.errstate(invalid="ignore", divide="ignore"):
                    frac = np.clip((peaks - outer) / (end - outer)[:, None], 0.0, 1.0) ** (1.0 / self._END_POWER)
                frac = np.nan_to_num(frac)
                edges = np.concatenate([np.tile([0.0, 1.0], (y.size, 1)), frac], axis=1)
            else:
                # x = end -/+ s (1 - t) / t maps t in (0, 1] onto the infinite tail
                edges = np.tile([0.0, 1.0], (y.size, 1))
                end_tag = tag
            parts.append(segment(edges, end_tag))
        return tuple(np.concatenate(col) for col in zip(*parts)) + (lo, hi)

    def _batched(self, log_kernel, y, shift=None):
        a, b, owner, tag, lo, hi = self._panels(y)
        if shift is None:
            shift = np.zeros(y.size)

        def func(t, own, tg):
            arg, x, jac = self._to_x(t, tg, y[own], lo[own], hi[own])
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                lk = log_kernel(arg) + self.mixing.log_pdf(x) - shift[own]
                out = np.exp(np.minimum(lk, 700.0)) * jac
            return np.where(np.isfinite(out), out, 0.0)

        val, _ = integrate_gk_many(func, a, b, owner, y.size, self.rel_tol, 1e-300,
                                   self.max_subdivisions, tag)
        return val

    def _log_pdf_location(self, y):
        # scale each integrand by its largest value on a coarse pass
        a, b, owner, tag, lo, hi = self._panels(y)
        arg, x, _ = self._to_x(0.5 * (a + b), tag, y[owner], lo[owner], hi[owner])
        with np.errstate(divide="ignore", invalid="ignore"):
            lk = self._base.log_pdf(arg) + self.mixing.log_pdf(x)
        shift = np.full(y.size, -np.inf)
        np.maximum.at(shift, owner, np.where(np.isnan(lk), -np.inf, lk))
        shift = np.where(np.isfinite(shift), shift, 0.0)
        val = self._batched(self._base.log_pdf, y, shift)
        with np.errstate(divide="ignore"):
            return np.log(val) + shift

    def _log_of(self, fn):
        def log_fn(t):
            with np.errstate(divide="ignore"):
                return np.log(fn(t))
        return log_fn

    # per-point fallback

    def _integrate(self, fn):
        a, b = self._trunc
        pts = [p for p in self._breaks if a < p < b]
        val, _ = integrate.quad(fn, a, b, epsabs=0.0, epsrel=self.rel_tol, limit=1000, points=pts or None)
        return val

    def _pdf_scalar(self, y):
        return self._integrate(
            lambda x: math.exp(float(self.family(x).log_pdf(y)) + float(self.mixing.log_pdf(x))))

    def log_pdf(self, y):
        shape = np.shape(y)
        y = np.atleast_1d(np.asarray(y, dtype=float)).reshape(-1)
        if self._base is not None:
            out = self._log_pdf_location(y)
        else:
            with np.errstate(divide="ignore"):
                out = np.log([self._pdf_scalar(v) for v in y])
        return np.asarray(out).reshape(shape)[()]

    def cdf(self, y):
        shape = np.shape(y)
        y = np.atleast_1d(np.asarray(y, dtype=float)).reshape(-1)
        out = np.empty(y.size)
        fin = np.isfinite(y)
        out[~fin] = np.where(y[~fin] > 0, 1.0, 0.0)
        if fin.any():
            if self._base is not None:
                vals = self._batched(self._log_of(self._base.cdf), y[fin])
            else:
                vals = [self._integrate(lambda x: float(self.family(x).cdf(v)) * float(self.mixing.pdf(x)))
                        for v in y[fin]]
            out[fin] = vals
        return np.clip(out, 0.0, 1.0).reshape(shape)[()]

    def sf(self, y):
        if self._base is None:
            return 1.0 - self.cdf(y)
        shape = np.shape(y)
        y = np.atleast_1d(np.asarray(y, dtype=float)).reshape(-1)
        out = np.empty(y.size)
        fin = np.isfinite(y)
        out[~fin] = np.where(y[~fin] < 0, 1.0, 0.0)
        if fin.any():
            out[fin] = self._batched(self._log_of(self._base.sf), y[fin])
        return np.clip(out, 0.0, 1.0).reshape(shape)[()]

    def _quantile_bracket(self, p):
        if self._base is not None:
            # P(X + Y <= qx(p/2) + qy(p/2)) <= p, and symmetrically above
            lo = self.mixing.quantile(0.5 * p) + self._base.quantile(0.5 * p)
            up = 1.0 - 0.5 * (1.0 - p)
            hi = self.mixing.quantile(up) + self._base.quantile(up)
            return np.atleast_1d(lo), np.atleast_1d(hi)
        comps = [self.family(x) for x in self._trunc]
        qs = np.array([np.atleast_1d(c.quantile(p)) for c in comps])
        lo, hi = qs.min(axis=0), qs.max(axis=0)
        width = float(np.max(hi - lo)) or 1.0
        lo, _ = expand_bracket(self.cdf, p, lo, width)
        _, hi = expand_bracket(self.cdf, p, hi, width)
        return lo, hi

    def sample(self, rng, n):
        xs = self.mixing.sample(rng, n)
        if self._base is not None:
            return xs + self._base.sample(rng, n)
        return np.array([float(self.family(x).sample(rng, 1)[0]) for x in xs])
