"""Directed and symmetrised Kullback-Leibler divergences.

Closed forms cover pairs of normal distributions; any other pair goes through
adaptive quadrature of ``(log p - log q) * p`` over the central range of ``p``.
All values are in nats.
"""

from dataclasses import dataclass
import math

import numpy as np


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class SupportMismatchError(ValueError):
    """``q`` vanishes where ``p`` still carries probability mass."""


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    tail_prob: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if not 0 < self.tail_prob < 0.01:
            raise ValueError("tail_prob must lie in (0, 0.01)")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_SETTINGS = QuadratureSettings()


def _check_scales(*sigmas):
    for s in sigmas:
        if not s > 0:
            raise ValueError(f"scale parameters must be positive, got {s}")


def kl_normal(mu_a, sigma_a, mu_b, sigma_b):
    """KL divergence of ``N(mu_a, sigma_a^2)`` from ``N(mu_b, sigma_b^2)``."""
    _check_scales(sigma_a, sigma_b)
    ratio = (sigma_a / sigma_b) ** 2
    return 0.5 * ((mu_a - mu_b) ** 2 / sigma_b**2 + ratio - math.log(ratio) - 1.0)


def sym_kl_normal(mu_a, sigma_a, mu_b, sigma_b):
    """Symmetrised KL divergence between two normal distributions."""
    _check_scales(sigma_a, sigma_b)
    va, vb = sigma_a**2, sigma_b**2
    return (mu_a - mu_b) ** 2 * 0.5 * (1.0 / va + 1.0 / vb) + (va - vb) ** 2 / (2.0 * va * vb)


# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]; nodes are
# listed for x >= 0, the odd-indexed ones are the Gauss nodes.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:15:2] = _WG[2::-1]

_EPMACH = np.finfo(float).eps


def _gk15_rules(f, h):
    """Kronrod estimate and QUADPACK-style error estimate from node values ``f`` per panel."""
    resk = h * (f @ KRONROD_WEIGHTS)
    resg = h * (f @ GAUSS_WEIGHTS)
    resabs = np.abs(h) * (np.abs(f) @ KRONROD_WEIGHTS)
    mean = np.where(h != 0, resk / np.where(h != 0, 2.0 * h, 1.0), 0.0)
    resasc = np.abs(h) * (np.abs(f - mean[:, None]) @ KRONROD_WEIGHTS)
    err = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    err = np.maximum(err, 50.0 * _EPMACH * resabs)
    return resk, err


def integrate_gk_many(func, a, b, owner, n, rel_tol, abs_tol, max_subdivisions, tag=None):
    """Adaptive Gauss-Kronrod quadrature of ``n`` independent integrals at once.

    Panel ``[a[j], b[j]]`` belongs to integral ``owner[j]`` and carries an
    integer ``tag[j]`` (default 0) that bisection passes on to both halves;
    ``func(x, owner, tag)`` evaluates the integrands at the given nodes.  Every integral
    has its own tolerance ``max(abs_tol, rel_tol * |value|)``.  Each round
    bisects, per integral, the largest-error panels beyond a set of smallest
    ones whose errors sum to half the tolerance, all owners in one batch.

    Returns ``(values, error_estimates)``.  Raises :class:`QuadratureError`
    when some integral would need more than ``max_subdivisions`` panels.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    owner = np.asarray(owner, dtype=np.intp)
    tag = np.zeros(owner.size, dtype=np.intp) if tag is None else np.asarray(tag, dtype=np.intp)
    m = KRONROD_NODES.size

    def evaluate(pa, pb, po, pt):
        c = 0.5 * (pa + pb)
        h = 0.5 * (pb - pa)
        x = c[:, None] + h[:, None] * KRONROD_NODES[None, :]
        f = np.asarray(func(x.ravel(), np.repeat(po, m), np.repeat(pt, m)), dtype=float)
        return _gk15_rules(f.reshape(x.shape), h)

    val, err = evaluate(a, b, owner, tag)
    while True:
        total = np.bincount(owner, val, minlength=n)
        total_err = np.bincount(owner, err, minlength=n)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        open_ = total_err > tol
        if not open_.any():
            return total, total_err
        width = b - a
        # split every panel outside the smallest-error set whose errors sum to tol / 2
        # (errors are scaled by their tolerance and capped so that the running
        # sum across owners keeps enough precision near the 1/2 threshold)
        r = np.where(open_[owner], np.minimum(err / tol[owner], 1e3), 0.0)
        order = np.lexsort((r, owner))
        csum = np.cumsum(r[order])
        start = np.concatenate([[0], np.cumsum(np.bincount(owner, minlength=n))[:-1]])
        first = np.concatenate([[0.0], csum])[start[owner[order]]]
        split = np.empty(owner.size, dtype=bool)
        split[order] = (csum - first) > 0.5
        split &= open_[owner]
        tiny = width <= 4.0 * _EPMACH * np.maximum(np.abs(a), np.abs(b))
        split &= ~tiny
        stuck = open_ & (np.bincount(owner, split, minlength=n) == 0)
        if stuck.any():
            # round-off limited; accept if the estimate is not far off
            if np.any(total_err[stuck] > 1e3 * tol[stuck]):
                i = int(np.flatnonzero(stuck & (total_err > 1e3 * tol))[0])
                raise QuadratureError(
                    f"round-off prevents reaching tolerance {tol[i]:.3g} (estimate {total_err[i]:.3g})")
            if not split.any():
                return total, total_err
        counts = np.bincount(owner, minlength=n) + np.bincount(owner, split, minlength=n)
        if counts.max() > max_subdivisions:
            i = int(np.argmax(counts))
            raise QuadratureError(
                f"more than {max_subdivisions} subdivisions needed "
                f"(error {total_err[i]:.3g} > {tol[i]:.3g})")
        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        no = np.concatenate([owner[split], owner[split]])
        nt = np.concatenate([tag[split], tag[split]])
        nv, ne = evaluate(na, nb, no, nt)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        owner = np.concatenate([owner[keep], no])
        tag = np.concatenate([tag[keep], nt])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def integrate_gk(func, breaks, rel_tol, abs_tol, max_subdivisions):
    """Globally adaptive Gauss-Kronrod quadrature of a vectorised ``func``.

    ``breaks`` is an increasing sequence of panel edges.  All panels whose
    error estimate exceeds their share of the tolerance are bisected together,
    so ``func`` is called on whole batches of nodes.

    Returns ``(value, error_estimate)``; raises :class:`QuadratureError` once
    more than ``max_subdivisions`` panels would be needed.
    """
    edges = np.asarray(breaks, dtype=float)
    owner = np.zeros(edges.size - 1, dtype=np.intp)
    val, err = integrate_gk_many(lambda x, _o, _t: func(x), edges[:-1], edges[1:], owner, 1,
                                 rel_tol, abs_tol, max_subdivisions)
    return float(val[0]), float(err[0])


def _integration_range(p, tail_prob):
    lo, hi = (float(v) for v in p.quantile(np.array([tail_prob, 1.0 - tail_prob])))
    s_lo, s_hi = p.support
    return max(lo, s_lo), min(hi, s_hi)


def kl_numeric(p, q, settings=DEFAULT_SETTINGS):
    """Directed divergence ``D_KL(p || q)`` by adaptive Gauss-Kronrod quadrature.

    The integral runs over ``p``'s central range between the ``tail_prob`` and
    ``1 - tail_prob`` quantiles, split at the quartiles.  Points where ``p``
    has zero density contribute nothing.

    Raises
    ------
    SupportMismatchError
        If ``q`` has zero density at a point where ``p`` is positive.
    QuadratureError
        If the subdivision limit is exhausted.
    """
    a, b = _integration_range(p, settings.tail_prob)
    inner = [float(v) for v in np.atleast_1d(p.quantile(np.array([0.25, 0.5, 0.75])))]
    breaks = [a, *(v for v in inner if a < v < b), b]

    def integrand(y):
        lp = np.asarray(p.log_pdf(y), dtype=float)
        lq = np.asarray(q.log_pdf(y), dtype=float)
        live = lp > -np.inf
        bad = live & (lq == -np.inf)
        if bad.any():
            raise SupportMismatchError(
                f"q has zero density at y={y[bad][0]} where p is positive")
        out = np.zeros_like(lp)
        out[live] = (lp[live] - lq[live]) * np.exp(lp[live])
        return out

    value, _ = integrate_gk(integrand, breaks, settings.rel_tol, settings.abs_tol,
                            settings.max_subdivisions)
    return value


def sym_kl_numeric(p, q, settings=DEFAULT_SETTINGS):
    """Symmetrised divergence ``D_KL(p || q) + D_KL(q || p)``."""
    return kl_numeric(p, q, settings) + kl_numeric(q, p, settings)
