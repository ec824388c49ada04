"""Checks on a constructed approximation.

* per-bin dense scans of the conditional divergence against the bin's
  reference point,
* the divergence between the exact marginal and the finite mixture,
* Monte-Carlo Q-Q comparison,
* brute-force evaluation of the relative-entropy chain rule on discrete tables.
"""

import csv
from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np

from .divergence import DEFAULT_SETTINGS, sym_kl_numeric

#: relative slack on delta allowed by the certification scan
CERT_SLACK = 1e-3


@dataclass(frozen=True)
class BinCertificate:
    index: int
    d_max: float
    argmax: float
    lower: float
    upper: float
    passed: bool


def certify_bins(grid, family, delta, scan_points=256, slack=CERT_SLACK):
    """Scan each bin and report the largest divergence to its reference point.

    ``scan_points`` equally spaced latent values per bin include both ends of
    the bin (for the outer bins, the ends of the covered range).  A bin passes
    if its maximum is at most ``delta * (1 + slack)``.
    """
    if scan_points < 2:
        raise ValueError("scan_points must be at least 2")
    out = []
    for i, ref in enumerate(grid.reference_points):
        lo, hi = grid.bin_bounds(i)
        xs = np.unique(np.append(np.linspace(lo, hi, scan_points), ref)) if hi > lo else np.array([ref])
        ds = np.array([family.sym_divergence(x, ref) for x in xs])
        j = int(np.argmax(ds))
        d = max(float(ds[j]), 0.0)
        out.append(BinCertificate(i, d, float(xs[j]), lo, hi, d <= delta * (1.0 + slack)))
    return out


def all_passed(certificates):
    return all(c.passed for c in certificates)


def marginal_divergence(true_marginal, approx, settings=DEFAULT_SETTINGS):
    """Symmetrised divergence between the exact marginal and its approximation."""
    return sym_kl_numeric(true_marginal, approx, settings)


@dataclass
class QQReport:
    levels: np.ndarray
    computed: np.ndarray
    simulated: np.ndarray
    se: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.levels) <= 0) or np.any((self.levels <= 0) | (self.levels >= 1)):
            raise ValueError("levels must be strictly increasing inside (0, 1)")

    @property
    def z(self):
        """Standardised discrepancy ``(computed - simulated) / se`` per level."""
        return (self.computed - self.simulated) / self.se

    def rows(self):
        return zip(self.levels, self.computed, self.simulated, self.se)

    def write_csv(self, fh):
        w = csv.writer(fh)
        w.writerow(["level", "computed", "simulated", "se"])
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])


def qq_compare(approx, samples, levels):
    """Compare quantiles of ``approx`` with empirical order statistics.

    The standard error of the empirical ``p``-quantile is the asymptotic
    ``sqrt(p (1 - p) / n) / f(q)`` with ``f`` the approximation's density.
    """
    samples = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    n = samples.size
    if n == 0:
        raise ValueError("no samples")
    levels = np.asarray(levels, dtype=float).reshape(-1)
    computed = np.atleast_1d(approx.quantile(levels))
    simulated = np.quantile(samples, levels, method="inverted_cdf")
    dens = np.atleast_1d(approx.pdf(computed))
    se = np.sqrt(levels * (1.0 - levels) / n) / dens
    return QQReport(levels, computed, simulated, se)


class ChainRule(NamedTuple):
    """Both sides of the chain rule, for directed and symmetrised divergences."""

    kl_joint: float
    kl_decomposed: float
    sym_joint: float
    sym_decomposed: float


def _kl_table(p, q):
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def chain_rule_check(joint_p, joint_q):
    """Evaluate the relative-entropy chain rule by exhaustive summation.

    Tables are indexed ``[latent, outcome]``.  The directed identity is
    ``KL(p(x,y)||q(x,y)) = KL(p(x)||q(x)) + E_p(x)[KL(p(y|x)||q(y|x))]``; the
    symmetrised one adds the mirror image with the roles of ``p`` and ``q``
    swapped, which reduces to ``D_s(p(x)||q(x)) + E_p(x)[D_s(p(y|x)||q(y|x))]``
    when the latent marginals coincide.
    """
    p = np.asarray(joint_p, dtype=float)
    q = np.asarray(joint_q, dtype=float)
    if p.shape != q.shape or p.ndim != 2:
        raise ValueError("joint tables must be 2-d with equal shapes")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probabilities must be non-negative")
    if np.any((p > 0) != (q > 0)):
        raise ValueError("joint tables have mismatched zero-probability cells")
    p = p / p.sum()
    q = q / q.sum()
    px, qx = p.sum(axis=1), q.sum(axis=1)

    def expected_conditional(a, b, ax):
        total = 0.0
        for i in range(a.shape[0]):
            if ax[i] > 0:
                total += ax[i] * _kl_table(a[i] / a[i].sum(), b[i] / b[i].sum())
        return total

    kl_pq = _kl_table(p.ravel(), q.ravel())
    kl_qp = _kl_table(q.ravel(), p.ravel())
    kl_dec = _kl_table(px, qx) + expected_conditional(p, q, px)
    kl_dec_rev = _kl_table(qx, px) + expected_conditional(q, p, qx)
    return ChainRule(kl_pq, kl_dec, kl_pq + kl_qp, kl_dec + kl_dec_rev)


def expected_conditional_sym(joint_p, joint_q):
    """``E_p(x)[D_s(p(y|x)||q(y|x))]``, the joint divergence when latent marginals agree."""
    p = np.asarray(joint_p, dtype=float)
    q = np.asarray(joint_q, dtype=float)
    p = p / p.sum()
    q = q / q.sum()
    px = p.sum(axis=1)
    total = 0.0
    for i in range(p.shape[0]):
        a, b = p[i] / p[i].sum(), q[i] / q[i].sum()
        total += px[i] * (_kl_table(a, b) + _kl_table(b, a))
    return total


def qq_levels(tail=1e-3):
    """Default Q-Q probability levels from ``tail`` to ``1 - tail``."""
    inner = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99]
    return np.array(sorted({tail, *inner, 1.0 - tail}))


def max_certified(certificates):
    return max((c.d_max for c in certificates), default=math.nan)
