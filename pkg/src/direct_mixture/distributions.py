"""Univariate distribution families used as mixing and conditional distributions.

All evaluation methods are vectorised: they accept scalars or array-likes and
return a numpy scalar or array of matching shape.  Densities are computed in
log space first; ``pdf`` is ``exp(log_pdf)``.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from ._roots import expand_bracket, invert_increasing

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# absolute tolerance in probability for cdf inversion by bisection
QUANTILE_PTOL = 1e-12


class MomentUnavailableError(ValueError):
    """Raised when a mean or variance does not exist for the parameters."""


def _check_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0.0) | ~(p < 1.0)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return p


class Distribution(ABC):
    """Common interface of all univariate continuous distributions."""

    #: closed hull of the support, possibly infinite
    support = (-math.inf, math.inf)

    @abstractmethod
    def log_pdf(self, x):
        ...

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    @abstractmethod
    def cdf(self, x):
        ...

    def sf(self, x):
        """Survival function ``1 - cdf(x)``; families override for upper-tail accuracy."""
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        """Invert the cdf by bracketed bisection.

        The tolerance is ``QUANTILE_PTOL`` in probability, tightened
        proportionally in the tails; upper-tail levels invert ``sf``.
        """
        p = _check_prob(p)
        shape = p.shape
        p = p.reshape(-1)
        out = np.empty_like(p)
        lo, hi = self._quantile_bracket(p)
        low = p <= 0.5
        if low.any():
            t = p[low]
            out[low] = invert_increasing(self.cdf, t, lo[low], hi[low], ftol=QUANTILE_PTOL * t)
        if (~low).any():
            t = 1.0 - p[~low]
            out[~low] = invert_increasing(lambda x: -self.sf(x), -t, lo[~low], hi[~low],
                                          ftol=QUANTILE_PTOL * t)
        return out.reshape(shape)[()]

    def _quantile_bracket(self, p):
        center, width = self._bracket_hint()
        lo_s, hi_s = self.support
        return expand_bracket(self.cdf, p, center, width, lo_s, hi_s)

    def _bracket_hint(self):
        return 0.0, 1.0

    @abstractmethod
    def sample(self, rng, n):
        """Draw ``n`` variates using the numpy ``Generator`` ``rng``."""

    @property
    def mean(self):
        raise MomentUnavailableError(f"{self!r} has no mean")

    @property
    def variance(self):
        raise MomentUnavailableError(f"{self!r} has no variance")

    def shifted(self, offset):
        """Distribution of ``Y + offset``."""
        return Shifted(self, float(offset))


def _asarray(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Normal(Distribution):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def log_pdf(self, x):
        z = (_asarray(x) - self.mu) / self.sigma
        return (-0.5 * z * z - LOG_SQRT_2PI - math.log(self.sigma))[()]

    def cdf(self, x):
        return special.ndtr((_asarray(x) - self.mu) / self.sigma)[()]

    def sf(self, x):
        return special.ndtr((self.mu - _asarray(x)) / self.sigma)[()]

    def quantile(self, p):
        return (self.mu + self.sigma * special.ndtri(_check_prob(p)))[()]

    def sample(self, rng, n):
        return rng.normal(self.mu, self.sigma, size=n)

    @property
    def mean(self):
        return self.mu

    @property
    def variance(self):
        return self.sigma**2

    def shifted(self, offset):
        return Normal(self.mu + offset, self.sigma)


@dataclass(frozen=True)
class ChiSquared(Distribution):
    nu: float

    support = (0.0, math.inf)

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    def log_pdf(self, x):
        x = _asarray(x)
        k = 0.5 * self.nu
        with np.errstate(divide="ignore", invalid="ignore"):
            out = special.xlogy(k - 1.0, x) - 0.5 * x - k * math.log(2.0) - special.gammaln(k)
        return np.where(x > 0, out, -np.inf)[()]

    def cdf(self, x):
        x = np.maximum(_asarray(x), 0.0)
        return special.gammainc(0.5 * self.nu, 0.5 * x)[()]

    def sf(self, x):
        x = np.maximum(_asarray(x), 0.0)
        return special.gammaincc(0.5 * self.nu, 0.5 * x)[()]

    def _bracket_hint(self):
        return self.nu, math.sqrt(2.0 * self.nu)

    def sample(self, rng, n):
        return rng.chisquare(self.nu, size=n)

    @property
    def mean(self):
        return float(self.nu)

    @property
    def variance(self):
        return 2.0 * self.nu


@dataclass(frozen=True)
class StudentT(Distribution):
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    def log_pdf(self, x):
        x = _asarray(x)
        nu = self.nu
        const = (special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu)
                 - 0.5 * math.log(nu * math.pi))
        return (const - 0.5 * (nu + 1) * np.log1p(x * x / nu))[()]

    def cdf(self, x):
        return special.stdtr(self.nu, _asarray(x))[()]

    def sf(self, x):
        return special.stdtr(self.nu, -_asarray(x))[()]

    def quantile(self, p):
        return special.stdtrit(self.nu, _check_prob(p))[()]

    def sample(self, rng, n):
        return rng.standard_t(self.nu, size=n)

    @property
    def mean(self):
        if self.nu <= 1:
            raise MomentUnavailableError(f"Student-t mean undefined for nu={self.nu}")
        return 0.0

    @property
    def variance(self):
        if self.nu <= 1:
            raise MomentUnavailableError(f"Student-t variance undefined for nu={self.nu}")
        if self.nu <= 2:
            return math.inf
        return self.nu / (self.nu - 2.0)


@dataclass(frozen=True)
class Logistic(Distribution):
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def log_pdf(self, x):
        z = -np.abs((_asarray(x) - self.loc) / self.scale)
        return (z - 2.0 * np.log1p(np.exp(z)) - math.log(self.scale))[()]

    def cdf(self, x):
        return special.expit((_asarray(x) - self.loc) / self.scale)[()]

    def sf(self, x):
        return special.expit((self.loc - _asarray(x)) / self.scale)[()]

    def quantile(self, p):
        return (self.loc + self.scale * special.logit(_check_prob(p)))[()]

    def sample(self, rng, n):
        return rng.logistic(self.loc, self.scale, size=n)

    @property
    def mean(self):
        return self.loc

    @property
    def variance(self):
        return (math.pi * self.scale) ** 2 / 3.0

    def shifted(self, offset):
        return Logistic(self.loc + offset, self.scale)


@dataclass(frozen=True)
class SkewNormal(Distribution):
    """Azzalini skew-normal with location ``xi``, scale ``omega`` and shape ``alpha``.

    The cdf uses Owen's T function, ``F(x) = Phi(z) - 2 T(z, alpha)``.
    """

    xi: float = 0.0
    omega: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def _delta(self):
        return self.alpha / math.sqrt(1.0 + self.alpha**2)

    def log_pdf(self, x):
        z = (_asarray(x) - self.xi) / self.omega
        out = -0.5 * z * z - LOG_SQRT_2PI - math.log(self.omega)
        if self.alpha != 0:
            out = out + math.log(2.0) + special.log_ndtr(self.alpha * z)
        return out[()]

    def cdf(self, x):
        z = (_asarray(x) - self.xi) / self.omega
        if self.alpha == 0:
            return special.ndtr(z)[()]
        out = special.ndtr(z) - 2.0 * special.owens_t(z, self.alpha)
        return np.clip(out, 0.0, 1.0)[()]

    def sf(self, x):
        # reflection: Y ~ SN(xi, omega, alpha)  <=>  -Y ~ SN(-xi, omega, -alpha)
        return SkewNormal(-self.xi, self.omega, -self.alpha).cdf(-_asarray(x))

    def quantile(self, p):
        if self.alpha == 0:
            return (self.xi + self.omega * special.ndtri(_check_prob(p)))[()]
        return super().quantile(p)

    def _bracket_hint(self):
        return self.mean, self.omega

    def sample(self, rng, n):
        d = self._delta
        u0 = np.abs(rng.standard_normal(n))
        u1 = rng.standard_normal(n)
        return self.xi + self.omega * (d * u0 + math.sqrt(1.0 - d * d) * u1)

    @property
    def mean(self):
        return self.xi + self.omega * self._delta * math.sqrt(2.0 / math.pi)

    @property
    def variance(self):
        return self.omega**2 * (1.0 - 2.0 * self._delta**2 / math.pi)


@dataclass(frozen=True)
class Shifted(Distribution):
    """``base`` translated by ``offset``; the conditional of a location family."""

    base: Distribution
    offset: float

    @property
    def support(self):
        lo, hi = self.base.support
        return lo + self.offset, hi + self.offset

    def log_pdf(self, x):
        return self.base.log_pdf(_asarray(x) - self.offset)

    def cdf(self, x):
        return self.base.cdf(_asarray(x) - self.offset)

    def sf(self, x):
        return self.base.sf(_asarray(x) - self.offset)

    def quantile(self, p):
        return self.base.quantile(p) + self.offset

    def sample(self, rng, n):
        return self.base.sample(rng, n) + self.offset

    @property
    def mean(self):
        return self.base.mean + self.offset

    @property
    def variance(self):
        return self.base.variance

    def shifted(self, offset):
        return Shifted(self.base, self.offset + offset)
