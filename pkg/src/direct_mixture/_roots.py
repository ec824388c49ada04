"""Bracketing and bisection helpers shared by quantile inversion and the grid search."""

import numpy as np


class BracketError(RuntimeError):
    """No sign change could be bracketed within the allowed expansions."""


def invert_increasing(func, target, lo, hi, ftol=1e-12, maxiter=400):
    """Vectorised bisection for ``func(x) == target`` with ``func`` non-decreasing.

    ``lo`` and ``hi`` must bracket the solution elementwise, i.e.
    ``func(lo) <= target <= func(hi)``.  Iteration stops per element once
    ``|func(mid) - target| <= ftol`` or the bracket has collapsed to adjacent
    floating point numbers.  ``ftol`` may be an array broadcastable to
    ``target``.
    """
    shape = np.shape(target)
    target = np.atleast_1d(np.asarray(target, dtype=float))
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    ftol = np.broadcast_to(np.asarray(ftol, dtype=float), target.shape)
    out = np.full(target.shape, np.nan)
    active = np.ones(target.shape, dtype=bool)
    for _ in range(maxiter):
        if not active.any():
            break
        mid = 0.5 * (lo[active] + hi[active])
        fm = np.asarray(func(mid), dtype=float)
        t = target[active]
        done = (np.abs(fm - t) <= ftol[active]) | (mid <= lo[active]) | (mid >= hi[active])
        idx = np.flatnonzero(active)
        out[idx[done]] = mid[done]
        below = fm < t
        lo[idx[~done & below]] = mid[~done & below]
        hi[idx[~done & ~below]] = mid[~done & ~below]
        active[idx[done]] = False
    if active.any():
        out[active] = 0.5 * (lo[active] + hi[active])
    return out.reshape(shape)


def expand_bracket(func, target, center, width, lower=-np.inf, upper=np.inf, max_expansions=200):
    """Grow brackets ``[lo, hi]`` around ``func(x) == target`` for non-decreasing ``func``.

    Works elementwise on ``target``; ``width`` doubles on every expansion.
    Bracket ends are clipped to ``[lower, upper]``.
    """
    shape = np.shape(target)
    target = np.atleast_1d(np.asarray(target, dtype=float))
    lo = np.broadcast_to(np.asarray(center, dtype=float), target.shape).copy()
    hi = lo.copy()
    step = np.full(target.shape, float(width))
    for _ in range(max_expansions):
        bad = func(lo) > target
        if not bad.any():
            break
        lo[bad] = np.maximum(lo[bad] - step[bad], lower)
        step[bad] *= 2.0
    else:
        raise BracketError("could not bracket the target from below")
    step[:] = float(width)
    for _ in range(max_expansions):
        bad = func(hi) < target
        if not bad.any():
            break
        hi[bad] = np.minimum(hi[bad] + step[bad], upper)
        step[bad] *= 2.0
    else:
        raise BracketError("could not bracket the target from above")
    return lo.reshape(shape), hi.reshape(shape)
