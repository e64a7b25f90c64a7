"""Standard-normal kernels and a safeguarded root finder for monotone functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as _sp

from .errors import BracketError, DomainError, MaxIterationsError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def std_normal_cdf(x):
    """Standard normal CDF, elementwise. Saturates to 0/1 in the far tails."""
    return _out(_sp.ndtr(x))


def std_normal_sf(x):
    """Upper tail 1 - Φ(x), without cancellation for large x."""
    return _out(_sp.ndtr(np.negative(x)))


def log_std_normal_cdf(x):
    """log Φ(x), accurate deep into the lower tail."""
    return _out(_sp.log_ndtr(x))


def log_std_normal_cdf_diff(a, b):
    """log(Φ(a) - Φ(b)) for a > b, computed on whichever tail loses no precision."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # both in the upper half: Φ(a) - Φ(b) = Φ(-b) - Φ(-a)
    upper = b >= 0
    hi = np.where(upper, -b, a)
    lo = np.where(upper, -a, b)
    log_hi = _sp.log_ndtr(hi)
    log_lo = _sp.log_ndtr(lo)
    with np.errstate(divide="ignore"):
        res = log_hi + np.log1p(-np.exp(log_lo - log_hi))
    return _out(res)


def std_normal_quantile(p):
    """Inverse of the standard normal CDF.

    Raises DomainError unless every ``p`` lies strictly inside (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("normal quantile is undefined outside the open interval (0, 1)")
    return _out(_sp.ndtri(arr))


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise DomainError("bracket tolerance must be positive")
        if self.max_iter <= 0:
            raise DomainError("max_iter must be positive")


def find_root_increasing(
    f: Callable[[float], float],
    bracket: RootBracket | tuple[float, float],
    *,
    ftol: float = 0.0,
) -> float:
    """Root of a continuous nondecreasing ``f`` on a bracket with f(lo) <= 0 <= f(hi).

    Illinois-modified regula falsi, with a bisection step whenever an
    interpolation step fails to halve the bracket. Stops once the bracket is
    no wider than ``bracket.tol`` (or ``|f| <= ftol``) and returns its midpoint.
    """
    if not isinstance(bracket, RootBracket):
        bracket = RootBracket(*bracket)
    lo, hi = float(bracket.lo), float(bracket.hi)
    flo, fhi = f(lo), f(hi)
    if flo > 0 and fhi > 0 or flo < 0 and fhi < 0:
        raise BracketError(f"f(lo)={flo:.6g} and f(hi)={fhi:.6g} have the same sign")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo > 0:
        # decreasing orientation was passed in; the contract is f(lo) <= 0
        raise BracketError(f"expected f(lo) <= 0 <= f(hi), got {flo:.6g}, {fhi:.6g}")

    side = 0
    for _ in range(bracket.max_iter):
        width = hi - lo
        if width <= bracket.tol:
            return 0.5 * (lo + hi)
        if math.isfinite(flo) and math.isfinite(fhi):
            x = (lo * fhi - hi * flo) / (fhi - flo)
            if not lo < x < hi:
                x = 0.5 * (lo + hi)
        else:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if fx == 0 or abs(fx) <= ftol:
            return x
        if fx < 0:
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
        if hi - lo > 0.5 * width:
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0:
                return mid
            if fm < 0:
                lo, flo = mid, fm
            else:
                hi, fhi = mid, fm
            side = 0
    if hi - lo <= bracket.tol:
        return 0.5 * (lo + hi)
    raise MaxIterationsError(
        f"bracket width {hi - lo:.3g} still above tol {bracket.tol:.3g} "
        f"after {bracket.max_iter} iterations"
    )
