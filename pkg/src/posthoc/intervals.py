"""Post-hoc confidence intervals, the Wald baseline, and a generic e-value inverter.

Each interval is the set {θ : E(θ) < K/α} for an e-variable E (K = 2 for the
compound IWR and REG constructions, 1 otherwise), written in closed form as
X̄ ± W. Membership is strict, so a zero half-width interval contains nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EmptyIntervalError, InsufficientSamplesError, NoRootError
from .evalues import MixParams, RwsParams, RWS_TRUNC_EXP, log_i_r_kernel
from .special import RootBracket, find_root_increasing, std_normal_quantile
from .summary import SampleSummary, update

BOUNDED = "bounded"
REAL_LINE = "real_line"
EMPTY = "empty"

Y_STAR_TOL = 1e-12
Y_STAR_CAP = 1e6


@dataclass(frozen=True)
class Interval:
    kind: str
    lo: float = -math.inf
    hi: float = math.inf
    flags: tuple[str, ...] = ()

    @classmethod
    def around(cls, center: float, half_width: float, flags=()) -> "Interval":
        return cls(BOUNDED, center - half_width, center + half_width, tuple(flags))

    @classmethod
    def real_line(cls, flags=()) -> "Interval":
        return cls(REAL_LINE, -math.inf, math.inf, tuple(flags))

    @classmethod
    def empty(cls, center: float = math.nan, flags=()) -> "Interval":
        return cls(EMPTY, center, center, tuple(flags))

    @property
    def vacuous(self) -> bool:
        return self.kind == REAL_LINE

    @property
    def width(self) -> float:
        if self.kind == REAL_LINE:
            return math.inf
        if self.kind == EMPTY:
            return 0.0
        return self.hi - self.lo

    def contains(self, theta: float) -> bool:
        if self.kind == REAL_LINE:
            return True
        if self.kind == EMPTY:
            return False
        return self.lo < theta < self.hi

    def is_subset_of(self, other: "Interval") -> bool:
        if self.kind == EMPTY or other.kind == REAL_LINE:
            return True
        if other.kind == EMPTY or self.kind == REAL_LINE:
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    def with_flags(self, *flags: str) -> "Interval":
        return replace(self, flags=self.flags + tuple(flags))


def _check_alpha(alpha):
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")


# ---------------------------------------------------------------------- Wald


def ci_wald(summary: SampleSummary, alpha: float) -> Interval:
    """X̄ ± z_{1-α/2} σ̂/√n. Not post-hoc valid; kept as the baseline."""
    if summary.n < 2:
        raise InsufficientSamplesError("Wald interval needs n >= 2")
    if not 0 < alpha < 1:
        raise DomainError(f"Wald interval needs alpha in (0, 1), got {alpha}")
    z = std_normal_quantile(1.0 - alpha / 2.0)
    return Interval.around(summary.mean, z * summary.sigma_hat / math.sqrt(summary.n))


# ---------------------------------------------------------------------- IWR


def anchor_lambda(alpha0: float) -> float:
    """λ₀ = √(2 log(2/α₀)), the minimizer of the IWR width at level α₀."""
    _check_alpha(alpha0)
    if alpha0 >= 2:
        raise DomainError("anchor needs alpha0 < 2")
    return math.sqrt(2.0 * math.log(2.0 / alpha0))


def width_factor(lam: float, alpha: float) -> float:
    """g(λ, α) = log(2/α)/λ + λ/2."""
    return math.log(2.0 / alpha) / lam + lam / 2.0


def anchor_ratio(alpha: float, alpha0: float) -> float:
    """Asymptotic IWR width at anchor α₀ relative to the width tuned to α."""
    _check_alpha(alpha)
    _check_alpha(alpha0)
    if alpha >= 2 or alpha0 >= 2:
        raise DomainError("anchor ratio needs alpha, alpha0 < 2")
    q = math.log(2.0 / alpha) / math.log(2.0 / alpha0)
    return 0.5 * (math.sqrt(q) + 1.0 / math.sqrt(q))


def _iwr_a(n, alpha, lam):
    return (math.log(2.0 / alpha) + lam * lam / 2.0) / (lam * math.sqrt(n))


def ci_iwr(summary: SampleSummary, alpha: float, lam: float) -> Interval:
    """Compound (K=2) IWR interval: X̄ ± A ŝ/√(1 - A²), vacuous once A >= 1."""
    _check_alpha(alpha)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    n = summary.n
    if n < 2:
        return Interval.real_line()
    a = _iwr_a(n, alpha, lam)
    if a <= 0:
        return Interval.empty(summary.mean)
    if a >= 1:
        return Interval.real_line()
    return Interval.around(summary.mean, a * summary.s_hat / math.sqrt(1.0 - a * a))


# ------------------------------------------------------------------ mixtures


@lru_cache(maxsize=4096)
def _y_star(alpha: float, r: float, kappa: float) -> float:
    p = MixParams(r, kappa)
    u = p.u
    log_target = math.log(p.normalizer) - math.log(alpha)
    if log_target <= log_i_r_kernel(0.0, u, r):
        raise NoRootError(
            f"alpha={alpha:g} puts the threshold at or below the minimum of the mixture"
        )

    def f(y):
        return log_i_r_kernel(y, u, r) - log_target

    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
        if hi > Y_STAR_CAP:
            raise NoRootError("y* bracket exceeded its cap")
    return find_root_increasing(f, RootBracket(0.0, hi, tol=Y_STAR_TOL * max(1.0, hi)))


def solve_y_star(alpha: float, p: MixParams = MixParams()) -> float:
    """Positive root of I_R(y, (κ²+1)/(2κ²)) = Z_{R,κ}/α."""
    _check_alpha(alpha)
    return _y_star(float(alpha), float(p.r), float(p.kappa))


def ci_mix_iwr(summary: SampleSummary, alpha: float, p: MixParams = MixParams()) -> Interval:
    """X̄ ± ŝ y*/√(n - y*²)."""
    _check_alpha(alpha)
    n = summary.n
    if n < 2:
        return Interval.real_line()
    try:
        y = solve_y_star(alpha, p)
    except NoRootError:
        return Interval.empty(summary.mean, flags=("no_root",))
    den = n - y * y
    if den <= 0:
        return Interval.real_line()
    return Interval.around(summary.mean, summary.s_hat * y / math.sqrt(den))


def ci_mix_reg(summary: SampleSummary, alpha: float, p: MixParams = MixParams(),
               eta: float = 1e-3) -> Interval:
    """X̄ ± √n ŝ y*(1 + ηD)/(n - (ηy*)²) with D = √(1 + y*²(1-η²)/n)."""
    _check_alpha(alpha)
    if not eta > 0:
        raise DomainError("eta must be positive")
    n = summary.n
    if n < 2:
        return Interval.real_line()
    try:
        y = solve_y_star(alpha, p)
    except NoRootError:
        return Interval.empty(summary.mean, flags=("no_root",))
    den = n - (eta * y) ** 2
    if den <= 0:
        return Interval.real_line()
    d = math.sqrt(1.0 + y * y * (1.0 - eta * eta) / n)
    return Interval.around(summary.mean, math.sqrt(n) * summary.s_hat * y * (1.0 + eta * d) / den)


# ---------------------------------------------------------------------- R-WS


def _robbins_half_width(k: int, u_hat: float, rho: float, alpha: float) -> float | None:
    log_term = 0.5 * math.log1p(rho * u_hat) - math.log(alpha)
    if log_term <= 0:
        return None
    return math.sqrt((2.0 * rho * u_hat + 2.0) / (k * k * rho) * log_term)


def ci_rws(summary: SampleSummary, alpha: float, p: RwsParams = RwsParams()) -> Interval:
    """X̄ ± W with W² = (2ρû+2)/(n²ρ)·log(√(ρû+1)/α) and û = n(ŝ² + 1/log n).

    Vacuous while the truncation level C·n^(0.24δ) is below 1/α.
    """
    _check_alpha(alpha)
    n = summary.n
    if n < 2:
        return Interval.real_line()
    if p.log_truncation(n) < -math.log(alpha):
        return Interval.real_line(flags=("truncated",))
    u_hat = n * (summary.biased_var + 1.0 / math.log(n))
    w = _robbins_half_width(n, u_hat, p.rho, alpha)
    if w is None:
        return Interval.empty(summary.mean)
    return Interval.around(summary.mean, w)


@dataclass(frozen=True)
class ConfSeqHandle:
    """Running state of the post-hoc mixture confidence sequence after burn-in ``m``.

    The guarantee covers α above the range floor f(m) = range_c·m^(-0.24).
    """

    m: int
    summary: SampleSummary
    params: RwsParams = field(default_factory=RwsParams)
    range_c: float = 0.01

    def __post_init__(self):
        if self.m < 2:
            raise DomainError("burn-in m must be at least 2")
        if self.summary.n < self.m:
            raise DomainError(f"confidence sequence starts at k = m = {self.m}, got k = {self.summary.n}")

    @classmethod
    def start(cls, data: Sequence[float], m: int, params: RwsParams = RwsParams(),
              range_c: float = 0.01) -> "ConfSeqHandle":
        from .summary import summarize

        if len(data) < m:
            raise InsufficientSamplesError(f"need {m} burn-in observations, got {len(data)}")
        return cls(m, summarize(np.asarray(data[:m], dtype=float)), params, range_c)

    @property
    def k(self) -> int:
        return self.summary.n

    @property
    def range_floor(self) -> float:
        return self.range_c * self.m ** (-RWS_TRUNC_EXP)

    def advance(self, x: float) -> "ConfSeqHandle":
        return replace(self, summary=update(self.summary, float(x)))


def cs_rws(handle: ConfSeqHandle, alpha: float) -> Interval:
    """X̄_k ± √((2ρû+2)/(k²ρ)·log(√(ρû+1)/α)) with û = k(ŝ_k² + 1/log m)."""
    _check_alpha(alpha)
    k, m, rho = handle.k, handle.m, handle.params.rho
    if k < m:
        raise DomainError("k must be at least m")
    s = handle.summary
    u_hat = k * (s.biased_var + 1.0 / math.log(m))
    flags = ("out_of_range",) if alpha <= handle.range_floor else ()
    w = _robbins_half_width(k, u_hat, rho, alpha)
    if w is None:
        return Interval.empty(s.mean, flags=flags)
    return Interval.around(s.mean, w, flags=flags)


# ----------------------------------------------------------------------- REG


def ci_reg(summary: SampleSummary, alpha: float, lam: float, eta: float = 1e-3) -> Interval:
    """Compound (K=2) REG interval X̄ ± Aσ̂(1 + √B)/(1 - A²η²)."""
    _check_alpha(alpha)
    if not (lam > 0 and eta > 0):
        raise DomainError("lambda and eta must be positive")
    n = summary.n
    if n < 2:
        return Interval.real_line()
    a = _iwr_a(n, alpha, lam)
    if a <= 0:
        return Interval.empty(summary.mean)
    aa = (a * eta) ** 2
    if aa >= 1:
        return Interval.real_line()
    b = 1.0 - (1.0 - aa) * (1.0 - eta * eta * (n - 1) / n)
    return Interval.around(summary.mean, a * summary.sigma_hat * (1.0 + math.sqrt(b)) / (1.0 - aa))


# ------------------------------------------------------------ generic inverter


def invert_evalue(
    e_fn: Callable[[float], float] | Sequence[Callable[[float], float]],
    center: float,
    alpha: float,
    two_sided_k: int | None = None,
    scale: float = 1.0,
    max_doublings: int = 400,
) -> Interval:
    """Numerically solve {θ : max_j E_j(θ) < K/α} around the minimizer ``center``.

    ``e_fn`` is one e-variable or a sequence of compound components; K defaults
    to the number of components. Each side is bracketed by doubling from
    ``scale`` and solved in log space. A side that never reaches the threshold
    makes the result the whole real line.
    """
    _check_alpha(alpha)
    fns = [e_fn] if callable(e_fn) else list(e_fn)
    k = len(fns) if two_sided_k is None else two_sided_k
    if k not in (1, 2):
        raise DomainError("two_sided_k must be 1 or 2")
    log_thr = math.log(k / alpha)

    def g(theta):
        vals = [fn(theta) for fn in fns]
        with np.errstate(divide="ignore"):
            return float(np.log(max(vals))) - log_thr

    if g(center) >= 0:
        raise EmptyIntervalError("e-value minimum already reaches the threshold K/alpha")

    ends = []
    for sign in (-1.0, 1.0):
        def h(t, sign=sign):
            return g(center + sign * t)

        hi = scale
        for _ in range(max_doublings):
            if h(hi) >= 0:
                break
            hi *= 2.0
        else:
            return Interval.real_line()
        tol = 1e-13 * max(hi, abs(center))
        t = find_root_increasing(h, RootBracket(0.0, hi, tol=tol, max_iter=400))
        ends.append(center + sign * t)
    return Interval(BOUNDED, ends[0], ends[1])


# ----------------------------------------------------------- method registry

METHODS = ("wald", "iwr", "mix-iwr", "rws", "reg", "mix-reg")


@dataclass(frozen=True)
class Method:
    """A named interval family with fixed (α-independent) tuning parameters."""

    name: str
    lam: float | None = None
    r: float = 20.0
    kappa: float = 1.0
    rho: float = 2.0
    delta: float = 1.0
    c: float = 100.0
    eta: float = 1e-3
    label: str | None = None

    def __post_init__(self):
        if self.name not in METHODS:
            raise DomainError(f"unknown method {self.name!r}; choose from {', '.join(METHODS)}")
        if self.name in ("iwr", "reg") and self.lam is None:
            raise DomainError(f"method {self.name} needs lambda")

    @property
    def key(self) -> str:
        return self.label or self.name

    @property
    def mix(self) -> MixParams:
        return MixParams(self.r, self.kappa)

    @property
    def rws(self) -> RwsParams:
        return RwsParams(self.rho, self.delta, self.c)

    def params(self) -> dict:
        if self.name in ("iwr",):
            return {"lambda": self.lam}
        if self.name == "reg":
            return {"lambda": self.lam, "eta": self.eta}
        if self.name == "mix-iwr":
            return {"r": self.r, "kappa": self.kappa}
        if self.name == "mix-reg":
            return {"r": self.r, "kappa": self.kappa, "eta": self.eta}
        if self.name == "rws":
            return {"rho": self.rho, "delta": self.delta, "c": self.c}
        return {}

    def interval(self, summary: SampleSummary, alpha: float) -> Interval:
        if self.name == "wald":
            return ci_wald(summary, alpha)
        if self.name == "iwr":
            return ci_iwr(summary, alpha, self.lam)
        if self.name == "mix-iwr":
            return ci_mix_iwr(summary, alpha, self.mix)
        if self.name == "rws":
            return ci_rws(summary, alpha, self.rws)
        if self.name == "reg":
            return ci_reg(summary, alpha, self.lam, self.eta)
        return ci_mix_reg(summary, alpha, self.mix, self.eta)

    __call__ = interval
