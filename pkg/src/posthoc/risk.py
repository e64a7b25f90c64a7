"""Empirical post-hoc risk, the p-hacking search for α*, and exact asymptotic type-I errors."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, NonNestedError
from .evalues import MixParams
from .intervals import Interval, Method, solve_y_star, width_factor
from .sampling import Generator, draw
from .special import std_normal_sf
from .summary import SampleSummary, summarize

log = logging.getLogger(__name__)

PRACTICAL = "practical"
THEORETICAL = "theoretical"


@dataclass(frozen=True)
class AlphaSearchConfig:
    alpha_min: float = 1e-5
    alpha_max: float = 500.0
    tol: float = 1e-5

    def __post_init__(self):
        if not 0 < self.alpha_min < self.alpha_max:
            raise DomainError("need 0 < alpha_min < alpha_max")
        if not self.tol > 0:
            raise DomainError("tol must be positive")


def alpha_star(ci_fn, theta0: float, cfg: AlphaSearchConfig = AlphaSearchConfig()) -> float | None:
    """Smallest α in [alpha_min, alpha_max] whose interval excludes ``theta0``.

    Bisection to ``cfg.tol``; returns the midpoint of the final bracket, or
    ``alpha_min`` if already rejected there, or None if never rejected.
    """
    def rejected(a):
        return not ci_fn(a).contains(theta0)

    lo, hi = cfg.alpha_min, cfg.alpha_max
    rej_lo, rej_hi = rejected(lo), rejected(hi)
    if rej_lo and not rej_hi:
        raise NonNestedError(f"rejects at alpha={lo:g} but not at alpha={hi:g}")
    if rej_lo:
        return lo
    if not rej_hi:
        return None
    while hi - lo > cfg.tol:
        mid = 0.5 * (lo + hi)
        if rejected(mid):
            hi = mid
        else:
            lo = mid
    log.debug("alpha* bracket [%g, %g], width %g", lo, hi, hi - lo)
    return 0.5 * (lo + hi)


def search_interval(method: Method, summary: SampleSummary, alpha: float) -> Interval:
    """Interval used inside the α* search; Wald has zero width from α = 1 on."""
    if method.name == "wald" and alpha >= 1:
        return Interval.empty(summary.mean)
    return method.interval(summary, alpha)


def sup_ratio_pair(method: Method, summary: SampleSummary, theta0: float,
                   cfg: AlphaSearchConfig = AlphaSearchConfig()) -> tuple[float | None, float | None]:
    """(α* over (0, 1], α* over (0, alpha_max]) for one sample.

    The rejection set in α is an up-set, so when the practical search already
    rejects, both infima coincide and only [1, alpha_max] is searched otherwise.
    """
    def fn(a):
        return search_interval(method, summary, a)

    practical = alpha_star(fn, theta0, AlphaSearchConfig(cfg.alpha_min, 1.0, cfg.tol))
    if practical is not None or cfg.alpha_max <= 1.0:
        return practical, practical
    if not fn(1.0).contains(theta0):
        raise NonNestedError("rejects at alpha=1 after failing to reject on (0, 1]")
    theoretical = alpha_star(fn, theta0, AlphaSearchConfig(1.0, cfg.alpha_max, cfg.tol))
    return None, theoretical


def _inv(a):
    return 0.0 if a is None else 1.0 / a


@dataclass
class RiskReport:
    method: str
    practical_risk: float
    theoretical_risk: float
    practical_se: float
    theoretical_se: float
    n_trials: int
    alpha_stars: list = field(repr=False, default_factory=list)
    practical_alpha_stars: list = field(repr=False, default_factory=list)
    alpha_max: float = 500.0
    tol: float = 1e-5

    @classmethod
    def from_alpha_stars(cls, method: str, practical, theoretical, cfg: AlphaSearchConfig):
        p = np.array([_inv(a) for a in practical])
        t = np.array([_inv(a) for a in theoretical])
        k = len(p)
        se = (lambda v: float(v.std(ddof=1) / math.sqrt(k)) if k > 1 else math.nan)
        return cls(method, float(p.mean()), float(t.mean()), se(p), se(t), k,
                   list(theoretical), list(practical), cfg.alpha_max, cfg.tol)

    @property
    def unrejected(self) -> int:
        """Trials never rejected even at alpha_max."""
        return sum(a is None for a in self.alpha_stars)

    def risk(self, regime: str) -> float:
        return self.practical_risk if regime == PRACTICAL else self.theoretical_risk

    def se(self, regime: str) -> float:
        return self.practical_se if regime == PRACTICAL else self.theoretical_se

    def rows(self):
        """CSV rows (method, regime, risk, se, n_trials)."""
        return [(self.method, reg, self.risk(reg), self.se(reg), self.n_trials)
                for reg in (PRACTICAL, THEORETICAL)]

    def to_dict(self, with_alpha_stars=False) -> dict:
        d = asdict(self)
        if not with_alpha_stars:
            d.pop("alpha_stars")
            d.pop("practical_alpha_stars")
        return d


def _trial_chunk(method: Method, gen: Generator, theta0: float, n: int,
                 cfg: AlphaSearchConfig, indices: list[int]):
    out = []
    for i in indices:
        summary = summarize(draw(gen, n, stream=i))
        out.append((i, *sup_ratio_pair(method, summary, theta0, cfg)))
    return out


def run_trials(method: Method, gen: Generator, theta0: float, n: int, trials: int,
               cfg: AlphaSearchConfig, workers: int = 1):
    """Per-trial (practical, theoretical) α*, ordered by trial index.

    Trial i always reads substream i of ``gen``, so results do not depend on
    ``workers``.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    idx = list(range(trials))
    if workers <= 1:
        res = _trial_chunk(method, gen, theta0, n, cfg, idx)
    else:
        chunks = [idx[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_trial_chunk, method, gen, theta0, n, cfg, c) for c in chunks if c]
            res = [r for f in futures for r in f.result()]
    res.sort(key=lambda t: t[0])
    return [r[1] for r in res], [r[2] for r in res]


def empirical_risk(method: Method, generator: Generator, theta_true: float, n: int, trials: int,
                   cfg: AlphaSearchConfig = AlphaSearchConfig(), workers: int = 1) -> RiskReport:
    """Monte Carlo estimate of E[sup_α 1{θ ∉ H(α)}/α] in both α regimes."""
    practical, theoretical = run_trials(method, generator, theta_true, n, trials, cfg, workers)
    report = RiskReport.from_alpha_stars(method.key, practical, theoretical, cfg)
    if report.unrejected:
        log.warning("%s: %d trials not rejected at alpha_max=%g", method.key,
                    report.unrejected, cfg.alpha_max)
    return report


# ------------------------------------------------------- exact type-I errors


def _check_unit_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def type1_iwr(alpha: float, lam: float) -> float:
    """2(1 - Φ(log(2/α)/λ + λ/2))."""
    _check_unit_alpha(alpha)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    return 2.0 * std_normal_sf(width_factor(lam, alpha))


def type1_mix_iwr(alpha: float, p: MixParams = MixParams()) -> float:
    """2(1 - Φ(y*_α))."""
    _check_unit_alpha(alpha)
    return 2.0 * std_normal_sf(solve_y_star(alpha, p))


def type1_reg(alpha: float, lam: float, eta: float) -> float:
    """2(1 - Φ((1 + η) g(λ, α))); η = 0 recovers the IWR value."""
    _check_unit_alpha(alpha)
    if not lam > 0 or eta < 0:
        raise DomainError("need lambda > 0 and eta >= 0")
    return 2.0 * std_normal_sf((1.0 + eta) * width_factor(lam, alpha))


def type1_rws() -> float:
    """Zero: the R-WS width shrinks like √(log n / n), slower than the sampling error.

    This is a limit; at finite n the miscoverage is small but positive.
    """
    return 0.0
