"""Asymptotic e-variables for a mean θ, evaluated from a `SampleSummary`.

Every e-variable has a ``log_`` twin; the public versions exponentiate at the
very end and saturate to +inf instead of overflowing. Inputs broadcast, so a
summary holding arrays of trial statistics yields an array of e-values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, DomainError, InsufficientSamplesError, InvalidGridError
from .special import log_std_normal_cdf_diff, std_normal_cdf
from .summary import SampleSummary, theta_stats

# exponent on n in the R-WS truncation level C * n^(RWS_TRUNC_EXP * delta) (γ = 0.49 -> 0.24)
RWS_TRUNC_EXP = 0.24


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _exp(log_value):
    with np.errstate(over="ignore"):
        return _out(np.exp(log_value))


def _ratio(num, den):
    """num / den with 0/0 read as 0; nonzero/0 is an error."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    zero = den == 0
    if np.any(zero & (num != 0)):
        raise DegenerateSampleError("self-normalizer is zero while the centered sum is not")
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(zero, 0.0, num / np.where(zero, 1.0, den))
    return _out(r)


def _require_n(summary, minimum, what):
    if np.any(np.asarray(summary.n) < minimum):
        raise InsufficientSamplesError(f"{what} needs at least {minimum} observations")


@dataclass(frozen=True)
class IwrParams:
    lam: float


@dataclass(frozen=True)
class MixParams:
    """Gaussian mixing distribution with std ``kappa`` truncated to [-r, r]."""

    r: float = 20.0
    kappa: float = 1.0

    def __post_init__(self):
        if not (self.r > 0 and self.kappa > 0):
            raise DomainError("mixture radius r and scale kappa must be positive")

    @property
    def u(self) -> float:
        return (self.kappa**2 + 1.0) / (2.0 * self.kappa**2)

    @property
    def normalizer(self) -> float:
        """Z_{R,κ} = κ√(2π)(Φ(R/κ) - Φ(-R/κ))."""
        return self.kappa * math.sqrt(2.0 * math.pi) * (
            std_normal_cdf(self.r / self.kappa) - std_normal_cdf(-self.r / self.kappa)
        )


@dataclass(frozen=True)
class RwsParams:
    rho: float = 2.0
    delta: float = 1.0
    c: float = 100.0

    def __post_init__(self):
        if not (self.rho > 0 and self.delta > 0 and self.c > 0):
            raise DomainError("rho, delta and c must all be positive")

    def log_truncation(self, n):
        return math.log(self.c) + RWS_TRUNC_EXP * self.delta * np.log(np.asarray(n, dtype=float))

    def truncation(self, n):
        return _out(self.c * np.asarray(n, dtype=float) ** (RWS_TRUNC_EXP * self.delta))


@dataclass(frozen=True)
class RegParams:
    lam: float
    eta: float = 1e-3

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError("eta must be positive")


@dataclass(frozen=True)
class SnSchedule:
    """Deterministic betting sequence for the SN e-variable.

    ``rule="horizon"`` uses λ_i = c/√n for every i ≤ n, so Σλ_i² = c² and each
    λ_i²/Σλ_j² = 1/n vanishes. ``rule="power"`` uses λ_i = c/i^p.
    """

    rule: str = "horizon"
    c: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        if self.rule not in ("horizon", "power"):
            raise DomainError(f"unknown SN schedule rule {self.rule!r}")
        if not self.c > 0:
            raise DomainError("schedule scale c must be positive")
        if self.rule == "power" and not self.p > 0.5:
            raise DomainError("power schedule needs p > 1/2 for square-summable λ")

    def lambdas(self, n: int) -> np.ndarray:
        i = np.arange(1, n + 1, dtype=float)
        if self.rule == "horizon":
            return np.full(n, self.c / math.sqrt(n)) if n else i
        return self.c / i**self.p


def _lam(p):
    return p.lam if isinstance(p, (IwrParams, RegParams)) else float(p)


# --------------------------------------------------------------------------- IWR


def self_normalized(summary: SampleSummary, theta):
    """S_n(θ)/V_n(θ), bounded by √n in absolute value."""
    ts = theta_stats(summary, theta)
    return _ratio(ts.s, ts.v)


def log_e_iwr(summary, theta, p):
    lam = _lam(p)
    return lam * np.asarray(self_normalized(summary, theta)) - 0.5 * lam * lam


def e_iwr(summary: SampleSummary, theta, p: IwrParams | float):
    """exp(λ S/V - λ²/2)."""
    return _exp(log_e_iwr(summary, theta, p))


# ----------------------------------------------------------------- mixture kernel


def log_i_r_kernel(y, u, r):
    y = np.asarray(y, dtype=float)
    if np.any(np.asarray(u) <= 0) or np.any(np.asarray(r) <= 0):
        raise DomainError("I_R needs u > 0 and r > 0")
    # symmetric in y; using |y| keeps the difference of CDFs well conditioned
    ay = np.abs(y)
    root = np.sqrt(2.0 * u)
    g1 = r * root - ay / root
    g2 = -(r * root + ay / root)
    res = 0.5 * np.log(np.pi / u) + ay * ay / (4.0 * u) + log_std_normal_cdf_diff(g1, g2)
    return _out(res)


def i_r_kernel(y, u, r):
    """∫_{-r}^{r} exp(λy - λ²u) dλ in closed form."""
    return _exp(log_i_r_kernel(y, u, r))


def _log_mixture(arg, p: MixParams):
    return np.asarray(log_i_r_kernel(arg, p.u, p.r)) - math.log(p.normalizer)


def log_e_mix_iwr(summary, theta, p: MixParams):
    return _out(_log_mixture(self_normalized(summary, theta), p))


def e_mix_iwr(summary: SampleSummary, theta, p: MixParams = MixParams()):
    """IWR e-variable mixed over a truncated Gaussian on λ."""
    return _exp(log_e_mix_iwr(summary, theta, p))


# ----------------------------------------------------------------------- R-WS


def rws_variance_proxy(summary: SampleSummary, eps=None):
    """û_n = n(ŝ_n² + ε); ε defaults to 1/log n."""
    if eps is None:
        eps = 1.0 / np.log(summary.n)
    return summary.n * (summary.biased_var + eps)


def log_e_rws(summary, theta, p: RwsParams):
    _require_n(summary, 2, "R-WS e-variable")
    s = theta_stats(summary, theta).s
    ru = p.rho * rws_variance_proxy(summary)
    log_g = -0.5 * np.log1p(ru) + p.rho * np.square(s) / (2.0 * ru + 2.0)
    return _out(np.minimum(log_g, p.log_truncation(summary.n)))


def e_rws(summary: SampleSummary, theta, p: RwsParams = RwsParams()):
    """Gaussian-mixture R-WS e-variable capped at C·n^(0.24δ)."""
    return _exp(log_e_rws(summary, theta, p))


def normal_lambda_grid(rho: float, points: int = 201, kind: str = "hermite"):
    """Discretize N(0, ρ) into (nodes, weights) summing to one.

    ``kind="hermite"`` gives Gauss-Hermite nodes; ``kind="uniform"`` gives an
    evenly spaced grid over ±12 standard deviations with density weights.
    """
    if not rho > 0:
        raise DomainError("rho must be positive")
    sd = math.sqrt(rho)
    if kind == "hermite":
        nodes, weights = np.polynomial.hermite_e.hermegauss(points)
        return nodes * sd, weights / weights.sum()
    if kind == "uniform":
        nodes = np.linspace(-12.0 * sd, 12.0 * sd, points)
        w = np.exp(-0.5 * (nodes / sd) ** 2)
        return nodes, w / w.sum()
    raise DomainError(f"unknown grid kind {kind!r}")


def log_e_rws_general(summary, theta, lambdas, weights, eps, trunc):
    lambdas = np.asarray(lambdas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if lambdas.shape != weights.shape or lambdas.ndim != 1:
        raise InvalidGridError("lambdas and weights must be 1-D arrays of equal length")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise InvalidGridError("weights must be nonnegative and sum to one")
    if not eps > 0:
        raise DomainError("eps must be positive")
    if not trunc > 0:
        raise DomainError("trunc must be positive")
    _require_n(summary, 1, "R-WS e-variable")
    s = np.asarray(theta_stats(summary, theta).s, dtype=float)[..., None]
    a = np.asarray(summary.n * (summary.biased_var + eps), dtype=float)[..., None]
    keep = weights > 0
    lam = lambdas[keep]
    terms = lam * s - 0.5 * a * lam * lam + np.log(weights[keep])
    top = terms.max(axis=-1, keepdims=True)
    log_mix = top[..., 0] + np.log(np.exp(terms - top).sum(axis=-1))
    return _out(np.minimum(log_mix, math.log(trunc)))


def e_rws_general(summary: SampleSummary, theta, lambdas, weights, eps: float, trunc: float):
    """Σ_j w_j exp(λ_j S - n(ŝ² + ε)λ_j²/2), capped at ``trunc``."""
    return _exp(log_e_rws_general(summary, theta, lambdas, weights, eps, trunc))


# ------------------------------------------------------------------------ REG


def regularized_ratio(summary: SampleSummary, theta, eta, variance="unbiased"):
    """S_n(θ) / (√n·σ̂_n + η V_n(θ)); ``variance="biased"`` uses ŝ_n instead of σ̂_n."""
    if variance == "unbiased":
        _require_n(summary, 2, "REG e-variable")
        scale = np.sqrt(summary.n * summary.unbiased_var)
    elif variance == "biased":
        _require_n(summary, 1, "REG e-variable")
        scale = np.sqrt(summary.ssd)
    else:
        raise DomainError(f"variance must be 'unbiased' or 'biased', got {variance!r}")
    ts = theta_stats(summary, theta)
    return _ratio(ts.s, scale + eta * np.asarray(ts.v))


def log_e_reg(summary, theta, p: RegParams):
    lam = p.lam
    return lam * np.asarray(regularized_ratio(summary, theta, p.eta)) - 0.5 * lam * lam


def e_reg(summary: SampleSummary, theta, p: RegParams):
    """exp(λS/(√n σ̂ + ηV) - λ²/2)."""
    return _exp(log_e_reg(summary, theta, p))


def log_e_mix_reg(summary, theta, p: MixParams, eta, variance="unbiased"):
    if not eta > 0:
        raise DomainError("eta must be positive")
    return _out(_log_mixture(regularized_ratio(summary, theta, eta, variance), p))


def e_mix_reg(summary: SampleSummary, theta, p: MixParams = MixParams(), eta: float = 1e-3,
              variance: str = "unbiased"):
    return _exp(log_e_mix_reg(summary, theta, p, eta, variance))


# ----------------------------------------------------------- stream-based


def log_e_sn(stream, theta, sched: SnSchedule | np.ndarray = SnSchedule()):
    x = np.asarray(stream, dtype=float)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise DomainError("SN e-variable needs a nonempty stream")
    n = x.shape[-1]
    lams = sched.lambdas(n) if isinstance(sched, SnSchedule) else np.asarray(sched, dtype=float)
    if lams.shape != (n,):
        raise DomainError(f"need {n} lambdas, got shape {lams.shape}")
    lead = x.shape[:-1]
    log_e = np.zeros(lead)
    mean = np.zeros(lead)
    ssd = np.zeros(lead)
    for i in range(n):
        # σ̂²_{i} over the first i points (0-based i = count so far); zero until two points exist
        prev_var = ssd / (i - 1) if i >= 2 else 0.0
        xi = x[..., i]
        c = xi - theta
        lam = lams[i]
        log_e += lam * c - lam * lam * (c * c + 2.0 * prev_var) / 6.0
        d = xi - mean
        mean = mean + d / (i + 1)
        ssd = ssd + d * (xi - mean)
    return _out(log_e)


def e_sn(stream, theta, sched: SnSchedule | np.ndarray = SnSchedule()):
    """Predictable-plug-in e-variable from a single ordered pass over ``stream``.

    The plug-in variance before the i-th point is the unbiased variance of the
    first i-1 points, taken as 0 while fewer than two points have been seen.
    """
    return _exp(log_e_sn(stream, theta, sched))


def e_star_oracle(stream, theta, lam: float, sigma2: float):
    """exp(λΣ(X_i-θ) - λ²U/2) with U = Σ((X_i-θ)² + 2σ²)/3, using the true variance.

    A supermartingale under the null; only useful when σ² is known (tests).
    """
    c = np.asarray(stream, dtype=float) - theta
    u = (np.square(c) + 2.0 * sigma2).sum(axis=-1) / 3.0
    return _exp(lam * c.sum(axis=-1) - 0.5 * lam * lam * u)


def e_to_pvalue(e):
    """1/e, with e = 0 mapped to +inf."""
    e = np.asarray(e, dtype=float)
    if np.any(e < 0):
        raise DomainError("e-values are nonnegative")
    with np.errstate(divide="ignore"):
        return _out(np.where(e == 0, np.inf, 1.0 / np.where(e == 0, 1.0, e)))
