"""Experiment drivers: width curves on one stream, risk tables, and the anchor-ratio grid.

Every driver is a pure function of its arguments (seed included) and the CSV
writers format floats with 9 significant digits, so outputs are byte-stable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, InvalidGridError
from .intervals import Method, anchor_lambda
from .risk import AlphaSearchConfig, RiskReport, empirical_risk
from .sampling import Generator, draw
from .summary import summarize

WIDTH_CHECKPOINTS = (100, 200, 500, 1000, 2000, 3000, 5000, 10000, 20000)


@dataclass
class WidthCurve:
    method: str
    points: list = field(default_factory=list)

    def __post_init__(self):
        ns = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise DomainError("checkpoints must be strictly increasing")

    @property
    def ns(self):
        return [p[0] for p in self.points]

    @property
    def widths(self):
        return [p[1] for p in self.points]


def width_experiment(methods, gen: Generator, checkpoints, alpha: float) -> list[WidthCurve]:
    """Full width of each method's interval on prefixes of a single stream.

    Real-line intervals are recorded as ``inf`` and empty ones as 0.
    """
    cps = [int(c) for c in checkpoints]
    if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
        raise DomainError("checkpoints must be positive and strictly increasing")
    x = draw(gen, cps[-1])
    summaries = [summarize(x[:n]) for n in cps]
    return [WidthCurve(m.key, [(n, m.interval(s, alpha).width) for n, s in zip(cps, summaries)])
            for m in methods]


def width_methods(alpha: float = 0.05) -> list[Method]:
    """Wald plus anchored IWR (at α and α/10⁴), MIX-IWR (R=20, κ=5) and R-WS (δ=0.1)."""
    return [
        Method("wald"),
        Method("iwr", lam=anchor_lambda(alpha), label="iwr"),
        Method("iwr", lam=anchor_lambda(alpha / 1e4), label="iwr-low-anchor"),
        Method("mix-iwr", r=20.0, kappa=5.0),
        Method("rws", rho=2.0, delta=0.1),
    ]


def risk_methods() -> list[Method]:
    """Wald, IWR anchored at 0.01, MIX-IWR (R=20, κ=1) and R-WS (ρ=2)."""
    return [
        Method("wald"),
        Method("iwr", lam=anchor_lambda(0.01)),
        Method("mix-iwr", r=20.0, kappa=1.0),
        Method("rws", rho=2.0),
    ]


@dataclass(frozen=True)
class RiskExperimentConfig:
    """Defaults: N(0, 4) data, n = 1000, 1000 trials, null θ = 0."""

    n: int = 1000
    trials: int = 1000
    mu: float = 0.0
    sigma: float = 2.0
    theta0: float = 0.0
    seed: int = 0
    methods: tuple = field(default_factory=lambda: tuple(risk_methods()))
    search: AlphaSearchConfig = field(default_factory=AlphaSearchConfig)


def risk_experiment(cfg: RiskExperimentConfig = RiskExperimentConfig(), workers: int = 1) -> list[RiskReport]:
    gen = Generator.gaussian(cfg.mu, cfg.sigma, seed=cfg.seed)
    return [empirical_risk(m, gen, cfg.theta0, cfg.n, cfg.trials, cfg.search, workers)
            for m in cfg.methods]


def default_ratio_grid(points: int = 400) -> np.ndarray:
    return np.geomspace(0.001, 0.2, points)


def anchor_ratio_grid(alphas=None, alpha0s=None) -> np.ndarray:
    """Matrix R[i, j] = R(alphas[i], alpha0s[j])."""
    a = default_ratio_grid() if alphas is None else np.asarray(alphas, dtype=float)
    a0 = default_ratio_grid() if alpha0s is None else np.asarray(alpha0s, dtype=float)
    for g in (a, a0):
        if g.ndim != 1 or g.size == 0 or np.any(~((g > 0) & (g < 2))):
            raise InvalidGridError("ratio grids must be nonempty and lie in (0, 2)")
    la = np.log(2.0 / a)[:, None]
    l0 = np.log(2.0 / a0)[None, :]
    q = np.sqrt(la / l0)
    return 0.5 * (q + 1.0 / q)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


def _write(rows, header, out) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


def widths_csv(curves: list[WidthCurve], out=None) -> str:
    rows = [(c.method, n, w) for c in curves for n, w in c.points]
    return _write(rows, ("method", "n", "width"), out)


def risk_csv(reports: list[RiskReport], out=None) -> str:
    rows = [row for r in reports for row in r.rows()]
    return _write(rows, ("method", "regime", "risk", "se", "n_trials"), out)


def ratio_csv(alphas, alpha0s, matrix, out=None) -> str:
    rows = [(a, a0, matrix[i, j]) for i, a in enumerate(alphas) for j, a0 in enumerate(alpha0s)]
    return _write(rows, ("alpha", "alpha0", "ratio"), out)
