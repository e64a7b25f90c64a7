"""Seeded data generators built on the Philox4x64-10 counter-based bit generator.

Stream layout: the bit generator for (seed, stream) is keyed by
``SeedSequence(seed, spawn_key=(stream,))``. Uniforms are
``((raw >> 11) + 0.5) * 2**-53``, strictly inside (0, 1), and normals are
their image under the inverse normal CDF. Drawing ``k`` values and then
``k + j`` values from the same stream gives the same first ``k`` values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special import std_normal_quantile
from .summary import SampleSummary

FAMILIES = ("gaussian", "student_t", "bernoulli")
_TWO_M53 = 2.0**-53


@dataclass(frozen=True)
class Generator:
    """An iid data source: gaussian(loc, scale), student_t(df, loc, scale) or bernoulli(p)."""

    family: str = "gaussian"
    loc: float = 0.0
    scale: float = 1.0
    df: int = 3
    p: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if not self.scale > 0:
            raise DomainError("scale must be positive")
        if self.family == "student_t" and (int(self.df) != self.df or self.df < 1):
            raise DomainError("student_t is built from normals and needs a positive integer df")
        if not 0 <= self.p <= 1:
            raise DomainError("p must lie in [0, 1]")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")

    @classmethod
    def gaussian(cls, mu=0.0, sigma=1.0, seed=0):
        return cls("gaussian", loc=mu, scale=sigma, seed=seed)

    @classmethod
    def student_t(cls, df=3, loc=0.0, scale=1.0, seed=0):
        return cls("student_t", loc=loc, scale=scale, df=df, seed=seed)

    @classmethod
    def bernoulli(cls, p=0.5, seed=0):
        return cls("bernoulli", p=p, seed=seed)

    @property
    def mean(self) -> float:
        return self.p if self.family == "bernoulli" else self.loc

    def with_seed(self, seed: int) -> "Generator":
        return Generator(self.family, self.loc, self.scale, self.df, self.p, seed)


def bit_generator(seed: int, stream: int | None = None) -> np.random.Philox:
    key = () if stream is None else (int(stream),)
    return np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key))


def uniforms(seed: int, count: int, stream: int | None = None) -> np.ndarray:
    raw = bit_generator(seed, stream).random_raw(count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def standard_normals(seed: int, count: int, stream: int | None = None) -> np.ndarray:
    return std_normal_quantile(uniforms(seed, count, stream)) if count else np.empty(0)


def draw(gen: Generator, count: int, stream: int | None = None) -> np.ndarray:
    """``count`` iid draws from ``gen``; ``stream`` selects an independent substream."""
    if count < 0:
        raise DomainError("count must be nonnegative")
    if gen.family == "gaussian":
        return gen.loc + gen.scale * standard_normals(gen.seed, count, stream)
    if gen.family == "bernoulli":
        return (uniforms(gen.seed, count, stream) < gen.p).astype(float)
    k = int(gen.df)
    z = standard_normals(gen.seed, count * (k + 1), stream).reshape(count, k + 1)
    chi2 = np.square(z[:, 1:]).sum(axis=1)
    return gen.loc + gen.scale * z[:, 0] / np.sqrt(chi2 / k)


def gaussian_summaries(mu: float, sigma: float, n: int, trials: int, seed: int) -> SampleSummary:
    """Exact sufficient statistics of ``trials`` Gaussian samples of size ``n``.

    Uses X̄ ~ N(μ, σ²/n) independent of ssd ~ σ²χ²_{n-1}; avoids materializing
    n·trials draws. The χ² part comes from numpy's gamma sampler on Philox.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    z = standard_normals(seed, trials, stream=0)
    gamma = np.random.Generator(bit_generator(seed, stream=1))
    ssd = sigma * sigma * 2.0 * gamma.standard_gamma((n - 1) / 2.0, size=trials)
    return SampleSummary(n, mu + sigma * z / np.sqrt(n), ssd)
