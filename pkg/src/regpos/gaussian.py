"""Gaussian functionals ell_p(K), ell*(K), M*(K) by sample-average
approximation with common random numbers.

A GaussianSample is a deterministic function of (seed, count, dim): block b
is drawn from the b-th spawn of SeedSequence([seed, dim]), so prefixes
agree across sample sizes and evaluation can run block-parallel with a
fixed-order reduction (results do not depend on the thread count).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "GaussianSample",
    "FixedSample",
    "EllEstimate",
    "ell",
    "ell_star",
    "mstar",
    "crn_pair",
    "crn_diff",
    "gauss_norm_mean",
]

BLOCK = 1 << 14


@dataclass(frozen=True)
class GaussianSample:
    """M standard Gaussian vectors in R^N, recreated deterministically."""

    seed: int
    count: int
    dim: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("need at least two sample vectors")

    def n_blocks(self):
        return (self.count + BLOCK - 1) // BLOCK

    def block(self, b: int):
        size = min(BLOCK, self.count - b * BLOCK)
        ss = np.random.SeedSequence([int(self.seed), int(self.dim)])
        child = ss.spawn(b + 1)[b]
        return np.random.default_rng(child).standard_normal((size, self.dim))

    def blocks(self):
        for b in range(self.n_blocks()):
            yield self.block(b)

    def vectors(self):
        """The full (M, N) array; prefer blocks() in bulk paths."""
        return np.concatenate(list(self.blocks()), axis=0)

    def sign_symmetrized(self):
        """Sample closed under all coordinate sign flips (2^N copies per vector).

        Makes the SAA objective exactly invariant under sign-flip conjugation;
        only sensible for small N.
        """
        if self.dim > 12:
            raise ValueError("sign symmetrization is exponential in the dimension")
        base = self.vectors()
        signs = np.array(
            [[1.0 if (m >> i) & 1 == 0 else -1.0 for i in range(self.dim)]
             for m in range(1 << self.dim)]
        )
        return (base[:, None, :] * signs[None, :, :]).reshape(-1, self.dim)


class FixedSample:
    """Sample interface over a materialized (M, N) array (e.g. symmetrized draws)."""

    def __init__(self, array, seed=-1):
        arr = np.array(array, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 2:
            raise ValueError("need an (M, N) array with M >= 2")
        self.array = arr
        arr.setflags(write=False)
        self.seed = seed
        self.count, self.dim = arr.shape

    def n_blocks(self):
        return (self.count + BLOCK - 1) // BLOCK

    def block(self, b):
        return self.array[b * BLOCK : (b + 1) * BLOCK]

    def blocks(self):
        for b in range(self.n_blocks()):
            yield self.block(b)

    def vectors(self):
        return self.array


@dataclass(frozen=True)
class EllEstimate:
    """Monte Carlo estimate with its standard error."""

    value: float
    se: float
    count: int
    p: int

    def band(self, k=3.0):
        return self.value - k * self.se, self.value + k * self.se


def _map_blocks(sample, fn, threads=1):
    """fn(block) per block, reduced in fixed block order regardless of threads."""
    nb = sample.n_blocks()
    if threads and threads > 1 and nb > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda b: fn(sample.block(b)), range(nb)))
    return [fn(sample.block(b)) for b in range(nb)]


def _moments(sample, values_fn, threads=1):
    parts = _map_blocks(sample, lambda G: _block_moments(values_fn(G)), threads)
    s = sq = 0.0
    m = 0
    for bs, bsq, bm in parts:
        s += bs
        sq += bsq
        m += bm
    mean = s / m
    var = max(sq / m - mean * mean, 0.0) * m / (m - 1)
    return mean, var, m

def _block_moments(v):
    return float(v.sum()), float((v * v).sum()), v.size


def _estimate(sample, values_fn, p, threads=1):
    mean, var, m = _moments(sample, values_fn, threads)
    if p == 1:
        return EllEstimate(mean, np.sqrt(var / m), m, 1)
    value = np.sqrt(mean)
    se = np.sqrt(var / m) / (2.0 * value)
    return EllEstimate(value, se, m, 2)


def ell(K, p: int, sample: GaussianSample, threads=1) -> EllEstimate:
    """ell_p(K) = (E ||G_N||_K^p)^(1/p) for p in {1, 2}."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if sample.dim != K.dim:
        raise ValueError("sample dimension does not match the body")
    fn = (lambda G: K._gauge(G)) if p == 1 else (lambda G: K._gauge(G) ** 2)
    return _estimate(sample, fn, p, threads)


def ell_star(K, p: int, sample: GaussianSample, threads=1) -> EllEstimate:
    """ell*_p(K) = ell_p(K polar), evaluated through the support function."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if sample.dim != K.dim:
        raise ValueError("sample dimension does not match the body")
    fn = (lambda G: K._support(G)) if p == 1 else (lambda G: K._support(G) ** 2)
    return _estimate(sample, fn, p, threads)


def mstar(K, sample: GaussianSample, threads=1) -> EllEstimate:
    """M*(K), the spherical mean of the support function (normalized Gaussians)."""
    if sample.dim != K.dim:
        raise ValueError("sample dimension does not match the body")

    def fn(G):
        U = G / np.linalg.norm(G, axis=1, keepdims=True)
        return K._support(U)

    return _estimate(sample, fn, 1, threads)


_FUNCTIONALS = {
    "ell": lambda K, G: K._gauge(G),
    "ell2": lambda K, G: K._gauge(G) ** 2,
    "ell_star": lambda K, G: K._support(G),
    "ell2_star": lambda K, G: K._support(G) ** 2,
    "mstar": lambda K, G: K._support(G / np.linalg.norm(G, axis=1, keepdims=True)),
}


def crn_pair(bodyA, bodyB, functional: str, sample: GaussianSample, threads=1):
    """Both functionals on the identical Gaussian sample (variance reduction)."""
    if bodyA.dim != bodyB.dim:
        raise ValueError("bodies must share a dimension")
    if functional not in _FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}")
    fn = _FUNCTIONALS[functional]
    p = 2 if functional.startswith("ell2") else 1
    estA = _estimate(sample, lambda G: fn(bodyA, G), p, threads)
    estB = _estimate(sample, lambda G: fn(bodyB, G), p, threads)
    return estA, estB


def crn_diff(bodyA, bodyB, functional: str, sample: GaussianSample, threads=1) -> EllEstimate:
    """Paired-difference estimator of functional(A) - functional(B) under CRN."""
    fn = _FUNCTIONALS[functional]
    mean, var, m = _moments(sample, lambda G: fn(bodyA, G) - fn(bodyB, G), threads)
    return EllEstimate(mean, np.sqrt(var / m), m, 1)


def gauss_norm_mean(N: int) -> float:
    """E |G_N| = sqrt(2) Gamma((N+1)/2) / Gamma(N/2)."""
    return float(np.sqrt(2.0) * np.exp(gammaln((N + 1) / 2.0) - gammaln(N / 2.0)))
