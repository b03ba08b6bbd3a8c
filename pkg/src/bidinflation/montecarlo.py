"""Monte-Carlo revenue estimates, used as an oracle for the analytic engine.

Random stream layout.  Trials are cut into fixed chunks of ``chunk_size``;
chunk ``i`` draws from ``PCG64(SeedSequence(seed, spawn_key=(i,)))`` a
``(m, 1 + k)`` array of uniforms ``g`` in row-major order: column 0 selects
the mixture branch (drawn for every mechanism), columns ``1..k`` are the
bidders (``k = n``) or, for post-the-sample variants, the buyer then the
sample (``k = 2``).  Each bidder's quantile is ``1 - g`` (so it lies in
``(0, 1]``) and their value is ``curve.sample_value(quantile)``.

Ties are resolved through quantile order: among equal values the lower
quantile wins (uniform tie-breaking, since quantiles are i.i.d.), and a buyer
exactly at the posted price buys iff their quantile is below the sample's
(probability 1/2).  The estimate does not depend on the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from bidinflation.curves import RevenueCurve
from bidinflation.mechanisms import (
    SPA,
    InflatedSPA,
    MechanismError,
    MechanismSpec,
    MixedInflatedSPA,
    PostTheSample,
    ReserveSPA,
    randomized_alpha,
)

DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    trials: int

    def __iter__(self):
        return iter((self.mean, self.stderr))


def chunk_uniforms(seed: int, index: int, rows: int, cols: int) -> np.ndarray:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss)).random((rows, cols))


def _auction_payments(spec, curve, u_mix, quant):
    order = np.sort(quant, axis=1)
    v1 = curve.sample_value(order[:, 0])
    v2 = curve.sample_value(order[:, 1]) if quant.shape[1] > 1 else np.zeros(len(quant))
    if isinstance(spec, SPA):
        return v2
    if isinstance(spec, ReserveSPA):
        r = spec.reserve
        return np.where(v1 >= r, np.maximum(r, v2), 0.0)
    inflated_price = (1.0 + spec.delta) * v2
    inflated = np.where(v1 > inflated_price, inflated_price, 0.0)
    if isinstance(spec, InflatedSPA):
        return inflated
    return np.where(u_mix < spec.epsilon, inflated, v2)


def _pts_payments(spec, curve, u_mix, quant):
    qb, qs = quant[:, 0], quant[:, 1]
    vb, vs = curve.sample_value(qb), curve.sample_value(qs)
    alpha = spec.alpha if isinstance(spec, PostTheSample) else randomized_alpha(spec, u_mix)
    price = alpha * vs
    sold = (vb > price) | ((vb == price) & (qb < qs))
    return np.where(sold, price, 0.0)


def chunk_payments(spec: MechanismSpec, curve: RevenueCurve, n: int, g: np.ndarray):
    """Total payment per trial for a block of uniforms laid out as documented."""
    u_mix, quant = g[:, 0], 1.0 - g[:, 1:]
    if spec.single_sample:
        return _pts_payments(spec, curve, u_mix, quant)
    return _auction_payments(spec, curve, u_mix, quant)


def estimate_revenue(spec: MechanismSpec, curve: RevenueCurve, n: int, trials: int,
                     seed: int = 0, chunk_size: int = DEFAULT_CHUNK,
                     threads: int = 1) -> Estimate:
    if trials < 1:
        raise ValueError("trials must be positive")
    if spec.single_sample:
        if n != 1:
            raise MechanismError(f"{spec.kind} runs with exactly one bidder")
        cols = 3
    else:
        min_n = 1 if isinstance(spec, ReserveSPA) else 2
        if n < min_n:
            raise MechanismError(f"{spec.kind} needs at least {min_n} bidders")
        if not isinstance(spec, (SPA, ReserveSPA, InflatedSPA, MixedInflatedSPA)):
            raise MechanismError(f"unsupported mechanism {spec!r}")
        cols = 1 + n

    sizes = [min(chunk_size, trials - start) for start in range(0, trials, chunk_size)]

    def work(i):
        return chunk_payments(spec, curve, n, chunk_uniforms(seed, i, sizes[i], cols))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(i) for i in range(len(sizes))]
    pay = np.concatenate(parts)
    mean = float(np.mean(pay))
    sd = float(np.std(pay, ddof=1)) if trials > 1 else 0.0
    return Estimate(mean, sd / math.sqrt(trials), trials)
