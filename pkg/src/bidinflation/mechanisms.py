"""Mechanism descriptions and execution on concrete bid profiles.

Conventions at boundaries (measure zero for atomless distributions, but
visible on curves with a top atom such as triangles):

* top-bid ties are broken uniformly at random;
* the inflated second price auction sells only if the top bid strictly
  exceeds ``(1 + delta)`` times the second bid;
* a reserve is met with equality (``bid >= r`` sells);
* in post-the-sample, a buyer whose value equals the posted price buys with
  probability 1/2 (one uniform is drawn only in that case).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import ClassVar, Optional, Sequence

import numpy as np


class MechanismError(ValueError):
    pass


class RandomSource:
    """Seeded stream of uniforms on ``[0, 1)`` backed by numpy's PCG64."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self) -> float:
        return float(self._gen.random())


@dataclass(frozen=True)
class Outcome:
    winner: Optional[int]
    price: float
    payments: tuple

    @property
    def revenue(self) -> float:
        return float(sum(self.payments))


def _no_sale(n):
    return Outcome(None, 0.0, (0.0,) * n)


def _sale(n, winner, price):
    pay = [0.0] * n
    pay[winner] = float(price)
    return Outcome(winner, float(price), tuple(pay))


# -- mechanism specifications ----------------------------------------------


@dataclass(frozen=True)
class MechanismSpec:
    kind: ClassVar[str] = ""
    single_sample: ClassVar[bool] = False

    def to_dict(self) -> dict:
        return {"mechanism": self.kind, "params": asdict(self)}

    def label(self) -> str:
        params = ",".join(f"{k}={v:g}" for k, v in asdict(self).items())
        return f"{self.kind}({params})" if params else self.kind


@dataclass(frozen=True)
class SPA(MechanismSpec):
    kind: ClassVar[str] = "spa"


@dataclass(frozen=True)
class ReserveSPA(MechanismSpec):
    reserve: float
    kind: ClassVar[str] = "reserve_spa"

    def __post_init__(self):
        if not self.reserve >= 0:
            raise MechanismError("reserve must be non-negative")


@dataclass(frozen=True)
class InflatedSPA(MechanismSpec):
    delta: float
    kind: ClassVar[str] = "inflated_spa"

    def __post_init__(self):
        if not self.delta >= 0:
            raise MechanismError("delta must be non-negative")


@dataclass(frozen=True)
class MixedInflatedSPA(MechanismSpec):
    epsilon: float
    delta: float
    kind: ClassVar[str] = "mixed_inflated_spa"

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise MechanismError("epsilon must be a probability")
        if not self.delta >= 0:
            raise MechanismError("delta must be non-negative")


@dataclass(frozen=True)
class PostTheSample(MechanismSpec):
    alpha: float = 1.0
    kind: ClassVar[str] = "post_the_sample"
    single_sample: ClassVar[bool] = True

    def __post_init__(self):
        if not self.alpha > 0:
            raise MechanismError("alpha must be positive")


@dataclass(frozen=True)
class RandomizedPostTheSample(MechanismSpec):
    zeta: float
    rho: float
    epsilon: float
    delta: float
    kind: ClassVar[str] = "randomized_pts"
    single_sample: ClassVar[bool] = True

    def __post_init__(self):
        if not (0 <= self.zeta <= 1 and 0 <= self.epsilon <= 1):
            raise MechanismError("zeta and epsilon must be probabilities")
        if self.zeta + self.epsilon > 1 + 1e-15:
            raise MechanismError("zeta + epsilon must not exceed 1")
        if not 0 <= self.rho < 1:
            raise MechanismError("rho must lie in [0, 1)")
        if not self.delta >= 0:
            raise MechanismError("delta must be non-negative")

    def branches(self):
        """``(probability, alpha)`` pairs in the order the mixture uniform is cut."""
        return ((self.zeta, 1.0 - self.rho),
                (self.epsilon, 1.0 + self.delta),
                (1.0 - self.zeta - self.epsilon, 1.0))


_SPECS = {cls.kind: cls for cls in
          (SPA, ReserveSPA, InflatedSPA, MixedInflatedSPA, PostTheSample,
           RandomizedPostTheSample)}


def mechanism_from_dict(doc: dict) -> MechanismSpec:
    try:
        kind = doc["mechanism"]
    except (KeyError, TypeError):
        raise MechanismError("mechanism document needs a 'mechanism' field") from None
    if kind not in _SPECS:
        raise MechanismError(f"unknown mechanism {kind!r}")
    try:
        return _SPECS[kind](**dict(doc.get("params", {})))
    except TypeError as exc:
        raise MechanismError(f"bad parameters for {kind}: {exc}") from None


def parse_mechanism(text: str) -> MechanismSpec:
    """Parse a compact mechanism string or JSON document.

    Compact forms: ``spa``, ``reserve:0.5``, ``inflated:1``, ``mixed:0.15,1``,
    ``pts`` / ``pts:2`` / ``pts:alpha=2``, ``rpts:zeta,rho,epsilon,delta``.
    Parameters may also be given as ``name=value``.
    """
    text = text.strip()
    if text.startswith("{"):
        return mechanism_from_dict(json.loads(text))
    name, _, rest = text.partition(":")
    aliases = {"reserve": "reserve_spa", "inflated": "inflated_spa",
               "mixed": "mixed_inflated_spa", "pts": "post_the_sample",
               "rpts": "randomized_pts"}
    kind = aliases.get(name, name)
    if kind not in _SPECS:
        raise MechanismError(f"unknown mechanism {text!r}")
    cls = _SPECS[kind]
    names = [f.name for f in fields(cls)]
    kwargs = {}
    for i, tok in enumerate(t for t in rest.split(",") if t.strip()):
        key, eq, val = tok.partition("=")
        if not eq:
            if i >= len(names):
                raise MechanismError(f"too many parameters in {text!r}")
            key, val = names[i], tok
        try:
            kwargs[key.strip()] = float(val)
        except ValueError:
            raise MechanismError(f"cannot parse parameter {tok!r}") from None
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise MechanismError(f"bad parameters for {kind}: {exc}") from None


# -- execution ---------------------------------------------------------------


def _bids(bids: Sequence[float]):
    out = [float(b) for b in bids]
    if not out:
        raise MechanismError("need at least one bid")
    if any(not b >= 0 for b in out):
        raise MechanismError("bids must be non-negative")
    return out


def _top_two(bids, rand):
    """Tie-broken winner index, its bid, and the highest other bid (0 if none)."""
    top = max(bids)
    tied = [i for i, b in enumerate(bids) if b == top]
    winner = tied[0] if len(tied) == 1 else tied[min(int(rand.uniform() * len(tied)), len(tied) - 1)]
    others = [b for i, b in enumerate(bids) if i != winner]
    return winner, top, (max(others) if others else 0.0)


def run_spa(bids, rand) -> Outcome:
    bids = _bids(bids)
    if len(bids) < 2:
        raise MechanismError("second price auction needs at least two bidders")
    winner, _, second = _top_two(bids, rand)
    return _sale(len(bids), winner, second)


def run_reserve_spa(bids, r: float, rand) -> Outcome:
    bids = _bids(bids)
    if not r >= 0:
        raise MechanismError("reserve must be non-negative")
    winner, top, second = _top_two(bids, rand)
    if top >= r:
        return _sale(len(bids), winner, max(r, second))
    return _no_sale(len(bids))


def run_inflated_spa(bids, delta: float, rand) -> Outcome:
    bids = _bids(bids)
    if len(bids) < 2:
        raise MechanismError("inflated second price auction needs at least two bidders")
    if not delta >= 0:
        raise MechanismError("delta must be non-negative")
    winner, top, second = _top_two(bids, rand)
    price = (1.0 + delta) * second
    if top > price:
        return _sale(len(bids), winner, price)
    return _no_sale(len(bids))


def run_post_the_sample(v: float, s: float, alpha: float, rand) -> Outcome:
    if not (v >= 0 and s >= 0):
        raise MechanismError("value and sample must be non-negative")
    if not alpha > 0:
        raise MechanismError("alpha must be positive")
    price = alpha * s
    if v > price or (v == price and rand.uniform() < 0.5):
        return _sale(1, 0, price)
    return _no_sale(1)


def run_mechanism(spec: MechanismSpec, bids, sample=None, rand=None) -> Outcome:
    """Run ``spec`` once.  Always consumes one uniform for the mixture branch first."""
    if rand is None:
        raise MechanismError("a random source is required")
    if spec.single_sample:
        if sample is None:
            raise MechanismError(f"{spec.kind} needs a sample")
        if len(bids) != 1:
            raise MechanismError(f"{spec.kind} runs with exactly one bidder")
    elif sample is not None:
        raise MechanismError(f"{spec.kind} does not take a sample")

    u = rand.uniform()
    if isinstance(spec, SPA):
        return run_spa(bids, rand)
    if isinstance(spec, ReserveSPA):
        return run_reserve_spa(bids, spec.reserve, rand)
    if isinstance(spec, InflatedSPA):
        return run_inflated_spa(bids, spec.delta, rand)
    if isinstance(spec, MixedInflatedSPA):
        if u < spec.epsilon:
            return run_inflated_spa(bids, spec.delta, rand)
        return run_spa(bids, rand)
    if isinstance(spec, PostTheSample):
        return run_post_the_sample(bids[0], sample, spec.alpha, rand)
    if isinstance(spec, RandomizedPostTheSample):
        return run_post_the_sample(bids[0], sample, randomized_alpha(spec, u), rand)
    raise MechanismError(f"unsupported mechanism {spec!r}")


def randomized_alpha(spec: RandomizedPostTheSample, u):
    """Price multiplier selected by the mixture uniform ``u`` (scalar or array)."""
    u = np.asarray(u, dtype=float)
    out = np.where(u < spec.zeta, 1.0 - spec.rho,
                   np.where(u < spec.zeta + spec.epsilon, 1.0 + spec.delta, 1.0))
    return float(out) if out.ndim == 0 else out
