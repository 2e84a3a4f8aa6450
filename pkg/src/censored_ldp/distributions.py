"""Jump laws with regularly varying right tails and their exact samplers.

The reference law is the standardized Pareto: ``xi = (P - mu) / sigma`` with
``P`` Pareto(alpha) on ``[1, inf)``, so that ``E xi = 0`` and ``Var xi = 1``
exactly. Every draw is one inverse-CDF evaluation of one uniform.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError

__all__ = [
    "TailSpec",
    "JumpModel",
    "ConditionedSampler",
    "make_standardized_pareto",
    "parse_jump",
    "tail_V",
    "tail_quantile",
    "inverse_cdf",
    "sample",
    "sample_conditioned",
    "conditioned_inverse_cdf",
]


@dataclass(frozen=True)
class TailSpec:
    """Regularly varying tail ``V(t) = t**-alpha * L(t)``.

    ``slow_factor`` is ``("constant", C)`` or ``("logpower", C, beta)``; the
    latter means ``L(t) = C (ln t)**beta`` for ``t >= e`` and ``L(t) = C``
    below ``e``.
    """

    alpha: float
    slow_factor: tuple = ("constant", 1.0)

    def __post_init__(self):
        if not self.alpha > 2:
            raise DomainError(f"tail index alpha must exceed 2, got {self.alpha}")
        kind = self.slow_factor[0]
        if kind == "constant":
            if len(self.slow_factor) != 2 or not self.slow_factor[1] > 0:
                raise DomainError("constant slow factor needs one positive constant")
        elif kind == "logpower":
            if len(self.slow_factor) != 3 or not self.slow_factor[1] > 0:
                raise DomainError("logpower slow factor needs (C > 0, beta)")
        else:
            raise DomainError(f"unknown slow factor {kind!r}")

    @classmethod
    def constant(cls, alpha: float, c: float = 1.0) -> "TailSpec":
        return cls(alpha, ("constant", float(c)))

    @classmethod
    def log_power(cls, alpha: float, c: float, beta: float) -> "TailSpec":
        return cls(alpha, ("logpower", float(c), float(beta)))

    @property
    def t_min(self) -> float:
        """Left end of the range where ``V`` is guaranteed nonincreasing."""
        if self.slow_factor[0] == "logpower":
            return max(1.0, math.exp(max(self.slow_factor[2], 0.0) / self.alpha))
        return 1.0

    def L(self, t):
        t = np.asarray(t, dtype=float)
        if self.slow_factor[0] == "constant":
            return np.full_like(t, self.slow_factor[1])
        _, c, beta = self.slow_factor
        logt = np.log(np.maximum(t, math.e))
        return c * logt**beta

    def V(self, t):
        t = np.asarray(t, dtype=float)
        return t ** (-self.alpha) * self.L(t)


@dataclass(frozen=True)
class JumpModel:
    """Zero-mean unit-variance jump law; only the standardized Pareto exists.

    ``mu`` and ``sigma`` are the mean and standard deviation of the underlying
    Pareto variable, so ``P(xi > t) = (mu + sigma t)**-alpha`` once
    ``mu + sigma t >= 1``.
    """

    alpha: float
    mu: float
    sigma: float
    kind: Literal["pareto"] = "pareto"
    tail: TailSpec = field(init=False)

    def __post_init__(self):
        if not self.alpha > 2:
            raise DomainError(f"alpha must exceed 2 for finite variance, got {self.alpha}")
        object.__setattr__(self, "tail", TailSpec.constant(self.alpha, self.sigma ** (-self.alpha)))

    @property
    def support_min(self) -> float:
        return (1.0 - self.mu) / self.sigma

    def spec_string(self) -> str:
        return f"pareto:alpha={self.alpha!r}"


def make_standardized_pareto(alpha: float) -> JumpModel:
    """Standardized Pareto(alpha) jump law with exact mean 0 and variance 1."""
    alpha = float(alpha)
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2 for finite variance, got {alpha}")
    mu = alpha / (alpha - 1.0)
    sigma = math.sqrt(alpha / ((alpha - 1.0) ** 2 * (alpha - 2.0)))
    return JumpModel(alpha=alpha, mu=mu, sigma=sigma)


_JUMP_RE = re.compile(r"^\s*pareto\s*:\s*alpha\s*=\s*([^\s,]+)\s*$")


def parse_jump(text: str) -> JumpModel:
    """Parse a model string such as ``pareto:alpha=3.0``."""
    m = _JUMP_RE.match(text)
    if m is None:
        raise DomainError(f"cannot parse jump model {text!r}; expected 'pareto:alpha=<value>'")
    try:
        alpha = float(m.group(1))
    except ValueError:
        raise DomainError(f"alpha is not a number in {text!r}") from None
    return make_standardized_pareto(alpha)


def tail_V(model: JumpModel, t):
    """Exact right tail ``P(xi > t)``; scalar in, float out."""
    p = model.mu + model.sigma * np.asarray(t, dtype=float)
    out = np.where(p > 1.0, np.maximum(p, 1.0) ** (-model.alpha), 1.0)
    return float(out) if out.ndim == 0 else out


def tail_quantile(model: JumpModel, v: float) -> float:
    """Inverse of ``tail_V``: the ``t`` with ``P(xi > t) = v`` for ``0 < v <= 1``."""
    if not 0.0 < v <= 1.0:
        raise DomainError(f"tail probability must lie in (0, 1], got {v}")
    return (v ** (-1.0 / model.alpha) - model.mu) / model.sigma


def inverse_cdf(model: JumpModel, u):
    """Map ``u in (0, 1]`` to a draw of ``xi``, ``P(xi > inverse_cdf(u)) = u``."""
    u = np.asarray(u, dtype=float)
    return (u ** (-1.0 / model.alpha) - model.mu) / model.sigma


def sample(model: JumpModel, rng: np.random.Generator, size=None):
    """Exact draws of ``xi``, one uniform each.

    Uses ``1 - U`` so the argument of the inverse CDF lies in ``(0, 1]``.
    """
    u = 1.0 - rng.random(size)
    return inverse_cdf(model, u)


@dataclass(frozen=True)
class ConditionedSampler:
    """Sampler for ``xi`` given ``xi > y`` (``Above``) or ``xi <= y`` (``Below``)."""

    model: JumpModel
    y: float
    side: Literal["above", "below"]

    def __post_init__(self):
        if self.side not in ("above", "below"):
            raise DomainError(f"side must be 'above' or 'below', got {self.side!r}")
        v = tail_V(self.model, self.y)
        if self.side == "above" and not v > 0.0:
            raise DomainError("conditioning event {xi > y} has probability 0")
        if self.side == "below" and not v < 1.0:
            raise DomainError("conditioning event {xi <= y} has probability 0")

    @property
    def probability(self) -> float:
        v = tail_V(self.model, self.y)
        return v if self.side == "above" else 1.0 - v


def conditioned_inverse_cdf(model: JumpModel, u, lo: float = -math.inf, hi: float = math.inf):
    """Inverse-CDF draws of ``xi`` conditioned on ``lo < xi <= hi``.

    ``u in [0, 1)`` is mapped linearly onto the tail-probability interval
    ``[V(hi), V(lo))``, so the result is exact for any band.
    """
    u = np.asarray(u, dtype=float)
    v_lo = tail_V(model, lo) if math.isfinite(lo) else 1.0
    v_hi = tail_V(model, hi) if math.isfinite(hi) else 0.0
    if not v_lo > v_hi:
        raise DomainError(f"band ({lo}, {hi}] has probability 0")
    v = v_hi + (v_lo - v_hi) * u
    # u = 0 with hi = inf would map to v = 0
    v = np.maximum(v, np.finfo(float).tiny)
    x = (v ** (-1.0 / model.alpha) - model.mu) / model.sigma
    # rounding must not leak draws out of the band
    if math.isfinite(lo):
        x = np.maximum(x, np.nextafter(lo, math.inf))
    if math.isfinite(hi):
        x = np.minimum(x, hi)
    return x


def sample_conditioned(cs: ConditionedSampler, rng: np.random.Generator, size=None):
    """Exact draws from the law of ``xi`` given the sampler's conditioning event."""
    u = rng.random(size)
    if cs.side == "above":
        return conditioned_inverse_cdf(cs.model, u, lo=cs.y)
    return conditioned_inverse_cdf(cs.model, u, hi=cs.y)
