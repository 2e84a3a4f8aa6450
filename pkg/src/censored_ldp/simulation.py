"""Monte Carlo estimates of ``P(Y_n > x)`` for censored heavy-tailed walks.

The stratified estimator splits on ``nu = #{j : xi_j > y}``. The stratum
weights ``P(nu = j)`` are binomial and computed to a few ulp; only
the conditional exceedance probabilities are simulated. Inside a stratum, the
``j`` large jumps are further stratified by the band of ``(y, U] + (U, inf)``
each falls in, one draw per band configuration per sample.

Randomness is counter based: the uniforms of sample ``i`` in stratum ``j``
come from a Philox stream keyed by ``(seed, j)`` and started at counter
``i * stride``. Results therefore do not depend on block size or on how many
worker threads run the blocks.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np
from scipy import stats

from .asymptotics import K_MAX, WalkConfig
from .distributions import JumpModel, tail_V
from .errors import DomainError, StratumOverflow

__all__ = [
    "DEFAULT_SEED",
    "MCConfig",
    "Stratum",
    "Estimate",
    "default_seed",
    "stratum_weights",
    "estimate_plain",
    "estimate_stratified",
    "simulate_uncensored_tail",
    "oracle_W_simplex",
]

DEFAULT_SEED = 20240601
SEED_ENV = "CENSORED_LDP_SEED"
_PLAIN_STREAM = 2**32 - 1
# threshold cap relative to x for points well below M
X_FRACTION = 0.25
# reduction granularity, in samples
_CHUNK = 256


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise DomainError(f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass(frozen=True)
class MCConfig:
    samples: int = 10**5
    seed: int = field(default_factory=default_seed)
    y_factor: float = 0.1
    k_cap: int = K_MAX + 2
    workers: int = 1
    jump_bands: int = 9
    block_size: int = 256
    debug: bool = False

    def __post_init__(self):
        if self.samples < 10**3:
            raise DomainError("samples per stratum must be at least 1000")
        if not 0.0 < self.y_factor < 1.0:
            raise DomainError("y_factor must lie in (0, 1)")
        if self.k_cap < 0:
            raise DomainError("k_cap must be nonnegative")
        if self.workers < 1 or self.block_size < 1:
            raise DomainError("workers and block_size must be positive")
        if self.jump_bands < 0:
            raise DomainError("jump_bands must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Stratum:
    """One ``nu = j`` stratum.

    ``by_top[i]`` is the part of ``cond_p`` coming from configurations with
    ``i`` jumps in the top band, which for a censored walk means ``i`` jumps
    above ``M``.
    """

    j: int
    weight: float
    cond_p: float
    cond_se: float
    by_top: tuple = ()

    @property
    def contribution(self) -> float:
        return self.weight * self.cond_p


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    std_err: float
    method: str
    x: float
    strata: tuple = ()
    bias_bound: float = 0.0
    y: float = float("nan")
    samples: int = 0

    @property
    def rel_se(self) -> float:
        return self.std_err / self.p_hat if self.p_hat > 0 else math.inf

    def top_share(self, j: int, i: int) -> float:
        """Fraction of ``p_hat`` carried by stratum ``j`` with ``i`` top-band jumps."""
        for s in self.strata:
            if s.j == j:
                return s.weight * s.by_top[i] / self.p_hat if self.p_hat > 0 else 0.0
        return 0.0

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "method": self.method,
            "bias_bound": self.bias_bound,
            "y": self.y,
            "samples": self.samples,
            "strata": [
                {
                    "j": s.j,
                    "weight": s.weight,
                    "cond_p": s.cond_p,
                    "cond_se": s.cond_se,
                    "by_top": list(s.by_top),
                }
                for s in self.strata
            ],
        }


def stratum_weights(n: int, v: float, k_cap: int) -> tuple[np.ndarray, float]:
    """Exact ``P(nu = j)``, ``j <= k_cap``, for ``nu ~ Binomial(n, v)``, and the
    bound ``(n v)**(k_cap+1) / (k_cap+1)!`` on ``P(nu > k_cap)``."""
    if not 0.0 < v < 1.0:
        raise DomainError(f"stratification probability V(y) must lie in (0, 1), got {v}")
    j = np.arange(min(k_cap, n) + 1)
    # scipy's pmf works in log space with a saddle-point deviance term,
    # accurate to a few ulp where naive log-gamma differences lose 1e-11
    w = stats.binom.pmf(j, n, v)
    if not np.all(np.isfinite(w)):
        raise StratumOverflow("non-finite stratum weight")
    if not np.any(w > 0):
        raise StratumOverflow("all stratum weights underflow")
    bound = math.exp((k_cap + 1) * math.log(n * v) - math.lgamma(k_cap + 2)) if k_cap < n else 0.0
    return w, bound


# ---------------------------------------------------------------------------
# band configurations of the large jumps


@dataclass(frozen=True)
class _Plan:
    """Sampling layout of one stratum."""

    j: int
    n_bulk: int
    slot_v_lo: np.ndarray  # (C, j) tail probability at the lower band edge
    slot_v_hi: np.ndarray  # (C, j) tail probability at the upper band edge
    slot_lo: np.ndarray  # (C, j) lower band edge
    slot_hi: np.ndarray  # (C, j) upper band edge
    config_w: np.ndarray  # (C,) probability of each configuration given nu = j
    top_count: np.ndarray  # (C,) number of jumps in the top band
    uniforms: int
    stride: int


def _band_edges(y: float, upper: float, bands: int) -> np.ndarray:
    if bands == 0:
        return np.array([y, math.inf])
    return np.concatenate([np.linspace(y, upper, bands + 1), [math.inf]])


def _plan(model: JumpModel, n: int, j: int, y: float, upper: float, bands: int) -> _Plan:
    # fewer bands for large j keeps the large-jump draws a fraction of the walk
    budget = max(64, n // 4)
    while bands > 0 and math.comb(j + bands, bands) * j > budget:
        bands -= 1
    edges = _band_edges(y, upper, bands)
    v_edges = np.array([tail_V(model, e) if math.isfinite(e) else 0.0 for e in edges])
    v_y = v_edges[0]
    q = (v_edges[:-1] - v_edges[1:]) / v_y
    nb = len(q)
    configs = list(combinations_with_replacement(range(nb), j)) if j > 0 else [()]
    idx = np.array(configs, dtype=np.int64).reshape(len(configs), j)
    # multinomial probability of each multiset of bands
    cw = np.empty(len(configs))
    for c, cfg in enumerate(configs):
        counts = np.bincount(np.asarray(cfg, dtype=np.int64), minlength=nb)
        logp = math.lgamma(j + 1) - sum(math.lgamma(cnt + 1) for cnt in counts)
        with np.errstate(divide="ignore"):
            logp += float(np.sum(counts * np.log(np.where(counts > 0, q, 1.0))))
        cw[c] = math.exp(logp)
    top = (idx == nb - 1).sum(axis=1) if j > 0 else np.zeros(1, dtype=np.int64)
    uniforms = (n - j) + len(configs) * j
    return _Plan(
        j=j,
        n_bulk=n - j,
        slot_v_lo=v_edges[idx],
        slot_v_hi=v_edges[idx + 1],
        slot_lo=edges[idx],
        slot_hi=edges[idx + 1],
        config_w=cw,
        top_count=top,
        uniforms=uniforms,
        stride=-(-uniforms // 4),
    )


def _stream_key(seed: int, stream: int) -> np.ndarray:
    return np.random.SeedSequence([seed, stream]).generate_state(2, np.uint64)


def _uniform_block(key: np.ndarray, stride: int, start: int, count: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=key, counter=start * stride))
    return gen.random((count, 4 * stride))


def _bulk_sums(model: JumpModel, u: np.ndarray, v_y: float) -> np.ndarray:
    """Row sums of ``u.shape[1]`` draws of ``xi`` given ``xi <= y``; overwrites ``u``."""
    m = u.shape[1]
    if m == 0:
        return np.zeros(u.shape[0])
    u *= 1.0 - v_y
    u += v_y
    np.power(u, -1.0 / model.alpha, out=u)
    return (u.sum(axis=1) - m * model.mu) / model.sigma


def _banded_draws(model: JumpModel, u: np.ndarray, plan: _Plan) -> np.ndarray:
    v = plan.slot_v_hi + (plan.slot_v_lo - plan.slot_v_hi) * u
    v = np.maximum(v, np.finfo(float).tiny)
    x = (v ** (-1.0 / model.alpha) - model.mu) / model.sigma
    x = np.maximum(x, np.nextafter(plan.slot_lo, math.inf))
    return np.minimum(x, plan.slot_hi)


def _chunk_sums(a: np.ndarray) -> np.ndarray:
    """Sums over consecutive ``_CHUNK``-sample slices along the first axis.

    Blocks start at multiples of ``_CHUNK``, so every chunk is reduced the
    same way whatever the block size; adding the chunk sums in sample order
    then gives totals that are bit-identical across block sizes and workers.
    """
    return np.stack([a[i : i + _CHUNK].sum(axis=0) for i in range(0, len(a), _CHUNK)])


def _run_blocks(fn, samples: int, block_size: int, workers: int) -> list:
    block_size = -(-block_size // _CHUNK) * _CHUNK
    starts = list(range(0, samples, block_size))
    jobs = [(s, min(block_size, samples - s)) for s in starts]
    if workers == 1 or len(jobs) == 1:
        return [fn(s, c) for s, c in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _stratum_moments(
    model: JumpModel,
    M: float,
    n: int,
    plan: _Plan,
    xs: np.ndarray,
    v_y: float,
    mc: MCConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sums over samples of ``f``, ``f**2`` and of ``f`` split by top-band count, per x.

    ``f`` is the configuration-weighted exceedance indicator of one sample.
    """
    key = _stream_key(mc.seed, plan.j)
    n_top = plan.j + 1
    group = np.zeros((len(plan.config_w), n_top))
    group[np.arange(len(plan.config_w)), plan.top_count] = plan.config_w

    def block(start: int, count: int):
        u = _uniform_block(key, plan.stride, start, count)
        bulk = _bulk_sums(model, u[:, : plan.n_bulk], v_y)
        n_cfg, j = plan.slot_lo.shape
        if j > 0:
            uj = u[:, plan.n_bulk : plan.n_bulk + n_cfg * j].reshape(count, n_cfg, j)
            big = _banded_draws(model, uj, plan)
            large = np.minimum(big, M).sum(axis=2)
        else:
            big = np.zeros((count, 1, 0))
            large = np.zeros((count, 1))
        y_sum = bulk[:, None] + large
        if mc.debug:
            s_sum = bulk[:, None] + big.sum(axis=2)
            assert np.all(y_sum <= s_sum + 1e-9 * np.abs(s_sum) + 1e-9), "censored sum exceeds uncensored sum"
            assert np.all(y_sum <= n * M), "censored sum exceeds n M"
        hit = (y_sum[:, :, None] > xs[None, None, :]).astype(float)  # (b, C, X)
        f = np.einsum("bcx,c->bx", hit, plan.config_w)
        per_top = np.einsum("bcx,ct->btx", hit, group)
        return _chunk_sums(f), _chunk_sums(f * f), _chunk_sums(per_top)

    parts = _run_blocks(block, mc.samples, mc.block_size, mc.workers)
    s1 = np.concatenate([p[0] for p in parts]).sum(axis=0)
    s2 = np.concatenate([p[1] for p in parts]).sum(axis=0)
    split = np.concatenate([p[2] for p in parts]).sum(axis=0)
    return s1, s2, split


def _stratified(model: JumpModel, n: int, M: float, xs: np.ndarray, y: float, upper: float, mc: MCConfig, method: str):
    v_y = tail_V(model, y)
    weights, bound = stratum_weights(n, v_y, mc.k_cap)
    N = mc.samples
    p = np.zeros(len(xs))
    var = np.zeros(len(xs))
    strata_per_x = [[] for _ in xs]
    for j, w in enumerate(weights):
        plan = _plan(model, n, j, y, upper, mc.jump_bands)
        s1, s2, split = _stratum_moments(model, M, n, plan, xs, v_y, mc)
        mean = s1 / N
        # sample variance of the per-sample weighted indicator
        sv = np.maximum(s2 - N * mean * mean, 0.0) / (N - 1)
        se = np.sqrt(sv / N)
        p += w * mean
        var += w * w * se * se
        for i in range(len(xs)):
            strata_per_x[i].append(
                Stratum(j=j, weight=float(w), cond_p=float(mean[i]), cond_se=float(se[i]), by_top=tuple(split[:, i] / N))
            )
    return [
        Estimate(
            p_hat=float(min(max(p[i], 0.0), 1.0)),
            std_err=float(math.sqrt(var[i])),
            method=method,
            x=float(xs[i]),
            strata=tuple(strata_per_x[i]),
            bias_bound=bound,
            y=y,
            samples=N,
        )
        for i in range(len(xs))
    ]


def _as_grid(x) -> tuple[np.ndarray, bool]:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise DomainError("x must be a finite real or a 1-d sequence of finite reals")
    return arr, np.ndim(x) == 0


def _t_half(model: JumpModel, n: int) -> float:
    """The level ``t`` with ``n V(t) = 1/2``."""
    return (max(0.5 / n, 1e-300) ** (-1.0 / model.alpha) - model.mu) / model.sigma


def estimate_stratified(config: WalkConfig, x: float | Sequence[float], mc: MCConfig = MCConfig()):
    """Stratified estimate of ``P(Y_n > x)``.

    The threshold is ``y = y_factor * M`` unless ``X_FRACTION * x`` is smaller;
    all such low points share ``y = X_FRACTION * min(x)``. Either way ``y`` is
    floored at the level where ``n V(y) = 1/2``. Well below ``M`` the event is
    driven by one jump of size about ``x``, which must count as "large" for
    the stratification to see it. Points sharing a threshold share one set of
    simulated walks.

    Unbiased for ``P(Y_n > x, nu <= k_cap)``; ``bias_bound`` bounds the
    omitted ``nu > k_cap`` mass. A sequence of ``x`` values returns a list.
    """
    xs, scalar = _as_grid(x)
    floor = _t_half(config.model, config.n)
    y_top = mc.y_factor * config.M
    low = X_FRACTION * xs < y_top
    ys = np.full(len(xs), y_top)
    if low.any():
        # one shared threshold for all low points keeps the cost at two runs
        ys[low] = X_FRACTION * xs[low].min()
    ys = np.maximum(ys, floor)
    out: list = [None] * len(xs)
    for y in np.unique(ys):
        idx = np.flatnonzero(ys == y)
        part = _stratified(config.model, config.n, config.M, xs[idx], float(y), config.M, mc, "stratified")
        for i, est in zip(idx, part):
            out[i] = est
    return out[0] if scalar else out


def simulate_uncensored_tail(n: int, x: float | Sequence[float], model: JumpModel, mc: MCConfig = MCConfig()):
    """Stratified estimate of ``P(S_n > x)`` for the uncensored walk.

    The threshold is ``y = max(y_factor * max(x), t_half)`` where
    ``n V(t_half) = 1/2``, so the strata above ``k_cap`` stay negligible even
    for small or negative ``x``.
    """
    xs, scalar = _as_grid(x)
    if n < 1:
        raise DomainError("n must be positive")
    y = max(mc.y_factor * float(xs.max()), _t_half(model, n))
    upper = 2.0 * max(float(xs.max()), y)
    out = _stratified(model, n, math.inf, xs, y, upper, mc, "stratified")
    return out[0] if scalar else out


def estimate_plain(config: WalkConfig, x: float | Sequence[float], mc: MCConfig = MCConfig()):
    """Crude frequency estimate of ``P(Y_n > x)`` over ``mc.samples`` walks."""
    xs, scalar = _as_grid(x)
    model, n, M = config.model, config.n, config.M
    stride = -(-n // 4)
    key = _stream_key(mc.seed, _PLAIN_STREAM)

    def block(start: int, count: int):
        u = _uniform_block(key, stride, start, count)[:, :n]
        # 1 - U lies in (0, 1]
        np.subtract(1.0, u, out=u)
        np.power(u, -1.0 / model.alpha, out=u)
        u -= model.mu
        u /= model.sigma
        s_sum = u.sum(axis=1) if mc.debug else None
        np.minimum(u, M, out=u)
        y_sum = u.sum(axis=1)
        if mc.debug:
            assert np.all(y_sum <= s_sum + 1e-9 * np.abs(s_sum) + 1e-9), "censored sum exceeds uncensored sum"
            assert np.all(y_sum <= n * M), "censored sum exceeds n M"
        return (y_sum[:, None] > xs[None, :]).sum(axis=0)

    hits = np.sum(_run_blocks(block, mc.samples, mc.block_size, mc.workers), axis=0)
    N = mc.samples
    out = []
    for i, xv in enumerate(xs):
        p = hits[i] / N
        out.append(
            Estimate(
                p_hat=float(p),
                std_err=float(math.sqrt(p * (1.0 - p) / N)),
                method="plain",
                x=float(xv),
                samples=N,
            )
        )
    return out[0] if scalar else out


def oracle_W_simplex(k: int, z: float, alpha: float, samples: int = 10**6, seed: int | None = None) -> tuple[float, float, float]:
    """Importance-sampling estimate of ``W_k(z)`` straight from its simplex definition.

    Coordinates are drawn i.i.d. with density proportional to
    ``t**(-alpha-1)`` on ``(t_min, 1)``; the indicator of ``sum t > z`` times
    ``(t_min**-alpha - 1)**k`` is unbiased for the integral over the part of
    the simplex with all ``t_i > t_min``. Returns ``(value, std_err, bias_bound)``.
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    if not (k - 1 < z < k):
        raise DomainError(f"z must lie in ({k - 1}, {k}), got {z}")
    if samples < 2:
        raise DomainError("need at least two samples")
    seed = default_seed() if seed is None else seed
    gap = z - (k - 1)
    # every point of the simplex slice has t_i > gap
    t_min = max(1e-6, gap)
    c = t_min ** (-alpha) - 1.0
    bias_bound = 0.0
    if t_min > gap:
        # mass with some t_i in (gap, t_min] and the others in (gap, 1)
        bias_bound = k * (gap ** (-alpha) - t_min ** (-alpha)) * (gap ** (-alpha) - 1.0) ** (k - 1)
    rng = np.random.Generator(np.random.Philox(key=_stream_key(seed, 2**32 + k)))
    hits = 0
    done = 0
    chunk = 1 << 20
    while done < samples:
        m = min(chunk, samples - done)
        u = rng.random((m, k))
        t = (t_min ** (-alpha) - c * u) ** (-1.0 / alpha)
        hits += int(np.count_nonzero(t.sum(axis=1) > z))
        done += m
    p = hits / samples
    scale = c**k
    return scale * p, scale * math.sqrt(p * (1.0 - p) / samples), bias_bound
