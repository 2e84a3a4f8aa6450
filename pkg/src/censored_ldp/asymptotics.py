"""Large-deviation approximations for censored heavy-tailed sums.

For ``Y_n = sum_j min(xi_j, M)`` the tail ``P(Y_n > x)`` behaves differently
depending on where ``x`` sits relative to the multiples of ``M``:

* below ``M``: the uncensored hybrid ``H_n(x) = Phi_bar(x/sqrt(n)) + n V(x) 1{x > sqrt(n)}``;
* near ``k M``: ``Pi^k / k! * H_n(x - k M)`` with ``Pi = n V(M)``;
* strictly between ``(k-1) M`` and ``k M``:
  ``Pi^k / k! * sum_j C(k, j) W_{k-j}(x/M - j)``.

``W_k`` is the normalized mass of ``(t_1 ... t_k)**(-alpha-1)`` over the
simplex slice ``{max t_i < 1, sum t_i > z}`` and is computed here by the
one-dimensional recursion ``W_k(z) = alpha int W_{k-1}(z - t) t**(-alpha-1) dt``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .distributions import JumpModel, tail_V
from .errors import DomainError, HardRegimeError, RangeError
from .special import QuadratureSettings, gen_incomplete_beta, integrate_adaptive, normal_tail

__all__ = [
    "K_MAX",
    "GAUSSIAN_C",
    "WalkConfig",
    "Regime",
    "Approximation",
    "s_n",
    "capital_H",
    "W",
    "W1_closed",
    "W2_closed",
    "approx_below",
    "approx_near_multiple",
    "approx_interior",
    "classify_regime",
    "approx_auto",
]

K_MAX = 6
GAUSSIAN_C = 1.2
SOFT_CENSORING_MIN_RATIO = 3.0
H_CAP = 0.2


def s_n(n: int, alpha: float) -> float:
    """Gaussian/single-jump crossover scale ``((alpha - 2) n ln n)**0.5``."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"n must be an integer, got {n!r}")
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2, got {alpha}")
    return math.sqrt((alpha - 2.0) * n * math.log(n))


@dataclass(frozen=True)
class WalkConfig:
    """Number of summands ``n``, censoring level ``M`` and the jump law."""

    n: int
    M: float
    model: JumpModel
    s_n: float = field(init=False)
    Pi_n: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.M) and self.M > 0):
            raise DomainError(f"censoring level M must be a positive real, got {self.M}")
        object.__setattr__(self, "s_n", s_n(self.n, self.model.alpha))
        pi = self.n * tail_V(self.model, self.M)
        if not 0.0 < pi < 1.0:
            raise HardRegimeError(f"n V(M) = {pi:.4g} is outside (0, 1); censoring is not soft")
        object.__setattr__(self, "Pi_n", pi)

    @property
    def alpha(self) -> float:
        return self.model.alpha

    @property
    def censoring_ratio(self) -> float:
        return self.M / self.s_n

    @property
    def soft_censoring_warning(self) -> bool:
        """True when ``M / s_n < 3`` and the asymptotic regime is doubtful."""
        return self.censoring_ratio < SOFT_CENSORING_MIN_RATIO

    @property
    def default_h(self) -> float:
        # h M must dominate s_n; the cap keeps eps = 2h below 1/2 so that
        # every interior band (k - 1 + eps, k - eps) is nonempty
        return min(4.0 * self.s_n / self.M, H_CAP)

    @property
    def default_eps(self) -> float:
        return 2.0 * self.default_h

    @property
    def default_d(self) -> float:
        return 4.0 * math.sqrt(self.n * math.log(self.n))

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "M": self.M,
            "alpha": self.alpha,
            "jump": self.model.spec_string(),
            "s_n": self.s_n,
            "Pi_n": self.Pi_n,
            "M_over_s_n": self.censoring_ratio,
            "eps": self.default_eps,
            "h": self.default_h,
            "d": self.default_d,
            "soft_censoring_warning": self.soft_censoring_warning,
        }


@dataclass(frozen=True)
class Regime:
    tag: str
    k: int = 0
    eps: float = float("nan")
    h: float = float("nan")

    def __str__(self) -> str:
        if self.tag in ("NearMultiple", "Interior"):
            return f"{self.tag}({self.k})"
        return self.tag


@dataclass
class Approximation:
    value: float
    regime: Regime
    terms: list = field(default_factory=list)
    k: int = 0
    diagnostics: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "regime": str(self.regime),
            "k": self.k,
            "terms": [{"label": label, "value": v} for label, v in self.terms],
            "diagnostics": [{"label": label, "value": v} for label, v in self.diagnostics],
        }


def capital_H(n: int, z: float, model: JumpModel) -> float:
    """``Phi_bar(z / sqrt(n)) + n V(z) 1{z > sqrt(n)}``."""
    gauss, jump = _H_parts(n, z, model)
    return gauss + jump


def _H_parts(n: int, z: float, model: JumpModel) -> tuple[float, float]:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    root = math.sqrt(n)
    gauss = normal_tail(z / root)
    jump = n * tail_V(model, z) if z > root else 0.0
    return gauss, jump


# ---------------------------------------------------------------------------
# W_k


def W1_closed(z: float, alpha: float) -> float:
    if not 0.0 < z < 1.0:
        raise DomainError(f"W1 needs z in (0, 1), got {z}")
    return z ** (-alpha) - 1.0


def W2_closed(z: float, alpha: float) -> float:
    """Closed form of ``W_2`` through the generalized incomplete beta function."""
    if not 1.0 < z < 2.0:
        raise DomainError(f"W2 needs z in (1, 2), got {z}")
    a = alpha
    beta = gen_incomplete_beta(1.0 - 1.0 / z, 1.0 / z, -a, 1.0 - a)
    return 1.0 - (z - 1.0) ** (-a) + a * z ** (-2.0 * a) * beta


_CHEB_POINTS = 257
_cache: dict = {}
_cache_lock = threading.RLock()
# cache construction needs W right against the endpoints of each level
_BUILD_SUBDIVISIONS = 2000


def _check_level(k: int, z: float) -> None:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
        raise DomainError(f"k must be a nonnegative integer, got {k!r}")
    if k >= 1 and not (k - 1 < z < k):
        raise DomainError(f"W_{k} is defined on ({k - 1}, {k}), got z={z}")


class _ChebyshevW:
    """Barycentric interpolant of ``W_m`` on ``(m-1, m)``.

    The interpolated quantity is ``W_m(z) * d**(alpha-1) / e**m`` with
    ``d = z - (m-1)`` and ``e = m - z``, which removes the growth at the
    left endpoint and the ``e**m`` vanishing at the right one.
    """

    def __init__(self, m: int, alpha: float, settings: QuadratureSettings):
        self.m = m
        self.alpha = alpha
        j = np.arange(_CHEB_POINTS)
        theta = (2 * j + 1) * math.pi / (2 * _CHEB_POINTS)
        self.nodes = np.cos(theta)
        self.weights = (-1.0) ** j * np.sin(theta)
        z = (m - 1) + 0.5 * (1.0 + self.nodes)
        vals = np.array([_W_direct(m, float(zi), alpha, settings) for zi in z])
        d = z - (m - 1)
        e = m - z
        self.values = vals * d ** (alpha - 1.0) / e**m

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        x = 2.0 * (z - (self.m - 1)) - 1.0
        diff = x[..., None] - self.nodes
        exact = diff == 0.0
        diff[exact] = 1.0
        c = self.weights / diff
        g = (c @ self.values) / c.sum(axis=-1)
        hit = exact.any(axis=-1)
        if np.any(hit):
            g = np.where(hit, self.values[np.argmax(exact, axis=-1)], g)
        d = z - (self.m - 1)
        e = self.m - z
        return g * e**self.m / d ** (self.alpha - 1.0)


def _interpolant(m: int, alpha: float, settings: QuadratureSettings) -> _ChebyshevW:
    build = QuadratureSettings(settings.abs_tol, settings.rel_tol, max(settings.max_subdivisions, _BUILD_SUBDIVISIONS))
    # keyed by the build settings, so nested builds of lower levels share tables
    key = (m, float(alpha), build)
    table = _cache.get(key)
    if table is None:
        # reentrant: building level m builds level m - 1 from inside the lock
        with _cache_lock:
            table = _cache.get(key)
            if table is None:
                table = _ChebyshevW(m, alpha, build)
                _cache[key] = table
    return table


def _inner(m: int, alpha: float, settings: QuadratureSettings):
    """Vectorized evaluator of ``W_m`` used inside the ``W_{m+1}`` integrand."""
    if m == 0:
        return lambda u: np.ones_like(np.asarray(u, dtype=float))
    if m == 1:
        def w1(u):
            u = np.asarray(u, dtype=float)
            out = np.empty_like(u)
            for i, ui in np.ndenumerate(u):
                out[i] = _W_direct(1, float(ui), alpha, settings) if ui < 1.0 else 0.0
            return out

        return w1
    table = _interpolant(m, alpha, settings)

    def wm(u):
        u = np.asarray(u, dtype=float)
        inside = (u > m - 1) & (u < m)
        out = np.zeros_like(u)
        out[inside] = table(u[inside])
        return out

    return wm


def _W_direct(k: int, z: float, alpha: float, settings: QuadratureSettings) -> float:
    if k == 0:
        return 1.0
    inner = _inner(k - 1, alpha, settings)
    lo = z - (k - 1)

    def integrand(t):
        return alpha * inner(z - t) * t ** (-alpha - 1.0)

    # geometric panel edges resolve the steep t**(-alpha-1) factor near lo
    edges = np.geomspace(lo, 1.0, 5) if lo < 0.25 else np.array([lo, 1.0])
    per_panel = QuadratureSettings(
        settings.abs_tol / (len(edges) - 1), settings.rel_tol, settings.max_subdivisions
    )
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate_adaptive(integrand, float(a), float(b), per_panel).value
    return total


def W(k: int, z: float, alpha: float, settings: QuadratureSettings = QuadratureSettings()) -> float:
    """``W_k(z)`` by recursive quadrature; ``W_0 = 1``.

    ``W_1`` and ``W_2`` integrate their inner function exactly by quadrature;
    for ``k >= 3`` the inner ``W_{k-1}`` comes from a cached 257-point
    Chebyshev interpolant built once per ``(k-1, alpha, settings)``.
    """
    _check_level(k, z)
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2, got {alpha}")
    return _W_direct(int(k), float(z), float(alpha), settings)


def _W_or_zero(m: int, z: float, alpha: float, settings: QuadratureSettings) -> float:
    """``W_m(z)`` with the convention that the empty simplex (``z >= m``) gives 0."""
    if m == 0:
        return 1.0
    if z >= m:
        return 0.0
    if z <= m - 1:
        raise DomainError(f"W_{m} argument {z} below its domain ({m - 1}, {m})")
    return W(m, z, alpha, settings)


# ---------------------------------------------------------------------------
# regime formulas


def approx_below(config: WalkConfig, x: float, d: float | None = None, c: float = GAUSSIAN_C) -> Approximation:
    """Uncensored hybrid ``H_n(x)``, valid for ``0 < x <= M - d``."""
    d = config.default_d if d is None else d
    if not 0.0 < x <= config.M - d:
        raise RangeError(f"x={x} is outside (0, M - d] = (0, {config.M - d:.6g}]")
    return _below(config, x, c)


def _below(config: WalkConfig, x: float, c: float) -> Approximation:
    gauss, jump = _H_parts(config.n, x, config.model)
    tag = "Gaussian" if x <= c * config.s_n else "BelowThreshold"
    return Approximation(
        value=gauss + jump,
        regime=Regime(tag),
        terms=[("gaussian", gauss), ("single_jump", jump)],
        k=0,
    )


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")


def approx_near_multiple(config: WalkConfig, k: int, x: float, eps: float | None = None) -> Approximation:
    """``Pi^k / k! * H_n(x - k M)`` for ``|x/M - k| <= eps``."""
    _check_k(k)
    eps = config.default_eps if eps is None else eps
    if abs(x / config.M - k) > eps:
        raise RangeError(f"x/M = {x / config.M:.6g} is outside the band {k} +/- {eps:.6g}")
    return _near(config, k, x, eps)


def _near(config: WalkConfig, k: int, x: float, eps: float) -> Approximation:
    scale = config.Pi_n**k / math.factorial(k)
    gauss, jump = _H_parts(config.n, x - k * config.M, config.model)
    return Approximation(
        value=scale * (gauss + jump),
        regime=Regime("NearMultiple", k, eps=eps),
        terms=[("gaussian", scale * gauss), ("single_jump", scale * jump)],
        k=k,
    )


def approx_interior(
    config: WalkConfig,
    k: int,
    x: float,
    h: float | None = None,
    settings: QuadratureSettings = QuadratureSettings(),
) -> Approximation:
    """``Pi^k / k! * sum_j C(k, j) W_{k-j}(x/M - j)`` for ``x/M in (k-1+h, k-h)``."""
    _check_k(k)
    h = config.default_h if h is None else h
    u = x / config.M
    if not (k - 1 + h < u < k - h):
        raise RangeError(f"x/M = {u:.6g} is outside ({k - 1 + h:.6g}, {k - h:.6g})")
    return _interior(config, k, x, settings, h)


def _interior(config: WalkConfig, k: int, x: float, settings: QuadratureSettings, h: float = float("nan")) -> Approximation:
    scale = config.Pi_n**k / math.factorial(k)
    u = x / config.M
    terms = []
    for j in range(k + 1):
        w = _W_or_zero(k - j, u - j, config.alpha, settings)
        terms.append((f"j={j}", scale * math.comb(k, j) * w))
    return Approximation(
        value=math.fsum(v for _, v in terms),
        regime=Regime("Interior", k, h=h),
        terms=terms,
        k=k,
    )


def classify_regime(
    config: WalkConfig,
    x: float,
    eps: float | None = None,
    h: float | None = None,
    d: float | None = None,
    c: float = GAUSSIAN_C,
) -> Regime:
    """Partition of ``x > 0`` into the Gaussian, below-threshold, near-multiple and interior bands.

    Near-multiple bands ``|x/M - k| <= eps`` are closed; everything else is
    half-open.
    """
    h = config.default_h if h is None else h
    eps = config.default_eps if eps is None else eps
    d = config.default_d if d is None else d
    if not (0.0 < h <= eps <= 0.5):
        raise DomainError(f"need 0 < h <= eps <= 1/2, got h={h}, eps={eps}")
    if not x > 0:
        raise DomainError("x must be positive")
    M = config.M
    if x <= (1.0 - eps) * M and x <= M - d:
        tag = "Gaussian" if x <= c * config.s_n else "BelowThreshold"
        return Regime(tag, 0, eps, h)
    u = x / M
    k = int(round(u))
    if k >= 1 and abs(u - k) <= eps:
        return Regime("NearMultiple", k, eps, h)
    return Regime("Interior", max(1, math.ceil(u)), eps, h)


def approx_auto(
    config: WalkConfig,
    x: float,
    eps: float | None = None,
    h: float | None = None,
    k_max: int = K_MAX,
    settings: QuadratureSettings = QuadratureSettings(),
) -> Approximation:
    """Classify ``x`` and evaluate the matching formula.

    In an overlap zone, where ``x`` is in a near-multiple band and also in an
    interior band, the near-multiple value is returned and the interior value
    is attached as a diagnostic.
    """
    h = config.default_h if h is None else h
    eps = config.default_eps if eps is None else eps
    if not x > 0:
        raise DomainError("x must be positive")
    if x >= (k_max + 0.5) * config.M:
        raise RangeError(f"x/M = {x / config.M:.6g} is beyond the configured cap k_max + 1/2 = {k_max + 0.5}")
    regime = classify_regime(config, x, eps, h)
    u = x / config.M
    if regime.tag in ("Gaussian", "BelowThreshold"):
        out = _below(config, x, GAUSSIAN_C)
    elif regime.tag == "NearMultiple":
        k = regime.k
        out = _near(config, k, x, eps)
        # interior band on either side of k M
        for kk in (k, k + 1):
            if kk >= 2 and kk - 1 + h < u < kk - h:
                alt = _interior(config, kk, x, settings, h)
                out.diagnostics.append((f"interior_k={kk}", alt.value))
    else:
        k = regime.k
        if k == 1:
            # the interior expansion needs k >= 2; the uncensored hybrid covers this band
            out = _below(config, x, GAUSSIAN_C)
            out.diagnostics.append(("interior_k=1", _interior(config, 1, x, settings, h).value))
            out.k = 1
        else:
            out = _interior(config, k, x, settings, h)
    out.regime = Regime(regime.tag, regime.k, eps, h)
    return out
