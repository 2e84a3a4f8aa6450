"""One approximation per deviation regime, chosen automatically."""
from __future__ import annotations

from censored_ldp import WalkConfig, approx_auto, make_standardized_pareto

# n = 10**4 jumps censored at M = 3000, about ten times the crossover scale s_n.
config = WalkConfig(10**4, 3000.0, make_standardized_pareto(3.0))
print(f"s_n = {config.s_n:.2f}, Pi_n = n V(M) = {config.Pi_n:.4e}, M/s_n = {config.censoring_ratio:.2f}")
print(f"default h = {config.default_h}, eps = {config.default_eps}, d = {config.default_d:.1f}\n")

# Below M the sum behaves like an uncensored walk: a Gaussian part plus one
# big jump. Around k M it takes k censored jumps; between multiples of M the
# W_k functions describe how k - j censored jumps and j partial ones combine.
print(f"{'x/M':>6}  {'regime':<16} {'P(Y_n > x)':>12}  terms")
for u in (0.1, 0.3, 1.0, 1.3, 1.5, 2.0, 2.5, 3.0, 3.5):
    a = approx_auto(config, u * config.M)
    terms = ", ".join(f"{label}={v:.2e}" for label, v in a.terms)
    extra = "".join(f"  [{label}: {v:.2e}]" for label, v in a.diagnostics)
    print(f"{u:>6}  {str(a.regime):<16} {a.value:>12.4e}  {terms}{extra}")

# Each extra multiple of M costs roughly another factor Pi_n.
