"""Compare the analytic coverage curve with a short Monte Carlo run.

Usage: python demos/coverage_vs_simulation.py [rho_lambda] [alpha] [trials]
"""
import sys

from gridppp.coverage import CoverageQuery, coverage_curve
from gridppp.model import ModelConfig, PowerLaw, SirThreshold
from gridppp.montecarlo import estimate_coverage

rho_lambda = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
alpha = float(sys.argv[2]) if len(sys.argv) > 2 else 4.0
trials = int(sys.argv[3]) if len(sys.argv) > 3 else 20_000

t_db = list(range(-10, 21, 5))
q = CoverageQuery(rho_lambda, 1.0, alpha)
lower = coverage_curve(q, t_db, "lower")
exact = coverage_curve(q, t_db, "exact")
upper = coverage_curve(q, t_db, "upper", w_n=1)
mc = estimate_coverage(ModelConfig(1.0, rho_lambda, alpha=alpha), PowerLaw(alpha),
                       [SirThreshold.from_db(t) for t in t_db], trials, seed=0)

print(f"{'T[dB]':>6} {'lower':>7} {'exact':>7} {'upper':>7} {'MC':>7} {'95% CI':>17}")
for t, a, b, c, m in zip(t_db, lower, exact, upper, mc):
    print(f"{t:6d} {a.p_cov:7.4f} {b.p_cov:7.4f} {c.p_cov:7.4f} {m.value:7.4f} "
          f"[{m.ci_low:.4f}, {m.ci_high:.4f}]")
