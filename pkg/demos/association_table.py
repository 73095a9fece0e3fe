"""Print the PPP association probability and its closed-form bounds over rho."""
import numpy as np

from gridppp.association import assoc_bounds, assoc_prob_ppp

print(f"{'rho':>5} {'lower':>8} {'P(A_p)':>8} {'upper':>8}")
for rho in np.arange(0.2, 2.01, 0.2):
    lo, up = assoc_bounds(rho)
    print(f"{rho:5.1f} {lo.p_assoc_ppp:8.4f} {assoc_prob_ppp(rho):8.4f} {up.p_assoc_ppp:8.4f}")
