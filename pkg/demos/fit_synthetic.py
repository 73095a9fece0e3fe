"""Fit the intensity ratio to a synthetic deployment and predict its coverage."""
from gridppp.fitting import fit_model, synthetic_deployment

data = synthetic_deployment(2.3, 2000, seed=0)
fm = fit_model(data)
print(f"points: {len(data)}  kappa_hat: {fm.kappa_avg:.4f}  rho_lambda_hat: {fm.rho_lambda_hat:.3f}")
for t, r in zip(range(-10, 21, 5), fm.predict_coverage(range(-10, 21, 5))):
    print(f"T = {t:3d} dB  P_cov = {r.p_cov:.4f}")
