"""
From volatility clustering to a dynamic correlation path
========================================================

Simulate two ARMA(1,1)-GARCH(1,1) series with correlated shocks, fit each one,
then run DCC on the standardized residuals. The true correlation follows a
slow sine wave, so there is something for the DCC path to track.

    python demos/03_volatility_and_dcc.py
"""
import numpy as np

from corrshift.dcc import fit_dcc, smooth_series
from corrshift.garch import GarchSpec, fit_garch

rng = np.random.default_rng(3)
T = 2000
true_rho = 0.4 + 0.35 * np.sin(np.arange(T) * 2 * np.pi / 700)

z1 = rng.normal(size=T)
z2 = true_rho * z1 + np.sqrt(1 - true_rho**2) * rng.normal(size=T)

# conditional variance, one recursion per asset
def garch_path(z, omega, alpha, beta, phi=0.2, theta=-0.1):
    h = omega / (1 - alpha - beta)
    e_prev = x_prev = 0.0
    out = np.empty_like(z)
    for t, zt in enumerate(z):
        e = np.sqrt(h) * zt
        out[t] = x = phi * x_prev + e + theta * e_prev
        h = omega + alpha * e * e + beta * h
        x_prev, e_prev = x, e
    return out

r1 = garch_path(z1, 0.05, 0.10, 0.85)
r2 = garch_path(z2, 0.02, 0.05, 0.93)

spec = GarchSpec(1, 1, 1, 1)
fits = [fit_garch(r, spec, scale=1.0) for r in (r1, r2)]
for name, f in zip(("asset 1", "asset 2"), fits):
    print(name)
    for pname, est, se in zip(f.param_names, f.params, f.bse):
        print(f"   {pname:8s} {est:8.4f}  ({se:.4f})")
    print(f"   persistence {f.persistence:.3f}, loglik {f.loglik:.1f}")

eps = np.column_stack([f.std_resid for f in fits])
dcc = fit_dcc(eps)
print(f"\nDCC a = {dcc.a:.4f}, b = {dcc.b:.4f}")

rho = dcc.rho(0, 1)
smooth = smooth_series(rho, 5)
err = np.abs(smooth - true_rho)
print(f"corr(smoothed path, truth) = {np.corrcoef(smooth, true_rho)[0, 1]:.3f}")
print(f"mean |smoothed - truth|   = {err.mean():.3f}")

# crude text plot, every 100th day: "|" is the truth, "o" the smoothed DCC path
for t in range(0, T, 100):
    col = int((smooth[t] + 1) * 30)
    mark = int((true_rho[t] + 1) * 30)
    line = [" "] * 61
    line[mark] = "|"
    line[col] = "o"
    print(f"{t:5d} " + "".join(line))
