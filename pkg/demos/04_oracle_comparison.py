"""
Comparing estimates with the true density
=========================================

For a known signal law the density has a closed form as an expectation over
signals. The built-in settings use Monte Carlo over signal draws, with a
standard error per evaluation point.
"""

import numpy as np

import wienerdens as wd

model = wd.ModelSpec.from_setting("i")
grid = wd.Grid(101)
y, _ = wd.simulate_sample(model, 500, grid, wd.substream(30))
basis = wd.estimate_basis(y, 20)
rep = wd.select(y, basis, wd.CvGrid.practical(4, 8), model.sigma, rng=wd.substream(31), n_eval=5000)
est = wd.fit_dm(y, basis, *rep.chosen, sigma=model.sigma)
dn_K = wd.select_dn(y, basis, range(1, 5), model.sigma, rng=wd.substream(31), n_eval=5000).chosen[1]
dn = wd.fit_dn(y, basis, dn_K, model.sigma)

v = wd.simulate_wiener(grid, model.sigma, wd.substream(32), size=500)
truth, se = wd.true_density(wd.SimModel(model, R=50_000), v, model.sigma, return_se=True)
print(f"oracle relative MC error: median {np.median(se / truth):.4f}")

for name, vals in (("DM", wd.eval_dm_fallback(est, v)[0]), ("DN", wd.eval_dn_fallback(dn, v)[0])):
    med, q1, q3 = wd.squared_error_summary(vals, truth)
    print(f"{name}: 1e4 x squared error median {1e4 * med:7.1f} [{1e4 * q1:6.1f}, {1e4 * q3:7.1f}]")

# A point mass with constant derivative has an explicit density.
law = wd.PointMass(lambda t: np.ones_like(t))
print(f"f(v = t) = {wd.true_density(law, grid.t, 1.0):.6f}, exp(1/2) = {np.exp(0.5):.6f}")
