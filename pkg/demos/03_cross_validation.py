"""
Choosing (m, K) by cross-validation
===================================

The criterion is the integral of the squared estimate against the noise law
minus twice the mean leave-one-out value. A single fit at the largest pair
serves the whole grid.
"""

import wienerdens as wd

model = wd.ModelSpec.from_setting("i")
grid = wd.Grid(101)
y, _ = wd.simulate_sample(model, 500, grid, wd.substream(20))
basis = wd.estimate_basis(y, 20)

report = wd.select(y, basis, wd.CvGrid.practical(4, 8), model.sigma, weight="soft",
                   rng=wd.substream(21), n_eval=5000)
print(f"chosen (m, K) = {report.chosen} [{report.status}]")
print(" m  K        CV  neg-loo  neg-eval  flags")
for r in report.rows:
    flags = ("discarded " if r.discarded else "") + ("local-min" if r.local_min else "")
    print(f"{r.m:2d} {r.K:2d} {r.cv:9.4f} {r.frac_neg_loo:8.3f} {r.frac_neg_eval:9.3f}  {flags}")

# The baseline estimator uses the cube {0..K}^K of indices; only small K is feasible.
dn = wd.select_dn(y, basis, range(1, 5), model.sigma, rng=wd.substream(21), n_eval=5000)
print(f"baseline chooses K = {dn.chosen[1]}")
