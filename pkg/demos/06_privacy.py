"""
Noise level for private release of curves
=========================================

Adding sigma W to a curve whose derivative has L2 norm at most c gives
(alpha, beta)-privacy once sigma exceeds 2 c sqrt(2 log(2 / beta)) / alpha.
"""

import numpy as np

import wienerdens as wd

for alpha, beta in [(1.0, 0.05), (0.5, 0.05), (1.0, 0.01), (2.0, 0.1)]:
    print(f"alpha {alpha:4.2f} beta {beta:4.2f}: sigma > {wd.min_privacy_sigma(alpha, beta):.4f}")

# Curves must start at zero before release; premask subtracts the value at t = 0.
grid = wd.Grid(101)
raw = 3.0 + np.sin(2 * np.pi * grid.t)
budget = wd.PrivacyBudget(alpha=1.0, beta=0.05, c_x1=1.0)
released = wd.premask(raw, grid) + wd.simulate_wiener(grid, 1.01 * budget.min_sigma, wd.substream(50))
print(f"released curve starts at {released[0]}, noise scale {1.01 * budget.min_sigma:.3f}")
