"""
The data-driven basis
=====================

Projection scores are Ito integrals of basis functions against the observed
increments. The basis comes from the eigenvectors of a matrix built from the
sample. Here it is compared with its population version.
"""

import numpy as np

import wienerdens as wd
from wienerdens.oracle import population_basis

model = wd.ModelSpec.from_setting("i")
grid = wd.Grid(101)

_, pop = population_basis(model, 20, grid)
for n in (100, 500, 2000):
    y, _ = wd.simulate_sample(model, n, grid, wd.substream(10, n))
    basis = wd.estimate_basis(y, 20)
    align = [abs(basis.coeffs[j] @ pop[j]) for j in range(3)]
    print(f"n = {n:5d}: |<phi_hat_j, phi_j>| for j = 1..3:", np.round(align, 3))

# Scores of one curve on the first five estimated functions.
y, _ = wd.simulate_sample(model, 1, grid, wd.substream(11))
print("scores:", np.round(wd.coefficient_matrix(y, basis, 5)[0], 4))
