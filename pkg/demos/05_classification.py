"""
Classifying curves with estimated densities
===========================================

One density per class, each with its own basis and cross-validated (m, K).
A curve goes to class 1 when prior times density is at least as large there.
"""

import numpy as np

import wienerdens as wd

grid = wd.Grid(101)
n = 300
train_y = np.vstack([-2 * grid.t + wd.simulate_wiener(grid, 1.0, wd.substream(40, 0), size=n),
                     2 * grid.t + wd.simulate_wiener(grid, 1.0, wd.substream(40, 1), size=n)])
labels = np.r_[np.zeros(n, int), np.ones(n, int)]

config = wd.TrainConfig(M=10, grid=wd.CvGrid.practical(3, 6), n_eval=3000, seed=1)
clf = wd.train(train_y, labels, sigma=1.0, config=config)
print(f"class 0 uses (m, K) = ({clf.est0.m}, {clf.est0.K}), class 1 uses ({clf.est1.m}, {clf.est1.K})")

test_y = np.vstack([-2 * grid.t + wd.simulate_wiener(grid, 1.0, wd.substream(41, 0), size=100),
                    2 * grid.t + wd.simulate_wiener(grid, 1.0, wd.substream(41, 1), size=100)])
test_lab = np.r_[np.zeros(100, int), np.ones(100, int)]
pred, score = wd.classify(clf, test_y)
print(f"held-out accuracy {np.mean(pred == test_lab):.3f}")
