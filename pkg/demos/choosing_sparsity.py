"""Choosing the sparsity level when it is not known in advance.

Solves a warm-started path over a grid of budgets and compares the
information criteria with 5-fold cross-validation on the same data.
"""

import numpy as np

from sco import models
from sco.problem import SolverConfig
from sco.selection import AIC, BIC, SIC, cross_validate, select_by_ic

spec = models.ModelSpec("linear", 200, 100, 5, 5.0, seed=7)
dataset = models.generate(spec)
problem = models.build_problem(dataset, s=5)
grid = list(range(1, 11))

print(f"planted sparsity: {spec.s_true}, support {dataset.support_true}")
for criterion, name in ((AIC, "aic"), (BIC, "bic"), (SIC, "sic")):
    result = select_by_ic(problem, grid, "scope", criterion=criterion)
    print(f"{name}: chose s = {result.chosen_s}  "
          f"(scores {np.round(result.scores, 1)})")

cv = cross_validate(lambda d: models.build_problem(d, s=1), dataset, 5, grid,
                    "scope", SolverConfig(seed=7))
print(f"5-fold cv: chose s = {cv.chosen_s}")
print("chosen support:", cv.chosen.support)
