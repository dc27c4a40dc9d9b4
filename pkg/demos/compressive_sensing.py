"""Compressive sensing in a few lines.

A noiseless linear measurement y = X c with three active coefficients is
handed to the gradient-support-pursuit solver as a plain least-squares
program; the solver returns both the identified variables and their
fitted values.
"""

import numpy as np

import sco
from sco import models

# planted ground truth: ten features, three informative
rng = np.random.default_rng(0)
X = rng.standard_normal((100, 10))
coef = np.zeros(10)
coef[[3, 4, 7]] = [9.71, 19.16, 13.53]
y = X @ coef
print("Effective variables:", np.flatnonzero(coef),
      "coefficients:", np.around(coef[np.flatnonzero(coef)], 2))

# the objective is an ordinary function of the parameter vector
oracle = sco.build_objective(lambda params: sco.norm(y - X @ params), 10)
problem = sco.ScoProblem(p=10, s=3, oracle=oracle, n=100)
solution = sco.solve("grasp", problem)

print("Estimated variables:", solution.support,
      "estimated coefficients:", np.around(solution.params[solution.support], 2))

# the same model is available pre-packaged for benchmarking
spec = models.ModelSpec("linear", 100, 10, 3, float("inf"), seed=0)
dataset = models.generate(spec)
fit = sco.solve("scope", models.build_problem(dataset))
print("zoo instance, scope solver:", fit.support, "objective", f"{fit.objective:.2e}")
