# %% [markdown]
# Picard iteration for the cubic Schrodinger equation with data that is
# smooth in y, on a 16^3 torus.

# %%
import numpy as np

from dispersive_lab.exponents import EquationParams, ExponentTriple
from dispersive_lab.solver import CauchyDataS, Nonlinearity, Problem, contraction_experiment, picard_solve
from dispersive_lab.spectral import TorusGrid, random_band_limited

# %%
grid = TorusGrid.cube(3, 8.0, 16, 2)
f = random_band_limited(grid, np.random.default_rng(1), 2.0, width=1.5) * 3.0
triples = (ExponentTriple.parse(("inf", 2, 2)), ExponentTriple.parse(("16/3", 4, "16/7")))
prob = Problem("nls", CauchyDataS(f), Nonlinearity(3), EquationParams(3, 2, 2, 1, 3), triples)

# %%
u, rep = picard_solve(prob, 0.2, tol=1e-10)
print("converged", rep.converged, "iterations", len(rep.iterates_gap))
print("gaps", ["%.1e" % g for g in rep.iterates_gap])

# %%
# contraction ratios and the budget with measured constants
for T in (0.4, 0.2, 0.1):
    c = contraction_experiment(prob, T, n_pairs=6, k_max=2.0)
    print(f"T={T} max ratio {c.max_ratio:.3f} budget {c.budget_lhs:.3g} <= {c.budget_rhs:.3g}")
