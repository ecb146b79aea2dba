"""Long-time behavior on an interval: the parabolic flow forgets its
initial bump and lands on the steady profile, which for affine boundary
data is the straight line u(x) = x -- independently of h."""

import numpy as np

from carnotpde.experiments import long_time_experiment
from carnotpde.fields import ScalarField
from carnotpde.grid import GridSpec
from carnotpde.groups import euclidean_group
from carnotpde.solver import (
    CauchyDirichletProblem,
    SolverConfig,
    solve_elliptic_steady,
)

grid = GridSpec(box=((0, 1),), cells=(64,), horizon=1.0)
psi = ScalarField.from_expression("x1 + 0.8*x1*(1 - x1)", 1)   # bumped start
g = ScalarField.from_expression("x1", 1)                       # affine walls
config = SolverConfig(cfl_factor=1.0, steady_tolerance=1e-4)

for h in (1.5, 2.0, 3.0):
    problem = CauchyDirichletProblem(euclidean_group(1), grid, h, psi, g)
    report = long_time_experiment(problem, config)
    measured = dict(report.measured)
    print(f"h = {h}:  reached the steady regime at t = {measured['t_large']:.3f}")
    print(f"   gap to the elliptic fixed point: {measured['steady_gap']:.2e}")
    print(f"   worst increment / decay bound:   "
          f"{measured['worst_increment_over_bound']:.3f}")

# the elliptic fixed point itself, against the exact line
problem = CauchyDirichletProblem(euclidean_group(1), grid, 2.0, psi, g)
steady = solve_elliptic_steady(problem, config)
x = grid.coords()[:, 0]
print()
print("steady profile vs u(x) = x:", np.abs(steady.values - x).max())
