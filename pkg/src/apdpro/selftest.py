"""Built-in sanity checks behind the ``selftest`` CLI subcommand.

A curated subset of the test suite that runs without pytest: frozen
closed-form values, operator identities, and the solver twin property.
Each check raises AssertionError on failure; the runner prints one line
per check and returns the failure count as the exit status.
"""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np

from . import bench, estimator, pagerank, problem, prox, solvers


def _close(a, b, tol=1e-12):
    assert abs(a - b) <= tol * max(1.0, abs(b)), f"{a!r} != {b!r} (tol {tol})"


def _canonical():
    prob, x_star, y_star = pagerank.make_synthetic_instance(1, 2.0, 1.0)
    ball = problem.feasible_ball(prob, [prob.strict_point])
    constants = problem.derive_constants(prob, ball)
    return prob, constants, x_star, y_star


def check_synthetic_oracle():
    prob, constants, x_star, y_star = _canonical()
    _close(x_star[0], 2.0 - math.sqrt(2.0), 1e-12)
    _close(y_star[0], 1.0 / math.sqrt(2.0), 1e-12)
    _close(constants.c_bar, 2.0)
    _close(constants.ball_radius, 2.0 * math.sqrt(2.0))
    _close(constants.D_X, 4.0 * math.sqrt(2.0))
    _close(constants.D_Y, 2.0)
    _close(constants.L_XY, 2.0)
    assert problem.kkt_residual(prob, x_star, y_star).max() <= 1e-9


def check_prox_operators():
    obj = problem.BlockNormObjective(blocks=((0, 1), (1, 1)), weights=(1.0, 1.0))
    out = prox.block_soft_threshold(np.array([3.0, -0.5]), obj, 1.0)
    assert np.allclose(out, [2.0, 0.0], atol=1e-15)
    ball = (np.zeros(2), 100.0)
    out = prox.prox_f_over_ball(np.array([3.0, -0.5]), 1.0, obj, ball)
    assert np.allclose(out, [2.0, 0.0], atol=1e-12), "large ball reduces to soft threshold"
    slab = prox.DualSlab(lower=1.0, upper=2.0, m=1)
    _close(prox.project_dual_set(np.array([0.5]), slab)[0], 1.0)
    _close(prox.project_dual_set(np.array([3.0]), slab)[0], 2.0)
    out = prox.project_dual_set(np.array([2.0, 2.0]), prox.DualSlab(0.0, 3.0, 2))
    assert np.allclose(out, [1.5, 1.5], atol=1e-12)


def check_estimator_values():
    _close(estimator.h1(1.0, 1.0, 1.0, 0.0), 1.0)
    _close(estimator.h1(1.0, 2.0, 1.0, 1.0), 1.0 / 3.0)
    _close(estimator.h2(4.0, 0.0, 1.0, 1.0, 1.0), 0.25)
    _close(estimator.rho_hat_update(0.0, 1.0, 1, 1.0), 3.0)
    _close(estimator.rho_hat_recursion(3.0, 3.0, 1), 3.0)
    _close(estimator.rho_hat_update(2.0, 0.0, 4, 1.0), 1.6)


def check_stepsize_update():
    assert solvers.stepsize_update(1.0, 1.0, 1.0, 3.0) == (0.5, 2.0, 2.0)
    assert solvers.stepsize_update(0.5, 2.0, 1.0, 6.0) == (0.25, 4.0, 4.0)
    tau, sigma, t = solvers.stepsize_update(0.1, 0.3, 0.3, 0.0)
    assert (tau, sigma, t) == (0.1, 0.3, 1.0), "rho = 0 must be an exact identity"


def check_lagrangian():
    prob, _, x_star, y_star = _canonical()
    _close(problem.eval_lagrangian(prob, np.array([0.0]), np.array([2.0])), 2.0)
    _close(problem.eval_lagrangian(prob, np.array([2.0]), np.array([5.0])), -3.0)
    _close(problem.eval_lagrangian(prob, x_star, y_star), 2.0 - math.sqrt(2.0), 1e-12)


def check_solver_twin():
    prob, constants, x_star, _ = _canonical()
    x0, y0 = np.zeros(1), np.zeros(1)
    a = solvers.apdpro(
        prob, constants, solvers.SolverConfig(variant="apdpro", max_iters=50, disable_estimator=True), x0, y0
    )
    b = solvers.apd_baseline(prob, constants, solvers.SolverConfig(variant="apd", max_iters=50), x0, y0)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y), "estimator-off twin must be bitwise"
    c = solvers.apdpro(prob, constants, solvers.SolverConfig(variant="apdpro", max_iters=400), x0, y0)
    assert abs(c.x[0] - x_star[0]) <= 1e-8


def check_two_node_ppr():
    with tempfile.TemporaryDirectory() as td:
        path = os.path.join(td, "path2.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("0 1\n")
        graph = pagerank.load_graph(path)
        inst = pagerank.build_ppr_problem(graph, 0.5, -0.05)
        q = np.column_stack([inst.qmatvec(e) for e in np.eye(2)])
        assert np.allclose(q, [[0.75, -0.25], [-0.25, 0.75]], atol=1e-14)
        lo, hi = pagerank.spectral_bounds(inst)
        _close(lo, 0.5, 1e-7)
        _close(hi, 1.0, 1e-7)


def check_active_set_accuracy():
    _close(bench.active_set_accuracy([0.0, 1.0, 0.0], [0.0, 2.0, 0.0]), 1.0)
    _close(bench.active_set_accuracy([1e-9, 1.0, 0.0], [0.0, 2.0, 0.0]), 1.0)
    _close(bench.active_set_accuracy([0.5, 1.0, 0.0], [0.0, 2.0, 0.0]), 2.0 / 3.0)


CHECKS = (
    ("synthetic-oracle", check_synthetic_oracle),
    ("prox-operators", check_prox_operators),
    ("estimator-values", check_estimator_values),
    ("stepsize-update", check_stepsize_update),
    ("lagrangian", check_lagrangian),
    ("solver-twin", check_solver_twin),
    ("two-node-ppr", check_two_node_ppr),
    ("active-set-accuracy", check_active_set_accuracy),
)


def run_selftest(verbose: bool = True) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # report and keep going
            failures += 1
            if verbose:
                print(f"FAIL  {name}: {exc}")
        else:
            if verbose:
                print(f"ok    {name}")
    if verbose:
        total = len(CHECKS)
        print(f"{total - failures}/{total} checks passed")
    return failures
