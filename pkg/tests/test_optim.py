import math

import numpy as np
import pytest

from renyilab.optim import (
    OptimizerConfig,
    optimize_simplex,
    saddle_solve,
    scalar_optimize,
)
from renyilab.prob import FiniteDistribution, renyi_divergence


class TestSimplex:
    def test_kl_projection(self):
        P = FiniteDistribution([0.3, 0.7])
        r = optimize_simplex(lambda b: renyi_divergence(FiniteDistribution(b[0]), P, 1.0),
                             2, "min")
        assert r.value == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(r.args[0], P.atoms, atol=1e-4)

    def test_max_entropy(self):
        def neg_h(b):
            x = b[0][b[0] > 0]
            return float(np.sum(x * np.log(x)))
        r = optimize_simplex(lambda b: -neg_h(b), 3, "max")
        assert r.value == pytest.approx(math.log(3), abs=1e-8)

    def test_convex_quadratic_kkt(self):
        # min sum Q^2 / P at Q = P gives 1
        P = np.array([0.5, 0.5])
        r = optimize_simplex(lambda b: float(np.sum(b[0] ** 2 / P)), 2, "min")
        assert r.value == pytest.approx(1.0, abs=1e-10)

    def test_boundary_optimum(self):
        c = np.array([3.0, 1.0, 2.0])
        r = optimize_simplex(lambda b: float(c @ b[0]), 3, "min")
        assert r.value == pytest.approx(1.0, abs=1e-9)
        assert r.args[0][1] == pytest.approx(1.0, abs=1e-7)

    def test_matches_dense_grid_on_convex(self):
        rng = np.random.default_rng(2)
        A = rng.random((4, 3))
        fun = lambda b: float(np.sum((A @ b[0]) ** 2))
        r = optimize_simplex(fun, 3, "min")
        best = math.inf
        g = 1000
        for i in range(g + 1):
            for j in range(g + 1 - i):
                x = np.array([i, j, g - i - j]) / g
                best = min(best, fun([x]))
        assert r.value <= best + 2 * max(r.gap, 1e-7)

    def test_determinism(self):
        cfg = OptimizerConfig(seed=5)
        target = np.array([0.2, 0.3, 0.5])
        fun = lambda b: float(np.sum((b[0] - target) ** 2))
        r1 = optimize_simplex(fun, 3, "min", cfg)
        r2 = optimize_simplex(fun, 3, "min", cfg)
        assert r1.value == r2.value
        assert np.array_equal(r1.args[0], r2.args[0])

    def test_multi_block(self):
        fun = lambda b: float(np.sum((b[0] - b[1]) ** 2))
        r = optimize_simplex(fun, [3, 3], "max")
        assert r.value == pytest.approx(2.0, abs=1e-6)  # opposite vertices

    def test_feasibility_hooks(self):
        # min first coordinate subject to first coordinate >= 0.6
        fun = lambda b: float(b[0][0])
        r = optimize_simplex(fun, 3, "min",
                             feasible=lambda b: b[0][0] >= 0.6 - 1e-9,
                             penalty=lambda b: max(0.6 - b[0][0], 0.0))
        assert r.status != "infeasible"
        assert r.value == pytest.approx(0.6, abs=1e-4)

    def test_gradient_hook(self):
        target = np.array([0.1, 0.2, 0.7])
        fun = lambda b: float(np.sum((b[0] - target) ** 2))
        r = optimize_simplex(fun, 3, "min", gradient=lambda b: [2 * (b[0] - target)])
        assert r.value == pytest.approx(0.0, abs=1e-9)


class TestScalar:
    def test_concave_interior(self):
        r = scalar_optimize(lambda t: t * (1 - t), (0.0, 1.0), "max")
        assert r.value == pytest.approx(0.25, abs=1e-12)
        assert r.args[0] == pytest.approx(0.5, abs=1e-6)

    def test_affine_endpoint(self):
        r = scalar_optimize(lambda t: 2 * t + 1, (0.0, 1.0), "max")
        assert r.value == pytest.approx(3.0, abs=1e-12)
        assert r.args[0] == pytest.approx(1.0)

    def test_unbounded_interval_at_origin(self):
        r = scalar_optimize(lambda t: -t, (0.0, math.inf), "max")
        assert r.value == pytest.approx(0.0, abs=1e-12)
        assert r.args[0] == pytest.approx(0.0)

    def test_unbounded_interior_peak(self):
        r = scalar_optimize(lambda t: -(t - 37.5) ** 2, (0.0, math.inf), "max")
        assert r.args[0] == pytest.approx(37.5, abs=1e-6)

    def test_divergent_flagged(self):
        r = scalar_optimize(lambda t: t, (0.0, math.inf), "max")
        assert r.status == "divergent"


class TestSaddle:
    def test_diagonal_saddle(self):
        r = saddle_solve(lambda zo, wi: (wi[0][0] - zo[0][0]) ** 2,
                         ([2], "max"), ([2], "min"))
        assert r.value == pytest.approx(0.0, abs=1e-7)

    def test_constrained_inner(self):
        # max_z min_{w: w0 >= 0.7} (w0 - z0)^2 -> outer pushes z0 to 0, value 0.49
        r = saddle_solve(lambda zo, wi: (wi[0][0] - zo[0][0]) ** 2,
                         ([2], "max"), ([2], "min"),
                         inner_constraint=lambda zo, wi: 0.7 - wi[0][0])
        assert r.value == pytest.approx(0.49, abs=1e-3)

    def test_infeasible_inner(self):
        r = saddle_solve(lambda zo, wi: 0.0, ([2], "min"), ([2], "min"),
                         inner_constraint=lambda zo, wi: 1.0)  # never satisfiable
        assert r.value == math.inf or r.status == "infeasible"

    def test_inner_solver_override(self):
        calls = []

        def solver(zb):
            calls.append(1)
            from renyilab.optim import OptResult
            return OptResult(float(zb[0][0]), (np.array([1.0]),), "converged", 1e-9)

        r = saddle_solve(lambda zo, wi: 0.0, ([2], "max"), ([1], "min"), inner_solver=solver)
        assert r.value == pytest.approx(1.0, abs=1e-9)
        assert calls


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(value_tol=0.0)
        with pytest.raises(ValueError):
            OptimizerConfig(n_starts=0)

    def test_refinement_monotonicity(self):
        # a finer grid schedule never worsens the value beyond the gap
        fun = lambda b: float(np.sum((b[0] - np.array([0.21, 0.33, 0.46])) ** 2))
        coarse = optimize_simplex(fun, 3, "min", OptimizerConfig(grid_schedule=(8,)))
        fine = optimize_simplex(fun, 3, "min", OptimizerConfig(grid_schedule=(8, 16)))
        assert fine.value <= coarse.value + coarse.gap
