"""Conic adapter behaviour on small hand-built programs."""

import math

import numpy as np
import pytest

from helpers import seeded_plants
from sparselqr.backend import SolveStatus, solve
from sparselqr.driver import SynthesisParams, initial_point
from sparselqr.formulation import (
    Candidate,
    ConicProgram,
    LinearMap,
    VariableBlock,
    _BlockBuilder,
    build_program,
    verify_feasibility,
)
from sparselqr.model import identity_plant

EMPTY_MAP = LinearMap(
    num_rows=0,
    rows=np.zeros(0, dtype=np.int64),
    var_idx=np.zeros(0, dtype=np.int64),
    coeffs=np.zeros(0, dtype=np.float64),
    rhs=np.zeros(0, dtype=np.float64),
)


def toy_program(objective, variables, equalities=EMPTY_MAP, inequalities=EMPTY_MAP, psd=()):
    objective = np.asarray(objective, dtype=np.float64)
    return ConicProgram(
        n=1,
        m=1,
        alpha1=0.0,
        delta=1e-3,
        eps1=1e-6,
        epsilon=1e-5,
        variables=tuple(variables),
        num_scalars=objective.size,
        objective=objective,
        equalities=equalities,
        inequalities=inequalities,
        psd_blocks=tuple(psd),
    )


def scalar_var(name="Z"):
    return VariableBlock(name=name, rows=1, cols=1, symmetric=False, offset=0)


class TestToyPrograms:
    def test_arrow_matrix_minimum(self):
        # min x subject to [[x, 1], [1, x]] >= 0: optimum x = 1
        builder = _BlockBuilder("arrow", 2)
        builder.add_const(0, 1, np.array([[1.0]]))
        builder.add_const(1, 0, np.array([[1.0]]))
        idx = np.array([[0]], dtype=np.int64)
        builder.add_var(0, 0, idx)
        builder.add_var(1, 1, idx)
        prog = toy_program([1.0], [scalar_var()], psd=[builder.build()])
        out = solve(prog)
        assert out.status is SolveStatus.OPTIMAL
        assert out.status.has_solution
        assert out.objective == pytest.approx(1.0, abs=1e-6)
        assert out.variables["Z"][0, 0] == pytest.approx(1.0, abs=1e-6)
        assert out.iterations > 0
        assert out.accuracy < 1e-7

    def test_trace_floor(self):
        # min Tr X subject to X >= I (3 x 3): optimum is the identity
        x = VariableBlock(name="X", rows=3, cols=3, symmetric=True, offset=0)
        objective = np.zeros(6)
        objective[np.diag(x.index_map())] = 1.0
        builder = _BlockBuilder("floor", 3)
        builder.add_const(0, 0, -np.eye(3))
        builder.add_var(0, 0, x.index_map())
        prog = toy_program(objective, [x], psd=[builder.build()])
        out = solve(prog)
        assert out.status is SolveStatus.OPTIMAL
        assert out.objective == pytest.approx(3.0, abs=1e-6)
        assert np.allclose(out.variables["X"], np.eye(3), atol=1e-6)

    def test_contradictory_rows_infeasible(self):
        # x <= -1 and -x <= -1 cannot both hold
        ineq = LinearMap(
            num_rows=2,
            rows=np.array([0, 1], dtype=np.int64),
            var_idx=np.array([0, 0], dtype=np.int64),
            coeffs=np.array([1.0, -1.0]),
            rhs=np.array([-1.0, -1.0]),
        )
        prog = toy_program([1.0], [scalar_var()], inequalities=ineq)
        out = solve(prog)
        assert out.status is SolveStatus.INFEASIBLE
        assert not out.status.has_solution
        assert out.variables == {}
        assert math.isnan(out.objective)

    def test_descent_ray_unbounded(self):
        # min -x subject to x >= 0
        ineq = LinearMap(
            num_rows=1,
            rows=np.array([0], dtype=np.int64),
            var_idx=np.array([0], dtype=np.int64),
            coeffs=np.array([-1.0]),
            rhs=np.array([0.0]),
        )
        prog = toy_program([-1.0], [scalar_var()], inequalities=ineq)
        out = solve(prog)
        assert out.status is SolveStatus.UNBOUNDED
        assert not out.status.has_solution

    def test_equality_pins_variable(self):
        # min x subject to x = 2 via the zero cone
        eq = LinearMap(
            num_rows=1,
            rows=np.array([0], dtype=np.int64),
            var_idx=np.array([0], dtype=np.int64),
            coeffs=np.array([1.0]),
            rhs=np.array([2.0]),
        )
        prog = toy_program([1.0], [scalar_var()], equalities=eq)
        out = solve(prog)
        assert out.status is SolveStatus.OPTIMAL
        assert out.variables["Z"][0, 0] == pytest.approx(2.0, abs=1e-8)


class TestAccuracyValidation:
    @pytest.mark.parametrize("accuracy", [1e-11, 1e-3, 0.0, -1e-8, float("nan")])
    def test_rejects_out_of_range(self, accuracy):
        prog = toy_program([1.0], [scalar_var()])
        with pytest.raises(ValueError):
            solve(prog, accuracy=accuracy)

    def test_accepts_boundaries(self):
        eq = LinearMap(
            num_rows=1,
            rows=np.array([0], dtype=np.int64),
            var_idx=np.array([0], dtype=np.int64),
            coeffs=np.array([1.0]),
            rhs=np.array([1.0]),
        )
        prog = toy_program([1.0], [scalar_var()], equalities=eq)
        for accuracy in (1e-10, 1e-4):
            assert solve(prog, accuracy=accuracy).status.has_solution


class TestRestrictionPrograms:
    def test_scalar_plant_matches_riccati_cost(self):
        scalar = identity_plant(np.array([[-1.0]]))
        params = SynthesisParams(alpha1=0.0)
        _, _, P0 = initial_point(scalar)
        prog = build_program(scalar, params, P0, 1e-5)
        out = solve(prog)
        assert out.status.has_solution
        assert out.objective == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-3)

    def test_solution_passes_independent_audit(self):
        plant = seeded_plants([("cyclic", 3, 5)])[0]
        params = SynthesisParams()
        _, _, P0 = initial_point(plant)
        eps = 3 * params.alpha
        prog = build_program(plant, params, P0, eps)
        out = solve(prog)
        assert out.status.has_solution
        v = out.variables
        cand = Candidate(X=v["X"], Y=v["Y"], F=v["F"], K=v["K"], P=v["P"])
        report = verify_feasibility(
            plant, params, P0, eps, cand, tol_feas=1e-5, tol_eq=1e-5
        )
        assert report.feasible, (report.block_min_eigs, report.equality_residual)

    def test_deterministic_resolve(self):
        plant = seeded_plants([("cyclic", 4, 7)])[0]
        params = SynthesisParams(alpha1=0.01)
        _, _, P0 = initial_point(plant)
        prog = build_program(plant, params, P0, 4 * params.alpha)
        first = solve(prog)
        second = solve(prog)
        assert first.status is second.status
        assert first.objective == second.objective
        assert sorted(first.variables) == sorted(second.variables)
        for name, value in first.variables.items():
            assert np.array_equal(value, second.variables[name])
