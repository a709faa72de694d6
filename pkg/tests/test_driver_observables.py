"""Time-loop orchestration, derived observables, and invariant monitors."""

from dataclasses import replace

import numpy as np
import pytest

from phenofield import (ScalarField, build_initial_state, build_operators,
                        build_uniform_mesh, default_config, default_model_functions,
                        energy, interpolate, nearest_node, run, setup_problem,
                        tumour_measure)
from phenofield.driver import advance
from phenofield.functions import ModelFunctions

from oracles import double_well_oracle


def desk_config(nx=16, t_end=0.01, **over):
    cfg = replace(default_config(), nx=nx, t_end=t_end)
    return replace(cfg, **over) if over else cfg


class TestTumourMeasure:
    def test_full_domain(self):
        mesh = build_uniform_mesh(4)
        phi = ScalarField(np.ones(mesh.n_nodes))
        assert tumour_measure(phi, mesh, -0.9) == pytest.approx(1.0, abs=1e-14)

    def test_empty_domain(self):
        mesh = build_uniform_mesh(4)
        phi = ScalarField(np.full(mesh.n_nodes, -1.0))
        assert tumour_measure(phi, mesh, -0.9) == 0.0

    def test_halfplane_clip_is_exact(self):
        # the zero level set of 2x - 1 splits the square exactly in half
        mesh = build_uniform_mesh(64)
        phi = interpolate(lambda x, y: 2.0 * x - 1.0, mesh)
        assert abs(tumour_measure(phi, mesh, 0.0) - 0.5) <= 1e-12

    def test_oblique_plane_against_analytic_area(self):
        # region y > 0.25 has area 0.75 regardless of mesh alignment
        mesh = build_uniform_mesh(7)
        phi = interpolate(lambda x, y: y - 0.25, mesh)
        assert abs(tumour_measure(phi, mesh, 0.0) - 0.75) <= 1e-12

    def test_threshold_shift(self):
        mesh = build_uniform_mesh(32)
        phi = interpolate(lambda x, y: 2.0 * x - 1.0, mesh)
        # phi > -0.5 on x > 0.25
        assert abs(tumour_measure(phi, mesh, -0.5) - 0.75) <= 1e-12


class TestEnergy:
    def test_pure_phase_zero(self):
        ops = build_operators(build_uniform_mesh(4))
        assert energy(ScalarField(np.ones(ops.n_nodes)), ops, 1e-2) == pytest.approx(0.0, abs=1e-13)

    def test_neutral_phase_value(self):
        eps = 1e-2
        ops = build_operators(build_uniform_mesh(4))
        e = energy(ScalarField(np.zeros(ops.n_nodes)), ops, eps)
        assert e == pytest.approx(0.25 / eps, abs=1e-10)

    def test_random_field_matches_dense_quadrature(self):
        eps = 1e-2
        ops = build_operators(build_uniform_mesh(2))
        rng = np.random.default_rng(3)
        vals = rng.uniform(-1.2, 1.2, ops.n_nodes)
        phi = ScalarField(vals)
        grad_part = 0.5 * eps * vals @ (ops.stiffness @ vals)
        oracle = grad_part + double_well_oracle(ops.mesh, vals) / eps
        assert energy(phi, ops, eps) == pytest.approx(oracle, abs=1e-12)


class TestInitialState:
    def test_reference_phase_indicator(self):
        problem = setup_problem(desk_config(nx=20))
        state = build_initial_state(problem)
        mesh = problem.ops.mesh
        assert state.ch.phi.values[nearest_node(mesh, (0.5, 0.5))] == 1.0
        assert state.ch.phi.values[nearest_node(mesh, (0.0, 0.0))] == -1.0

    def test_degenerate_disk(self):
        cfg = desk_config(nx=8)
        cfg = replace(cfg, ic_phi=replace(cfg.ic_phi, disk_radius_sq=0.0))
        problem = setup_problem(cfg)
        state = build_initial_state(problem)
        mesh = problem.ops.mesh
        centre = nearest_node(mesh, (0.5, 0.5))
        others = np.delete(np.arange(mesh.n_nodes), centre)
        assert np.all(state.ch.phi.values[others] == -1.0)

    def test_distribution_has_unit_mass_at_random_nodes(self):
        problem = setup_problem(desk_config(nx=12))
        state = build_initial_state(problem)
        rng = np.random.default_rng(1)
        nodes = rng.integers(0, problem.ops.n_nodes, 10)
        masses = state.f.values[nodes] @ state.f.grid.weights
        np.testing.assert_allclose(masses, 1.0, atol=1e-12)

    def test_probe_outside_domain_rejected(self):
        mesh = build_uniform_mesh(4)
        with pytest.raises(ValueError, match="outside"):
            nearest_node(mesh, (1.3, 0.5))


class TestAdvance:
    def test_decoupled_limit_freezes_nutrient_and_traits(self):
        zero = lambda y: np.zeros_like(np.asarray(y, dtype=float))
        fns = default_model_functions()
        fns = ModelFunctions(p_rate=zero, q_rate=zero, k_rate=zero, w_mob=fns.w_mob,
                             fitness=fns.fitness, kernel=fns.kernel,
                             truncation=fns.truncation,
                             potential_convex_deriv=fns.potential_convex_deriv,
                             potential_expansive_deriv=fns.potential_expansive_deriv)
        cfg = desk_config(nx=8, alpha=0.0, b=0.0)
        problem = setup_problem(cfg, fns)
        state = build_initial_state(problem)
        new, _ = advance(state, problem)
        np.testing.assert_array_equal(new.f.values, state.f.values)
        np.testing.assert_allclose(new.sigma.values, state.sigma.values, atol=1e-12)
        assert not np.array_equal(new.ch.phi.values, state.ch.phi.values)

    def test_single_step_mass_balance(self):
        problem = setup_problem(desk_config(nx=16))
        state = build_initial_state(problem)
        new, diag = advance(state, problem)
        assert 0.0 <= tumour_measure(new.ch.phi, problem.ops.mesh, -0.9) <= 1.0
        assert diag.mass_balance_err <= 1e-10
        assert new.step == 1 and new.time == pytest.approx(problem.cfg.dt)


class TestRun:
    def test_zero_horizon_single_record(self):
        result = run(desk_config(nx=8, t_end=0.0))
        assert len(result.records) == 1
        assert result.records[0].time == 0.0
        assert result.completed

    def test_record_count_and_times(self):
        cfg = desk_config(nx=8, t_end=0.005)
        result = run(cfg)
        assert len(result.records) == 6
        assert result.records[-1].time == pytest.approx(0.005)

    def test_determinism_bitwise(self):
        cfg = desk_config(nx=8, t_end=0.004)
        r1 = run(cfg)
        r2 = run(cfg)
        assert [rec.as_row() for rec in r1.records] == [rec.as_row() for rec in r2.records]

    def test_monitors_populated(self):
        result = run(desk_config(nx=8, t_end=0.01))
        assert result.monitors["max_fmass_err"] <= 1e-10
        assert result.monitors["max_mass_balance_err"] <= 1e-10
        assert result.monitors["min_f"] >= 0.0

    def test_frozen_traits_keep_probe_variance_constant(self):
        cfg = desk_config(nx=8, t_end=0.01, alpha=0.0)
        result = run(cfg)
        first = result.records[0].probe_a_var
        assert all(rec.probe_a_var == first for rec in result.records)

    def test_snapshot_stride(self):
        cfg = desk_config(nx=8, t_end=0.01)
        cfg = replace(cfg, output=replace(cfg.output, snapshot_stride=4))
        result = run(cfg)
        assert sorted(result.snapshots) == [0, 4, 8, 10]

    def test_mesh_symmetries_preserved(self):
        # the lattice is invariant under the main-diagonal swap and the
        # half-turn; a symmetric initial state must stay symmetric to
        # solver precision
        cfg = desk_config(nx=16, t_end=0.05)
        result = run(cfg)
        nx = cfg.nx
        phi = result.final_state.ch.phi.values.reshape(nx + 1, nx + 1)
        assert np.abs(phi - phi.T).max() <= 1e-8
        assert np.abs(phi - phi[::-1, ::-1]).max() <= 1e-8
        sigma = result.final_state.sigma.values.reshape(nx + 1, nx + 1)
        assert np.abs(sigma - sigma.T).max() <= 1e-8

    def test_ifw_is_unit_for_unit_mobility_weight(self):
        result = run(desk_config(nx=8, t_end=0.003))
        for rec in result.records:
            assert rec.ifw_min == pytest.approx(1.0, abs=1e-10)
            assert rec.ifw_max == pytest.approx(1.0, abs=1e-10)

    def test_validation_failure_blocks_run(self):
        fns = default_model_functions()
        bad = replace_truncation(fns, lambda phi: np.full_like(np.asarray(phi, float), 2.0))
        with pytest.raises(ValueError, match="validation failed"):
            run(desk_config(nx=8, t_end=0.001), fns=bad)


def replace_truncation(fns, truncation):
    from dataclasses import replace as dc_replace
    return dc_replace(fns, truncation=truncation)
