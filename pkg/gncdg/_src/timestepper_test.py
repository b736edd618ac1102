# Copyright 2022 DeepMind Technologies Limited. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================

"""Unit tests for `timestepper.py`."""

from absl.testing import absltest
from absl.testing import parameterized

from gncdg._src import basis
from gncdg._src import config as config_lib
from gncdg._src import errors
from gncdg._src import limiters
from gncdg._src import mesh
from gncdg._src import timestepper
import numpy as np


def _solver_and_state(scenario, **overrides):
  config = config_lib.default_config(scenario, **overrides)
  solver, bathy = timestepper.build_solver(config)
  eta_fn, u_fn, v_fn = config.scenario_def.initial_condition()
  return solver, solver.initial_state(eta_fn, u_fn, v_fn, bathy.fn)


class SSPRK3Test(parameterized.TestCase):

  @parameterized.parameters(0.1, -0.5, -2.)
  def test_linear_stability_polynomial(self, z):

    def euler(v, s):
      del s
      return v + z * v

    def combine(u, w, weight, s):
      del s
      return (1. - weight) * u + weight * w

    out = timestepper.ssp_rk3_step(1., 0., 1., euler, combine)
    self.assertAlmostEqual(out, 1. + z + z**2 / 2. + z**3 / 6., places=14)

  def test_quadrature_in_time_is_exact_for_cubics(self):
    dt = 0.2
    stages = []

    def euler(v, s):
      return v + dt * 3. * s**2

    def combine(u, w, weight, s):
      del s
      return (1. - weight) * u + weight * w

    out = timestepper.ssp_rk3_step(0., 0.5, dt, euler, combine, stages.append)
    self.assertAlmostEqual(out, 0.7**3 - 0.5**3, places=14)
    self.assertEqual(stages, [0, 1, 2])


class SolverTest(absltest.TestCase):

  def test_still_water_stays_at_rest(self):
    solver, state = _solver_and_state('still_water_case_a', nx=6, ny=6)
    new, ts = solver.step(state)
    self.assertGreater(ts.dt, 0.)
    self.assertAlmostEqual(new.t, ts.dt)
    np.testing.assert_allclose(new.primal, state.primal, atol=1e-10)
    np.testing.assert_allclose(new.dual, state.dual, atol=1e-10)
    np.testing.assert_allclose(new.velocity_primal.u, 0., atol=1e-10)
    np.testing.assert_allclose(new.velocity_dual.v, 0., atol=1e-10)

  def test_block_lake_stays_at_rest_with_modified_bottom(self):
    solver, state = _solver_and_state('still_water_case_b')
    self.assertEqual(solver.mesh.primal.shape, (20, 20))
    level = 0.50001
    for step in range(3):
      for kind in ('C', 'D'):
        surface = state.coeffs(kind)[..., basis.H, :] + solver.bottom.on(kind)
        np.testing.assert_allclose(surface[..., 0], level, rtol=0., atol=1e-13)
        np.testing.assert_allclose(surface[..., 1:], 0., atol=1e-13)
        np.testing.assert_allclose(state.coeffs(kind)[..., basis.HP:, :], 0.,
                                   atol=1e-13)
        velocity = state.velocity(kind)
        np.testing.assert_allclose(velocity.u, 0., atol=1e-13)
        np.testing.assert_allclose(velocity.v, 0., atol=1e-13)
      state, _ = solver.step(state, step_index=step + 1)

  def test_seawall_depth_is_nonnegative_on_every_stage(self):
    solver, state = _solver_and_state('seawall', nx=125, ny=2)
    table = basis.get_basis(solver.k).values(
        mesh.positivity_point_set(solver.k).ref_points)
    lowest = []
    limit = solver.limit

    def recording_limit(coeffs, kind, t):
      out = limit(coeffs, kind, t)
      h = out[..., basis.H, :]
      lowest.append((h[..., 0].min(), basis.evaluate(h, table).min()))
      return out

    solver.limit = recording_limit
    for step in range(3):
      state, _ = solver.step(state, step_index=step + 1)
    self.assertLen(lowest, 3 * 3 * 2)
    averages, points = np.array(lowest).T
    self.assertGreaterEqual(averages.min(), 0.)
    self.assertGreaterEqual(points.min(), -1e-14)
    self.assertGreaterEqual(solver.min_depth(state), 0.)

  def test_mass_is_conserved_on_periodic_box(self):
    solver, state = _solver_and_state('solitary_periodic', nx=16, ny=2)
    mass0 = solver.mass(state)
    for step in range(1000):
      state, _ = solver.step(state, step_index=step + 1)
    self.assertLessEqual(abs(solver.mass(state) - mass0) / mass0, 1e-11)
    self.assertGreater(solver.min_depth(state), 0.)

  def test_step_is_clipped(self):
    solver, state = _solver_and_state('solitary_periodic', nx=16, ny=2)
    new, ts = solver.step(state, dt_max=1e-3)
    self.assertEqual(ts.dt, 1e-3)
    self.assertAlmostEqual(new.t, 1e-3)

  def test_combine_with_full_weight_takes_new_state(self):
    solver, state = _solver_and_state('solitary_periodic', nx=16, ny=2)
    other = solver.make_state(0., state.primal * 1.01, state.dual * 1.01)
    out = solver.combine(state, other, 1., 0.)
    np.testing.assert_array_equal(out.primal, other.primal)
    half = solver.combine(state, other, 0.5, 0.)
    np.testing.assert_allclose(half.dual, state.dual * 1.005, rtol=1e-14)

  def test_failure_is_tagged_with_step_and_stage(self):
    solver, state = _solver_and_state('solitary_periodic', nx=16, ny=2,
                                      fixed_dt=1e-4)
    primal = np.array(state.primal, copy=True)
    primal[3, 0, basis.H, 0] = -1.
    bad = solver.make_state(state.t, primal, state.dual)
    with self.assertRaises(errors.PositivityError) as cm:
      solver.step(bad, step_index=7)
    self.assertEqual(cm.exception.step, 7)
    self.assertEqual(cm.exception.stage, 0)


class PrepareBottomTest(absltest.TestCase):

  def test_limited_bottom_keeps_averages(self):
    config = config_lib.default_config('still_water_case_b', nx=10, ny=10)
    solver, bathy = timestepper.build_solver(config)
    plain = timestepper.prepare_bottom(bathy, solver.mesh, 1, solver.bcs)
    limited = timestepper.prepare_bottom(bathy, solver.mesh, 1, solver.bcs,
                                         bottom_limiter=True)
    np.testing.assert_allclose(limited.primal[..., 0], plain.primal[..., 0])
    np.testing.assert_allclose(limited.dual[..., 0], plain.dual[..., 0])

  def test_block_bottom_is_compatible_and_under_the_surface(self):
    config = config_lib.default_config('still_water_case_b')
    self.assertTrue(config.bottom_limiter)
    self.assertTrue(config.modify_bottom)
    solver, _ = timestepper.build_solver(config)
    bottom = solver.bottom
    residuals = limiters.bottom_residuals(bottom.primal, bottom.dual,
                                          solver.mesh, solver.k)
    self.assertLess(np.abs(residuals).max(), 1e-12)
    table = basis.get_basis(solver.k).values(
        mesh.positivity_point_set(solver.k).ref_points)
    for kind in ('C', 'D'):
      self.assertLessEqual(basis.evaluate(bottom.on(kind), table).max(),
                           0.5 + 1e-12)


class RunSimulationTest(absltest.TestCase):

  def test_short_run(self):
    config = config_lib.default_config(
        'solitary_accuracy', nx=16, ny=2, t_final=0.02, fixed_dt=0.01,
        gauges=((0., 0.), (10., 0.5)), snapshot_times=(0., 0.02))
    outputs = timestepper.run_simulation(config)
    summary = outputs.summary
    self.assertEqual(summary['steps'], 2)
    self.assertAlmostEqual(summary['t_final'], 0.02)
    self.assertLess(summary['mass_drift'], 1e-3)
    self.assertTrue(np.isfinite(summary['l2_h']))
    self.assertTrue(np.isfinite(summary['l2_u']))
    self.assertEqual([t for t, _ in outputs.snapshots], [0., 0.02])
    self.assertLen(outputs.gauges, 2)
    times, eta = outputs.gauges[0].as_arrays()
    np.testing.assert_allclose(times, [0., 0.01, 0.02])
    self.assertTrue(np.all(eta > 1.))


if __name__ == '__main__':
  absltest.main()
