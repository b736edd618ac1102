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

"""Unit tests for `cdg.py`."""

from absl.testing import absltest
from absl.testing import parameterized

from gncdg._src import basis
from gncdg._src import cdg
from gncdg._src import errors
from gncdg._src import mesh
from gncdg._src import model
import numpy as np

_PARAMS = model.PhysParams(g=9.81, alpha=1.159)
_OUTGOING = dict(left='outgoing', right='outgoing', bottom='outgoing',
                 top='outgoing')


def _pad_periodic(arr):
  widths = ((1, 1), (1, 1)) + ((0, 0),) * (arr.ndim - 2)
  return np.pad(arr, widths, mode='wrap')


def _zero_velocity(shape, k):
  return np.zeros(shape + (k + 1, k + 1, 2))


def _inputs(target, source, target_bottom, source_bottom, grid, k, dt, theta,
            velocity=None, periodic=True):
  if periodic:
    source = cdg.source_window(_pad_periodic(source), grid)
    source_bottom = cdg.source_window(_pad_periodic(source_bottom), grid)
  if velocity is None:
    velocity = _zero_velocity(source.shape[:2], k)
  elif periodic:
    velocity = cdg.source_window(_pad_periodic(velocity), grid)
  return cdg.StageInputs(coeffs=target, bottom=target_bottom,
                         source_coeffs=source, source_bottom=source_bottom,
                         source_velocity=velocity, dt=dt, theta=theta)


def _half_interval_gauss(n=6):
  """Gauss rule on [-1/2, 0] and [0, 1/2]; the weights sum to one."""
  t, w = np.polynomial.legendre.leggauss(n)
  return (np.concatenate([(t - 1.) / 4., (t + 1.) / 4.]),
          np.concatenate([w / 4., w / 4.]))


def _source_on_target(window, k, xi, eta):
  """Source polynomials at target reference points, shape (nx, ny, npts)."""
  table = basis.get_basis(k)
  nx, ny = window.shape[0] - 1, window.shape[1] - 1
  out = np.empty((nx, ny, len(xi)))
  for q, (x, y) in enumerate(zip(xi, eta)):
    l, m = int(x > 0.), int(y > 0.)
    phi = table.values(np.array([[x + 0.5 - l, y + 0.5 - m]]))[0]
    out[..., q] = window[l:l + nx, m:m + ny] @ phi
  return out


def _swap_xy(arr, k, components=False):
  exponents = basis.get_basis(k).exponents
  perm = [exponents.index((b, a)) for a, b in exponents]
  out = np.swapaxes(arr, 0, 1)[..., perm]
  if components:
    out = out[..., [basis.H, basis.HQ, basis.HP], :]
  return out


def _random_stage_data(rng, k, shape=(4, 4)):
  nb = basis.num_basis(k)
  states, bottoms = [], []
  for _ in range(2):
    coeffs = rng.uniform(-0.05, 0.05, size=shape + (3, nb))
    coeffs[..., basis.H, 0] = rng.uniform(1., 2., size=shape)
    states.append(coeffs)
    bottom = rng.uniform(-0.02, 0.02, size=shape + (nb,))
    bottom[..., 0] = rng.uniform(0., 0.2, size=shape)
    bottoms.append(bottom)
  return states, bottoms


class StageTablesTest(parameterized.TestCase):

  @parameterized.parameters(1, 2)
  def test_weights_and_points(self, k):
    tables = cdg.stage_tables(k)
    total = sum(piece.weights.sum() for piece in tables.quarters)
    self.assertAlmostEqual(total, 1., places=14)
    for piece in tables.quarters:
      self.assertTrue(np.all(np.abs(piece.source_points) <= 0.5))
    for axis in (0, 1):
      for side in (0, 1):
        halves = tables.face(axis, side)
        self.assertAlmostEqual(sum(h.weights.sum() for h in halves), 1.,
                               places=14)
        for half in halves:
          np.testing.assert_allclose(half.target_points[:, axis], side - 0.5)
          np.testing.assert_allclose(np.abs(half.source_points[:, axis]), 0.)

  def test_window_offsets(self):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4)
    padded = np.arange(36.).reshape(6, 6)
    np.testing.assert_array_equal(cdg.source_window(padded, pair.primal),
                                  padded[1:6, 1:6])
    np.testing.assert_array_equal(cdg.source_window(padded, pair.dual),
                                  padded[0:5, 0:5])


class EulerStageTest(parameterized.TestCase):

  @parameterized.parameters((1, False), (2, False), (1, True), (2, True))
  def test_zero_step_is_identity(self, k, well_balanced):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4)
    rng = np.random.RandomState(k)
    nb = basis.num_basis(k)
    target = rng.normal(size=(4, 4, 3, nb))
    target[..., basis.H, 0] += 3.
    source = rng.normal(size=(4, 4, 3, nb))
    source[..., basis.H, 0] += 3.
    bottom = np.zeros((4, 4, nb))
    inputs = _inputs(target, source, bottom, bottom, pair.primal, k, dt=0.,
                     theta=0.)
    if well_balanced:
      out = cdg.euler_stage_wellbalanced(inputs, pair.primal, k, _PARAMS)
    else:
      out = cdg.euler_stage_standard(inputs, pair.primal, k, _PARAMS)
    np.testing.assert_array_equal(out, target)

  @parameterized.parameters(1, 2)
  def test_full_weight_projects_source(self, k):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4, _OUTGOING)

    def depth(x, y):
      return 1. + 0.2 * x - 0.1 * y + (0.05 * x * y if k == 2 else 0.)

    nb = basis.num_basis(k)
    source = np.zeros(pair.dual.shape + (3, nb))
    source[..., basis.H, :] = basis.project_l2(depth, pair.dual, k)
    target = np.zeros(pair.primal.shape + (3, nb))
    bottom_p = np.zeros(pair.primal.shape + (nb,))
    bottom_d = np.zeros(pair.dual.shape + (nb,))
    inputs = _inputs(target, source, bottom_p, bottom_d, pair.primal, k, dt=0.,
                     theta=1., periodic=False)
    out = cdg.euler_stage_standard(inputs, pair.primal, k, _PARAMS)
    np.testing.assert_allclose(out[..., basis.H, :],
                               basis.project_l2(depth, pair.primal, k),
                               atol=1e-12)
    np.testing.assert_allclose(out[..., basis.HP:, :], 0., atol=1e-12)

  @parameterized.parameters(
      (1, mesh.MeshKind.PRIMAL), (1, mesh.MeshKind.DUAL),
      (2, mesh.MeshKind.PRIMAL), (2, mesh.MeshKind.DUAL))
  def test_still_water_is_preserved(self, k, target_kind):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4)

    def bottom_fn(x, y):
      return 0.1 * np.sin(2. * np.pi * x) * np.cos(2. * np.pi * y)

    source_kind = (mesh.MeshKind.DUAL if target_kind == mesh.MeshKind.PRIMAL
                   else mesh.MeshKind.PRIMAL)
    nb = basis.num_basis(k)
    states, bottoms = {}, {}
    for kind in (target_kind, source_kind):
      grid = pair.grid(kind)
      bottoms[kind] = basis.project_l2(bottom_fn, grid, k)
      coeffs = np.zeros(grid.shape + (3, nb))
      coeffs[..., basis.H, :] = -bottoms[kind]
      coeffs[..., basis.H, 0] += 1.
      states[kind] = coeffs
    grid = pair.grid(target_kind)
    inputs = _inputs(states[target_kind], states[source_kind],
                     bottoms[target_kind], bottoms[source_kind], grid, k,
                     dt=0.01, theta=0.5)
    out = cdg.euler_stage_wellbalanced(inputs, grid, k, _PARAMS)
    np.testing.assert_allclose(out, states[target_kind], atol=1e-11)

  @parameterized.parameters(1, 2)
  def test_depth_total_is_conserved(self, k):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4)
    rng = np.random.RandomState(3)
    nb = basis.num_basis(k)
    target = rng.uniform(-0.05, 0.05, size=(4, 4, 3, nb))
    target[..., basis.H, 0] = rng.uniform(1., 2., size=(4, 4))
    source = rng.uniform(-0.05, 0.05, size=(4, 4, 3, nb))
    source[..., basis.H, 0] = rng.uniform(1., 2., size=(4, 4))
    bottom = np.zeros((4, 4, nb))
    velocity = np.zeros((4, 4, k + 1, k + 1, 2))
    velocity[..., 0] = 0.3
    velocity[..., 1] = -0.2
    theta = 0.4
    inputs = _inputs(target, source, bottom, bottom, pair.primal, k, dt=0.01,
                     theta=theta, velocity=velocity)
    out = cdg.euler_stage_standard(inputs, pair.primal, k, _PARAMS)
    expected = (theta * cdg.mesh_total(source, pair.dual)
                + (1. - theta) * cdg.mesh_total(target, pair.primal))
    self.assertAlmostEqual(cdg.mesh_total(out, pair.primal), expected,
                           places=12)

  @parameterized.parameters((1, False), (2, False), (1, True), (2, True))
  def test_average_update_formula(self, k, well_balanced):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4)
    (target, source), (bottom_t, bottom_s) = _random_stage_data(
        np.random.RandomState(5), k)
    u0, v0 = 0.3, -0.2
    velocity = np.zeros((4, 4, k + 1, k + 1, 2))
    velocity[..., 0] = u0
    velocity[..., 1] = v0
    dt, theta = 0.01, 0.4
    inputs = _inputs(target, source, bottom_t, bottom_s, pair.primal, k, dt=dt,
                     theta=theta, velocity=velocity)
    if well_balanced:
      out = cdg.euler_stage_wellbalanced(inputs, pair.primal, k, _PARAMS)
    else:
      out = cdg.euler_stage_standard(inputs, pair.primal, k, _PARAMS)

    pts, wts = _half_interval_gauss()
    gx, gy = np.meshgrid(pts, pts, indexing='ij')
    area_weights = np.outer(wts, wts).ravel()
    edge = np.full_like(pts, 0.5)
    h = inputs.source_coeffs[..., basis.H, :]

    def face(xi, eta):
      return _source_on_target(h, k, xi, eta) @ wts

    cell_average = (_source_on_target(h, k, gx.ravel(), gy.ravel())
                    @ area_weights)
    expected = ((1. - theta) * target[..., basis.H, 0] + theta * cell_average
                - dt * u0 * (face(edge, pts) - face(-edge, pts)) / pair.dx
                - dt * v0 * (face(pts, edge) - face(pts, -edge)) / pair.dy)
    if well_balanced:
      b_average = _source_on_target(inputs.source_bottom, k, gx.ravel(),
                                    gy.ravel()) @ area_weights
      expected += theta * (b_average - bottom_t[..., 0])
    np.testing.assert_allclose(out[..., basis.H, 0], expected, rtol=0.,
                               atol=1e-13)

  @parameterized.parameters((1, False), (2, False), (1, True), (2, True))
  def test_swapping_axes_commutes_with_the_stage(self, k, well_balanced):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4)
    rng = np.random.RandomState(7)
    (target, source), (bottom_t, bottom_s) = _random_stage_data(rng, k)
    velocity = rng.uniform(-0.3, 0.3, size=(4, 4, k + 1, k + 1, 2))
    velocity_sw = np.swapaxes(np.swapaxes(velocity, 0, 1), 2, 3)[..., ::-1]
    stage = (cdg.euler_stage_wellbalanced if well_balanced
             else cdg.euler_stage_standard)
    inputs = _inputs(target, source, bottom_t, bottom_s, pair.primal, k,
                     dt=0.01, theta=0.4, velocity=velocity)
    swapped = _inputs(_swap_xy(target, k, True), _swap_xy(source, k, True),
                      _swap_xy(bottom_t, k), _swap_xy(bottom_s, k),
                      pair.primal, k, dt=0.01, theta=0.4, velocity=velocity_sw)
    out = stage(inputs, pair.primal, k, _PARAMS)
    out_sw = stage(swapped, pair.primal, k, _PARAMS)
    np.testing.assert_allclose(out_sw, _swap_xy(out, k, True), rtol=1e-12,
                               atol=1e-11)

  def test_non_finite_update(self):
    pair = mesh.build_overlapping_meshes((0., 1., 0., 1.), 4, 4)
    target = np.zeros((4, 4, 3, 3))
    target[0, 0, basis.H, 0] = np.inf
    source = np.zeros((4, 4, 3, 3))
    source[..., basis.H, 0] = 1.
    bottom = np.zeros((4, 4, 3))
    inputs = _inputs(target, source, bottom, bottom, pair.primal, 1, dt=0.01,
                     theta=0.5)
    with self.assertRaises(errors.BlowUpError):
      cdg.euler_stage_standard(inputs, pair.primal, 1, _PARAMS)


class GammaTest(absltest.TestCase):

  def test_flat_surface(self):
    self.assertEqual(float(cdg.compute_gamma([1.5, 1.5, 1.5, 1.5])), 1.5)
    self.assertEqual(float(cdg.compute_gamma([1., 2., 3., 4.])), 2.5)


class TimeStepTest(absltest.TestCase):

  def _fields(self, u=0.):
    coeffs = np.zeros((4, 4, 3, 3))
    coeffs[..., basis.H, 0] = 1.
    velocity = np.zeros((4, 4, 2, 2, 2))
    velocity[..., 0] = u
    return [(coeffs, velocity), (coeffs, velocity)]

  def test_still_water_stability_bound(self):
    step = cdg.max_timestep(self._fields(), 0.25, 0.25, 1, _PARAMS, cfl=0.2,
                            omega1=0.5)
    celerity = np.sqrt(_PARAMS.g)
    self.assertAlmostEqual(step.tau, 0.2 / (8. * celerity), places=14)
    self.assertEqual(step.dt, step.tau)
    self.assertEqual(step.theta, 1.)

  def test_fixed_step_capped_by_positivity(self):
    step = cdg.max_timestep(self._fields(u=1.), 0.25, 0.25, 1, _PARAMS,
                            cfl=0.2, omega1=0.5, fixed_dt=1.)
    self.assertAlmostEqual(step.dt, 0.5 / 16., places=14)
    self.assertEqual(step.theta, 1.)
    small = cdg.max_timestep(self._fields(u=1.), 0.25, 0.25, 1, _PARAMS,
                             cfl=0.2, omega1=0.5, fixed_dt=1e-3)
    self.assertEqual(small.dt, 1e-3)
    self.assertAlmostEqual(small.theta, 1e-3 / small.tau, places=12)

  def test_collapsed_step(self):
    with self.assertRaises(errors.TimeStepError):
      cdg.max_timestep(self._fields(), 0.25, 0.25, 1, _PARAMS, cfl=0.2,
                       omega1=0.5, fixed_dt=0.)

  def test_clipped(self):
    step = cdg.TimeStep(dt=0.1, theta=0.5, tau=0.2).clipped(0.05)
    self.assertEqual(step.dt, 0.05)
    self.assertAlmostEqual(step.theta, 0.25)


if __name__ == '__main__':
  absltest.main()
