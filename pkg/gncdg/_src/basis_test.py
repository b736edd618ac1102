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

"""Unit tests for `basis.py`."""

from absl.testing import absltest
from absl.testing import parameterized

from gncdg._src import basis
from gncdg._src import mesh
import numpy as np


def _quadratic(x, y):
  return 1. + 2. * x - 0.5 * y + 0.3 * x * y + 0.7 * y**2


class BasisTest(parameterized.TestCase):

  @parameterized.parameters(0, 1, 2)
  def test_orthonormal(self, k):
    points, weights = basis.projection_quadrature(k)
    table = basis.get_basis(k).values(points)
    gram = np.einsum('p,pa,pb->ab', weights, table, table)
    np.testing.assert_allclose(gram, np.eye(basis.num_basis(k)), atol=1e-13)

  @parameterized.parameters(1, 2)
  def test_leading_function_is_one(self, k):
    values = basis.get_basis(k).values(np.random.RandomState(0).uniform(
        -0.5, 0.5, (7, 2)))
    np.testing.assert_allclose(values[:, 0], 1., atol=1e-15)

  @parameterized.parameters(1, 2)
  def test_parity(self, k):
    b = basis.get_basis(k)
    pts = np.random.RandomState(1).uniform(-0.5, 0.5, (5, 2))
    flipped = pts * np.array([-1., 1.])
    np.testing.assert_allclose(b.values(flipped), b.values(pts) * b.parity(0),
                               atol=1e-14)
    flipped = pts * np.array([1., -1.])
    np.testing.assert_allclose(b.values(flipped), b.values(pts) * b.parity(1),
                               atol=1e-14)

  def test_gradients_match_finite_differences(self):
    b = basis.get_basis(2)
    point = np.array([[0.1, -0.2]])
    step = 1e-6
    dxi, deta = b.gradients(point)
    fd_xi = (b.values(point + [step, 0.]) - b.values(point - [step, 0.])) / (
        2 * step)
    fd_eta = (b.values(point + [0., step]) - b.values(point - [0., step])) / (
        2 * step)
    np.testing.assert_allclose(dxi, fd_xi, atol=1e-8)
    np.testing.assert_allclose(deta, fd_eta, atol=1e-8)

  def test_quarter_averages(self):
    qavg = basis.quarter_averages(2)
    self.assertEqual(qavg.shape, (4, 6))
    np.testing.assert_allclose(qavg.mean(axis=0), np.eye(6)[0], atol=1e-14)
    np.testing.assert_allclose(qavg[:, 0], 1., atol=1e-14)

  def test_eval_basis_outside_cell(self):
    with self.assertRaises(ValueError):
      basis.eval_basis(1, (0.6, 0.))


class ProjectionTest(parameterized.TestCase):

  def test_projection_reproduces_polynomials(self):
    pair = mesh.build_overlapping_meshes((0., 2., -1., 1.), 4, 4)
    grid = pair.primal
    coeffs = basis.project_l2(_quadratic, grid, 2)
    field = basis.DGField(kind=grid.kind, k=2, coeffs=coeffs[:, :, None, :])
    for x, y in ((0.3, -0.2), (1.7, 0.9), (1.0, 0.1)):
      self.assertAlmostEqual(basis.eval_field(field, basis.H, grid, x, y),
                             _quadratic(x, y), places=12)

  def test_cell_average(self):
    pair = mesh.build_overlapping_meshes((0., 2., -1., 1.), 4, 4)
    grid = pair.primal
    coeffs = basis.project_l2(lambda x, y: 2. * x + 0. * y, grid, 1)
    field = basis.DGField(kind=grid.kind, k=1, coeffs=coeffs[:, :, None, :])
    xc, _ = grid.centres()
    np.testing.assert_allclose(basis.cell_average(field), 2. * xc, atol=1e-13)
    self.assertAlmostEqual(basis.cell_average(field, cell=(1, 2)), 1.5)

  def test_one_sided_trace(self):
    pair = mesh.build_overlapping_meshes((0., 2., -1., 1.), 4, 4)
    grid = pair.primal
    coeffs = np.zeros((4, 4, 1, 3))
    coeffs[0, :, 0, 0] = 1.
    coeffs[1, :, 0, 0] = 3.
    field = basis.DGField(kind=grid.kind, k=1, coeffs=coeffs)
    self.assertAlmostEqual(
        basis.eval_field(field, basis.H, grid, 0.5, 0., cell=(0, 2)), 1.)
    self.assertAlmostEqual(
        basis.eval_field(field, basis.H, grid, 0.5, 0., cell=(1, 2)), 3.)


if __name__ == '__main__':
  absltest.main()
