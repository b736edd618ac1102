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

"""Total-degree polynomial spaces on the reference square.

The basis of P^k is obtained by Gram-Schmidt orthonormalisation of the
monomials `xi^a eta^b` (ordered by total degree) on [-1/2, 1/2]^2. The first
basis function is the constant 1, so the cell average of a field is its
leading coefficient and the mass matrix on a physical cell is `dx*dy*I`.
Every basis function has a definite parity in each direction, which the
boundary code uses to mirror cells across walls.
"""

import functools
import math
from typing import Callable, Optional, Tuple

import attr
import chex
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
import numpy as np

_Array = np.ndarray

# Components of the conserved triple.
H, HP, HQ = 0, 1, 2


def num_basis(k: int) -> int:
  return (k + 1) * (k + 2) // 2


def _monomial_exponents(k: int) -> Tuple[Tuple[int, int], ...]:
  return tuple((d - b, b) for d in range(k + 1) for b in range(d + 1))


def _interval_moment(n: int) -> float:
  return (0.5**(n + 1) - (-0.5)**(n + 1)) / (n + 1)


def _falling(a: int, p: int) -> float:
  return float(math.factorial(a) // math.factorial(a - p)) if a >= p else 0.


@attr.define(frozen=True)
class Basis:
  """Orthonormal basis of P^k; `coeffs[i]` expands phi_i over monomials."""
  k: int
  exponents: Tuple[Tuple[int, int], ...]
  coeffs: _Array

  @property
  def size(self) -> int:
    return len(self.exponents)

  def _monomials(self, points: _Array, px: int = 0, py: int = 0) -> _Array:
    points = np.atleast_2d(points)
    xi, eta = points[:, 0:1], points[:, 1:2]
    a = np.array([e[0] for e in self.exponents])
    b = np.array([e[1] for e in self.exponents])
    scale = np.array([_falling(ai, px) * _falling(bi, py)
                      for ai, bi in self.exponents])
    return scale * xi**np.maximum(a - px, 0) * eta**np.maximum(b - py, 0)

  def values(self, points: _Array) -> _Array:
    """Basis values, shape (npts, nb)."""
    return self._monomials(points) @ self.coeffs.T

  def gradients(self, points: _Array) -> Tuple[_Array, _Array]:
    """Reference-space derivatives (d/dxi, d/deta), each (npts, nb)."""
    return (self._monomials(points, 1, 0) @ self.coeffs.T,
            self._monomials(points, 0, 1) @ self.coeffs.T)

  def hessians(self, points: _Array) -> Tuple[_Array, _Array, _Array]:
    """Second reference derivatives (xixi, xieta, etaeta)."""
    return (self._monomials(points, 2, 0) @ self.coeffs.T,
            self._monomials(points, 1, 1) @ self.coeffs.T,
            self._monomials(points, 0, 2) @ self.coeffs.T)

  def parity(self, axis: int) -> _Array:
    """Sign picked up by each basis function under reflection of `axis`."""
    return np.array([(-1.)**e[axis] for e in self.exponents])

  @property
  def linear_modes(self) -> Tuple[int, int]:
    """Indices of the xi and eta modes."""
    return self.exponents.index((1, 0)), self.exponents.index((0, 1))


@functools.lru_cache(maxsize=None)
def get_basis(k: int) -> Basis:
  if k < 0:
    raise ValueError(f'Polynomial degree must be non-negative, got {k}.')
  exponents = _monomial_exponents(k)
  gram = np.array([[_interval_moment(a1 + a2) * _interval_moment(b1 + b2)
                    for a2, b2 in exponents] for a1, b1 in exponents])
  lower = np.linalg.cholesky(gram)
  coeffs = np.linalg.inv(lower)
  return Basis(k=k, exponents=exponents, coeffs=coeffs)


def eval_basis(k: int, ref_point) -> Tuple[_Array, _Array, _Array]:
  """Values and reference derivatives of every basis function at a point."""
  basis = get_basis(k)
  point = np.asarray(ref_point, dtype=float).reshape(1, 2)
  if np.any(np.abs(point) > 0.5 + 1e-12):
    raise ValueError(f'Reference point {ref_point} outside [-1/2, 1/2]^2.')
  dxi, deta = basis.gradients(point)
  return basis.values(point)[0], dxi[0], deta[0]


def evaluate(coeffs: _Array, table: _Array) -> _Array:
  """Evaluates coefficient arrays (..., nb) on a table (npts, nb)."""
  return np.einsum('...b,pb->...p', coeffs, table)


@chex.dataclass
class DGField:
  """Per-cell coefficients on one mesh.

  Attributes:
    kind: mesh tag, `'C'` or `'D'`.
    k: polynomial degree.
    coeffs: array (nx, ny, ncomp, nb); components are (h, hP, hQ).
  """
  kind: str
  k: int
  coeffs: chex.Array

  @property
  def h(self) -> _Array:
    return self.coeffs[..., H, :]

  def cell_average(self, component: int = H) -> _Array:
    return self.coeffs[..., component, 0]


@functools.lru_cache(maxsize=None)
def projection_quadrature(k: int) -> Tuple[_Array, _Array]:
  """Composite Gauss rule (per quarter-cell) used for L2 projections.

  Integrating quarter by quarter keeps the rule exact for data whose kinks
  fall on the cell midlines, which is where the other mesh puts its faces.
  """
  rule = mesh_lib.gauss_points(k + 2)
  gx, gy = np.meshgrid(rule.points, rule.points, indexing='ij')
  wq = np.outer(rule.weights, rule.weights).ravel() / 4.
  pts, wts = [], []
  for l, m in mesh_lib.QUARTERS:
    cx, cy = mesh_lib.quarter_centre(l, m)
    pts.append(np.stack([cx + gx.ravel() / 2, cy + gy.ravel() / 2], axis=-1))
    wts.append(wq)
  return np.concatenate(pts), np.concatenate(wts)


@functools.lru_cache(maxsize=None)
def quarter_averages(k: int) -> _Array:
  """Average of each basis function over each quarter, shape (4, nb).

  Rows follow `mesh.QUARTERS`.
  """
  points, weights = projection_quadrature(k)
  table = get_basis(k).values(points) * weights[:, None] * 4.
  return table.reshape(len(mesh_lib.QUARTERS), -1, table.shape[-1]).sum(1)


def project_values(values: _Array, k: int) -> _Array:
  """Projects samples taken at `projection_quadrature(k)` points."""
  points, weights = projection_quadrature(k)
  table = get_basis(k).values(points)
  return np.einsum('...p,p,pb->...b', values, weights, table)


def project_l2(f: Callable[[_Array, _Array], _Array],
               grid: mesh_lib.CellGrid, k: int) -> _Array:
  """L2 projection of `f(x, y)` onto P^k on every cell of `grid`.

  Args:
    f: vectorised scalar function of physical coordinates.
    grid: the mesh.
    k: polynomial degree.

  Returns:
    Coefficients of shape (nx, ny, nb).
  """
  points, _ = projection_quadrature(k)
  xs, ys = grid.physical(points[:, 0], points[:, 1])
  values = np.asarray(f(xs, ys), dtype=float)
  values = np.broadcast_to(values, xs.shape)
  if not np.all(np.isfinite(values)):
    raise errors.ProjectionError(
        f'Non-finite values while projecting onto the {grid.kind} mesh.')
  return project_values(values, k)


def eval_field(field: DGField,
               component: int,
               grid: mesh_lib.CellGrid,
               x: float,
               y: float,
               cell: Optional[Tuple[int, int]] = None) -> float:
  """Point value of one component.

  Args:
    field: the DG field.
    component: component index (`H`, `HP` or `HQ`).
    grid: the mesh `field` lives on.
    x: physical x coordinate.
    y: physical y coordinate.
    cell: owning cell; defaults to the located one. Passing a cell gives the
      one-sided trace of that cell at a shared interface.

  Returns:
    The polynomial value.
  """
  i, j = grid.locate(x, y) if cell is None else cell
  if not (0 <= i < grid.nx and 0 <= j < grid.ny):
    raise errors.CellLookupError(f'No cell ({i}, {j}) on the {grid.kind} mesh.')
  xi, eta = grid.to_reference(i, j, x, y)
  values = get_basis(field.k).values(np.array([[xi, eta]]))[0]
  return float(field.coeffs[i, j, component] @ values)


def cell_average(field: DGField, component: int = H,
                 cell: Optional[Tuple[int, int]] = None):
  """Cell average(s): the leading orthonormal coefficient."""
  averages = field.cell_average(component)
  if cell is None:
    return averages
  return float(averages[cell])
