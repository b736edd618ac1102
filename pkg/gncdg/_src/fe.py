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

"""Continuous finite-element recovery of the velocity (u, v).

Given the depth h and the auxiliary momenta (hP, hQ) on one mesh, the velocity
solves the coupled elliptic system

    -d_x[(a/3) h^3 div - (a/2) h^2 v b_y] - d_y[(a/2) h^2 v b_x]
        + f_u u + f_v v = hP,

and its y-mirror for hQ, in weak form with natural boundary conditions. The
discrete space is the continuous tensor-product Lagrange space of degree k on
the mesh rectangles, with nodes at the Gauss-Lobatto points of each cell.

Cells whose depth falls below `h0 = max(dx, dy)^(k+1)` anywhere on the
quadrature grid are treated as near-dry: their nodes get the regularised
pointwise velocity of `dry_fallback_velocity` and enter the solve as
prescribed values.
"""

import functools
import math
from typing import Mapping, Optional, Tuple

from absl import logging
import attr
import chex
from gncdg._src import basis as basis_lib
from gncdg._src import boundary
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
from gncdg._src import model
import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

_Array = np.ndarray

DEFAULT_TOL = 1e-10


################################################################################
# Reference element.
################################################################################


def lagrange_nodes(k: int) -> _Array:
  return mesh_lib.lobatto_points(k + 1).points


@functools.lru_cache(maxsize=None)
def _lagrange_polys(k: int):
  nodes = lagrange_nodes(k)
  polys = []
  for a, z in enumerate(nodes):
    poly = npoly.polyfromroots(np.delete(nodes, a))
    polys.append(poly / npoly.polyval(z, poly))
  return polys


def lagrange_1d(k: int, x: _Array) -> Tuple[_Array, _Array]:
  """Values and derivatives of the k+1 nodal polynomials, each (npts, k+1)."""
  x = np.asarray(x, dtype=float)
  polys = _lagrange_polys(k)
  values = np.stack([npoly.polyval(x, c) for c in polys], axis=-1)
  derivs = np.stack([npoly.polyval(x, npoly.polyder(c)) for c in polys],
                    axis=-1)
  return values, derivs


def shape_functions(k: int, points: _Array) -> Tuple[_Array, _Array, _Array]:
  """Tensor shape functions and reference gradients, each (npts, (k+1)^2).

  Local node (a, c) (x index a, y index c) has flat index `a * (k+1) + c`.
  """
  lx, dlx = lagrange_1d(k, points[:, 0])
  ly, dly = lagrange_1d(k, points[:, 1])
  n = np.einsum('pa,pc->pac', lx, ly).reshape(len(points), -1)
  nx = np.einsum('pa,pc->pac', dlx, ly).reshape(len(points), -1)
  ny = np.einsum('pa,pc->pac', lx, dly).reshape(len(points), -1)
  return n, nx, ny


@functools.lru_cache(maxsize=None)
def fe_quadrature(k: int) -> Tuple[_Array, _Array]:
  """Tensor Gauss rule exact to degree 3k+2 per direction."""
  rule = mesh_lib.gauss_points(math.ceil((3 * k + 3) / 2))
  gx, gy = np.meshgrid(rule.points, rule.points, indexing='ij')
  return (np.stack([gx.ravel(), gy.ravel()], axis=-1),
          np.outer(rule.weights, rule.weights).ravel())


def node_points(k: int) -> _Array:
  """Reference coordinates of the local nodes, flat-indexed as above."""
  z = lagrange_nodes(k)
  gx, gy = np.meshgrid(z, z, indexing='ij')
  return np.stack([gx.ravel(), gy.ravel()], axis=-1)


################################################################################
# Global numbering and the velocity field.
################################################################################


@attr.define(frozen=True)
class NodeLayout:
  """Global node numbering of the continuous space on one grid."""
  grid: mesh_lib.CellGrid
  k: int

  @property
  def shape(self) -> Tuple[int, int]:
    g = self.grid
    return (self.k * g.nx + (0 if g.periodic_x else 1),
            self.k * g.ny + (0 if g.periodic_y else 1))

  @property
  def size(self) -> int:
    return self.shape[0] * self.shape[1]

  def axis_index(self, axis: int) -> _Array:
    """(ncells, k+1) global node index along one axis."""
    n_cells = self.grid.nx if axis == 0 else self.grid.ny
    idx = self.k * np.arange(n_cells)[:, None] + np.arange(self.k + 1)
    return idx % self.shape[axis]

  def cell_nodes(self) -> _Array:
    """(ncx, ncy, (k+1)^2) flat global indices of each cell's nodes."""
    ix, iy = self.axis_index(0), self.axis_index(1)
    flat = ix[:, None, :, None] * self.shape[1] + iy[None, :, None, :]
    return flat.reshape(self.grid.nx, self.grid.ny, -1)

  def coordinates(self) -> Tuple[_Array, _Array]:
    """Physical x and y of the global node lines."""
    out = []
    for axis, (origin, h, n) in enumerate(
        ((self.grid.x0, self.grid.dx, self.grid.nx),
         (self.grid.y0, self.grid.dy, self.grid.ny))):
      coord = np.empty(self.shape[axis])
      cells = np.arange(n)[:, None]
      coord[self.axis_index(axis)] = (origin + cells * h
                                      + lagrange_nodes(self.k) * h)
      out.append(coord)
    return out[0], out[1]


@chex.dataclass
class FEVelocityField:
  """Continuous nodal velocity on one mesh.

  Attributes:
    kind: mesh tag.
    k: degree.
    u: (NX, NY) nodal x-velocity.
    v: (NX, NY) nodal y-velocity.
    prescribed: (NX, NY) mask of nodes whose values were imposed.
    wet: (ncx, ncy) mask of the cells included in the solve.
    x_index: (ncx, k+1) global node index along x of each cell's nodes.
    y_index: (ncy, k+1) the same along y.
  """
  kind: str
  k: int
  u: chex.Array
  v: chex.Array
  prescribed: chex.Array
  wet: chex.Array
  x_index: chex.Array
  y_index: chex.Array

  def local(self) -> _Array:
    """Per-cell nodal values, (ncx, ncy, k+1, k+1, 2)."""
    ix = self.x_index[:, None, :, None]
    iy = self.y_index[None, :, None, :]
    return np.stack([self.u[ix, iy], self.v[ix, iy]], axis=-1)


def evaluate_local(local: _Array, points: _Array, dx: float,
                   dy: float) -> Tuple[_Array, _Array, _Array]:
  """Values and physical gradients of cell-local nodal data.

  Args:
    local: (..., k+1, k+1, ncomp) nodal values.
    points: (npts, 2) reference points.
    dx: cell width.
    dy: cell height.

  Returns:
    Values, x-derivatives and y-derivatives, each (..., npts, ncomp).
  """
  k = local.shape[-2] - 1
  lx, dlx = lagrange_1d(k, points[:, 0])
  ly, dly = lagrange_1d(k, points[:, 1])
  values = np.einsum('...acd,pa,pc->...pd', local, lx, ly)
  d_x = np.einsum('...acd,pa,pc->...pd', local, dlx, ly) / dx
  d_y = np.einsum('...acd,pa,pc->...pd', local, lx, dly) / dy
  return values, d_x, d_y


################################################################################
# Assembly and solve.
################################################################################


@attr.define
class SparseSystem:
  """Coupled (u, v) system; unknowns blocked as [u nodes, v nodes].

  Attributes:
    matrix: CSR matrix of size 2N x 2N.
    rhs: right-hand side, length 2N.
    fixed: mask of prescribed unknowns.
    fixed_values: values of the prescribed unknowns (zero elsewhere).
    node_shape: (NX, NY).
    tol: relative residual the solve must reach.
  """
  matrix: sparse.csr_matrix
  rhs: _Array
  fixed: _Array
  fixed_values: _Array
  node_shape: Tuple[int, int]
  tol: float = DEFAULT_TOL

  @property
  def num_free(self) -> int:
    return int(np.sum(~self.fixed))


def _physical_fields(coeffs: _Array, bottom: _Array, grid: mesh_lib.CellGrid,
                     k: int, points: _Array):
  """h, hP, hQ, h_x, h_y and bottom derivatives at `points` of each cell."""
  basis = basis_lib.get_basis(k)
  vals = basis.values(points)
  gx, gy = basis.gradients(points)
  hxx, hxy, hyy = basis.hessians(points)
  ev = basis_lib.evaluate
  h = ev(coeffs[..., basis_lib.H, :], vals)
  fields = dict(
      h=h,
      hP=ev(coeffs[..., basis_lib.HP, :], vals),
      hQ=ev(coeffs[..., basis_lib.HQ, :], vals),
      h_x=ev(coeffs[..., basis_lib.H, :], gx) / grid.dx,
      h_y=ev(coeffs[..., basis_lib.H, :], gy) / grid.dy)
  bottom_derivs = model.BottomDerivatives(
      b_x=ev(bottom, gx) / grid.dx,
      b_y=ev(bottom, gy) / grid.dy,
      b_xx=ev(bottom, hxx) / grid.dx**2,
      b_xy=ev(bottom, hxy) / (grid.dx * grid.dy),
      b_yy=ev(bottom, hyy) / grid.dy**2)
  return fields, bottom_derivs


def assemble_velocity_system(coeffs: _Array,
                             bottom: _Array,
                             p: model.PhysParams,
                             grid: mesh_lib.CellGrid,
                             k: int,
                             fixed: Optional[_Array] = None,
                             fixed_values: Optional[_Array] = None,
                             tol: float = DEFAULT_TOL) -> SparseSystem:
  """Assembles the weak velocity equations on every cell of `grid`.

  Args:
    coeffs: (ncx, ncy, 3, nb) DG coefficients of (h, hP, hQ).
    bottom: (ncx, ncy, nb) projected bottom of the same mesh.
    p: physical parameters.
    grid: the mesh.
    k: degree.
    fixed: optional (2, NX, NY) mask of prescribed (u, v) nodes.
    fixed_values: the prescribed values, same shape.
    tol: relative residual for the solve.

  Returns:
    The assembled system.
  """
  chex.assert_shape(coeffs, grid.shape + (3, basis_lib.num_basis(k)))
  chex.assert_shape(bottom, grid.shape + (basis_lib.num_basis(k),))
  layout = NodeLayout(grid=grid, k=k)
  points, weights = fe_quadrature(k)
  fields, b = _physical_fields(coeffs, bottom, grid, k, points)
  alpha = p.alpha
  h, h_x, h_y = fields['h'], fields['h_x'], fields['h_y']
  stiff = alpha / 3. * h**3
  cross_x = alpha / 2. * h**2 * b.b_x
  cross_y = alpha / 2. * h**2 * b.b_y
  f_uu = h * (1. + alpha * h_x * b.b_x + alpha / 2. * h * b.b_xx
              + alpha * b.b_x**2)
  f_uv = h * (alpha * h_y * b.b_x + alpha / 2. * h * b.b_xy
              + alpha * b.b_x * b.b_y)
  f_vu = h * (alpha * h_x * b.b_y + alpha / 2. * h * b.b_xy
              + alpha * b.b_x * b.b_y)
  f_vv = h * (1. + alpha * h_y * b.b_y + alpha / 2. * h * b.b_yy
              + alpha * b.b_y**2)
  for name, arr in (('h', h), ('b', b.b_x), ('b', b.b_y), ('b', b.b_xx),
                    ('b', b.b_yy), ('hP', fields['hP']),
                    ('hQ', fields['hQ'])):
    if not np.all(np.isfinite(arr)):
      raise errors.SolverError(f'Non-finite {name} in the velocity system.')

  n, rx, ry = shape_functions(k, points)
  nx, ny = rx / grid.dx, ry / grid.dy

  def form(coef, test, trial):
    return np.einsum('ijq,q,qa,qb->ijab', coef, weights, test, trial)

  k_uu = form(stiff, nx, nx) + form(f_uu, n, n)
  k_uv = (form(stiff, nx, ny) - form(cross_y, nx, n) + form(cross_x, ny, n)
          + form(f_uv, n, n))
  k_vu = (form(stiff, ny, nx) - form(cross_x, ny, n) + form(cross_y, nx, n)
          + form(f_vu, n, n))
  k_vv = form(stiff, ny, ny) + form(f_vv, n, n)

  nodes = layout.cell_nodes()
  size = layout.size
  rows = nodes[..., :, None]
  cols = nodes[..., None, :]
  row_idx, col_idx, data = [], [], []
  for block, r_shift, c_shift in ((k_uu, 0, 0), (k_uv, 0, size),
                                  (k_vu, size, 0), (k_vv, size, size)):
    r, c = np.broadcast_arrays(rows + r_shift, cols + c_shift)
    row_idx.append(r.ravel())
    col_idx.append(c.ravel())
    data.append(block.ravel() * grid.area)
  matrix = sparse.coo_matrix(
      (np.concatenate(data), (np.concatenate(row_idx),
                              np.concatenate(col_idx))),
      shape=(2 * size, 2 * size)).tocsr()

  rhs = np.zeros(2 * size)
  for comp, shift in ((basis_lib.HP, 0), (basis_lib.HQ, size)):
    name = 'hP' if comp == basis_lib.HP else 'hQ'
    moments = np.einsum('ijq,q,qa->ija', fields[name], weights, n) * grid.area
    np.add.at(rhs, nodes.ravel() + shift, moments.ravel())

  if fixed is None:
    fixed = np.zeros((2,) + layout.shape, dtype=bool)
    fixed_values = np.zeros((2,) + layout.shape)
  return SparseSystem(matrix=matrix, rhs=rhs, fixed=fixed.ravel(),
                      fixed_values=np.where(fixed, fixed_values, 0.).ravel(),
                      node_shape=layout.shape, tol=tol)


def solve_velocity(system: SparseSystem) -> Tuple[_Array, _Array]:
  """Solves for the free unknowns with a sparse direct factorisation.

  Args:
    system: the assembled system.

  Returns:
    Nodal (u, v), each of shape `system.node_shape`.
  """
  x = np.array(system.fixed_values, copy=True)
  free = ~system.fixed
  if np.any(free):
    k_ff = system.matrix[free][:, free]
    rhs = system.rhs[free]
    if np.any(system.fixed):
      rhs = rhs - system.matrix[free][:, system.fixed] @ x[system.fixed]
    x_free = np.atleast_1d(sparse_linalg.spsolve(k_ff.tocsc(), rhs))
    r_norm = float(np.linalg.norm(k_ff @ x_free - rhs))
    b_norm = float(np.linalg.norm(rhs))
    residual = r_norm / b_norm if b_norm > 0. else r_norm
    logging.vlog(1, 'Velocity solve: %d unknowns, residual %.3e',
                 int(free.sum()), residual)
    if not np.all(np.isfinite(x_free)) or not residual <= system.tol:
      raise errors.SolverError(
          f'Velocity solve failed: relative residual {residual:.3e} with '
          f'{int(free.sum())} unknowns.')
    x[free] = x_free
  size = system.node_shape[0] * system.node_shape[1]
  return (x[:size].reshape(system.node_shape),
          x[size:].reshape(system.node_shape))


def dry_fallback_velocity(h, hp, hq, b_x, b_y, p: model.PhysParams,
                          eps: float) -> Tuple[_Array, _Array]:
  """Regularised pointwise velocity for near-dry cells.

  Args:
    h: depth (negative values are treated as zero).
    hp: hP.
    hq: hQ.
    b_x: bottom x-slope.
    b_y: bottom y-slope.
    p: physical parameters.
    eps: regularisation, `min(dx^4, dy^4)`.

  Returns:
    (u, v), broadcast to the common shape of the inputs.
  """
  h = np.maximum(np.asarray(h, dtype=float), 0.)
  h4 = h**4
  denom = np.sqrt(h4 + np.maximum(h4, eps))
  safe = np.where(denom > 0., denom, 1.)
  p_reg = np.where(denom > 0., np.sqrt(2.) * h * hp / safe, 0.)
  q_reg = np.where(denom > 0., np.sqrt(2.) * h * hq / safe, 0.)
  a = p.alpha
  det = 1. + a * b_x**2 + a * b_y**2
  u = ((1. + a * b_y**2) * p_reg - a * b_x * b_y * q_reg) / det
  v = ((1. + a * b_x**2) * q_reg - a * b_x * b_y * p_reg) / det
  return u, v


def wet_cells(h_coeffs: _Array, grid: mesh_lib.CellGrid, k: int) -> _Array:
  """Cells whose depth is at least `h0` on the whole quadrature grid."""
  points, _ = fe_quadrature(k)
  h = basis_lib.evaluate(h_coeffs, basis_lib.get_basis(k).values(points))
  h0 = max(grid.dx**(k + 1), grid.dy**(k + 1))
  return h.min(axis=-1) >= h0


def recover_velocity(coeffs: _Array,
                     bottom: _Array,
                     p: model.PhysParams,
                     grid: mesh_lib.CellGrid,
                     k: int,
                     sides: Optional[Mapping[str, str]] = None,
                     incident: Optional[boundary.IncidentWave] = None,
                     t: float = 0.,
                     tol: float = DEFAULT_TOL,
                     expect_wet: bool = False) -> FEVelocityField:
  """Velocity on one mesh from its (h, hP, hQ).

  Args:
    coeffs: (ncx, ncy, 3, nb) conserved coefficients.
    bottom: (ncx, ncy, nb) projected bottom.
    p: physical parameters.
    grid: the mesh.
    k: degree.
    sides: boundary kind per side; an inflow side prescribes the incident
      long-wave velocity on its nodes.
    incident: incident wave for an inflow side.
    t: time, for the incident wave.
    tol: relative residual for the solve.
    expect_wet: warn when near-dry cells show up.

  Returns:
    The continuous velocity field.
  """
  layout = NodeLayout(grid=grid, k=k)
  nodes = layout.cell_nodes()
  wet = wet_cells(coeffs[..., basis_lib.H, :], grid, k)
  fixed = np.zeros((2, layout.size), dtype=bool)
  values = np.zeros((2, layout.size))

  dry = ~wet
  if np.any(dry):
    fields, b = _physical_fields(coeffs[dry][None], bottom[dry][None], grid, k,
                                 node_points(k))
    eps = min(grid.dx**4, grid.dy**4)
    u, v = dry_fallback_velocity(fields['h'], fields['hP'], fields['hQ'],
                                 b.b_x, b.b_y, p, eps)
    idx = nodes[dry].ravel()
    counts = np.bincount(idx, minlength=layout.size)
    for comp, vals in enumerate((u, v)):
      sums = np.bincount(idx, weights=vals.ravel(), minlength=layout.size)
      values[comp] = np.where(counts > 0, sums / np.maximum(counts, 1), 0.)
    fixed[:, counts > 0] = True
    if expect_wet:
      logging.warning('%d near-dry cells on the %s mesh of a wet run',
                      int(dry.sum()), grid.kind)
    else:
      logging.vlog(1, '%d near-dry cells on the %s mesh', int(dry.sum()),
                   grid.kind)

  if (sides is not None and sides['left'] == mesh_lib.BoundaryKind.INFLOW
      and not grid.periodic_x):
    x_nodes, _ = layout.coordinates()
    eta = incident.eta(x_nodes[0], t)
    inflow = np.zeros(layout.shape, dtype=bool)
    inflow[0, :] = True
    inflow = inflow.ravel()
    fixed[:, inflow] = True
    values[0, inflow] = incident.velocity(eta, p.g)
    values[1, inflow] = 0.

  system = assemble_velocity_system(
      coeffs, bottom, p, grid, k, fixed=fixed.reshape((2,) + layout.shape),
      fixed_values=values.reshape((2,) + layout.shape), tol=tol)
  u, v = solve_velocity(system)
  return FEVelocityField(
      kind=grid.kind, k=k, u=u, v=v,
      prescribed=fixed[0].reshape(layout.shape) | fixed[1].reshape(
          layout.shape),
      wet=wet, x_index=layout.axis_index(0), y_index=layout.axis_index(1))
