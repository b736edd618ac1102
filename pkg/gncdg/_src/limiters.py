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

"""Slope, positivity and bottom-compatibility limiters.

All limiters act on per-cell coefficient arrays whose last axis runs over the
orthonormal basis, so the cell average is always the leading coefficient and
is left untouched by the slope and positivity limiters.
"""

from typing import Tuple

from absl import logging
from gncdg._src import basis as basis_lib
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

_Array = np.ndarray

DEFAULT_TVB_M = 10.


def minmod(a, b, c) -> _Array:
  """Elementwise minmod: the smallest magnitude if all signs agree, else 0."""
  a, b, c = np.broadcast_arrays(
      *(np.asarray(v, dtype=float) for v in (a, b, c)))
  s = np.sign(a)
  same = (s == np.sign(b)) & (s == np.sign(c))
  return np.where(same, s * np.minimum(np.abs(a), np.minimum(np.abs(b),
                                                             np.abs(c))), 0.)


def minmod_tvb(a, b, c, threshold: float) -> _Array:
  """TVB-modified minmod: `a` itself when |a| <= threshold."""
  a = np.asarray(a, dtype=float)
  return np.where(np.abs(a) <= threshold, a, minmod(a, b, c))


def _trace_tables(k: int):
  """Basis values at the four face midpoints: left, right, bottom, top."""
  points = np.array([[-0.5, 0.], [0.5, 0.], [0., -0.5], [0., 0.5]])
  return basis_lib.get_basis(k).values(points)


def tvb_minmod_limit(coeffs: _Array, padded_averages: _Array,
                     grid: mesh_lib.CellGrid, k: int,
                     m: float = DEFAULT_TVB_M) -> Tuple[_Array, _Array]:
  """Direction-by-direction TVB minmod limiting.

  Args:
    coeffs: (nx, ny, ncomp, nb) coefficients of the limited variables.
    padded_averages: (nx + 2, ny + 2, ncomp) cell averages with one ghost
      layer, for the neighbour differences.
    grid: the mesh.
    k: polynomial degree.
    m: TVB constant; deviations below `m * h^2` are left alone.

  Returns:
    The limited coefficients and a boolean (nx, ny, ncomp) mask of the cells
    that were limited.
  """
  if k == 0:
    return coeffs, np.zeros(coeffs.shape[:-1], dtype=bool)
  basis = basis_lib.get_basis(k)
  ix, iy = basis.linear_modes
  traces = basis_lib.evaluate(coeffs, _trace_tables(k))
  avg = coeffs[..., 0]
  centre = padded_averages[1:-1, 1:-1]
  forward_x = padded_averages[2:, 1:-1] - centre
  backward_x = centre - padded_averages[:-2, 1:-1]
  forward_y = padded_averages[1:-1, 2:] - centre
  backward_y = centre - padded_averages[1:-1, :-2]

  flagged = np.zeros(avg.shape, dtype=bool)
  slopes = []
  for h, fwd, bwd, lo, hi, mode in (
      (grid.dx, forward_x, backward_x, 0, 1, ix),
      (grid.dy, forward_y, backward_y, 2, 3, iy)):
    threshold = m * h * h
    right = traces[..., hi] - avg
    left = avg - traces[..., lo]
    flagged |= minmod_tvb(right, fwd, bwd, threshold) != right
    flagged |= minmod_tvb(left, fwd, bwd, threshold) != left
    half_slope = np.sqrt(3.) * coeffs[..., mode]
    slopes.append(minmod_tvb(half_slope, fwd, bwd, threshold) / np.sqrt(3.))

  limited = np.zeros_like(coeffs)
  limited[..., 0] = avg
  limited[..., ix] = slopes[0]
  limited[..., iy] = slopes[1]
  out = np.where(flagged[..., None], limited, coeffs)
  logging.vlog(1, 'TVB limiter: %d of %d cell components limited',
               int(flagged.sum()), flagged.size)
  return out, flagged


def positivity_limit(h_coeffs: _Array, point_table: _Array,
                     tol: float = 1e-12) -> Tuple[_Array, _Array]:
  """Scales each cell's depth about its average so it is >= 0 at the points.

  Args:
    h_coeffs: (nx, ny, nb) depth coefficients.
    point_table: basis values at the positivity points, (npts, nb).
    tol: relative tolerance below which a negative average counts as
      round-off and is clamped to zero.

  Returns:
    The limited coefficients and the per-cell scaling factors.
  """
  avg = h_coeffs[..., 0]
  scale = max(1., float(np.max(np.abs(avg), initial=0.)))
  worst = float(np.min(avg, initial=0.))
  if worst < -tol * scale:
    cell = np.unravel_index(int(np.argmin(avg)), avg.shape)
    raise errors.PositivityError(
        f'Negative cell-average depth {worst:.3e} in cell {tuple(cell)}.')
  out = np.array(h_coeffs, copy=True)
  clamped = avg < 0.
  if np.any(clamped):
    logging.warning('Clamping %d round-off negative depth averages to zero.',
                    int(clamped.sum()))
    out[..., 0] = np.where(clamped, 0., avg)
    avg = out[..., 0]
  values = basis_lib.evaluate(out, point_table)
  lowest = values.min(axis=-1)
  with np.errstate(divide='ignore', invalid='ignore'):
    theta = np.where(lowest < 0., avg / (avg - lowest), 1.)
  theta = np.clip(theta, 0., 1.)
  out[..., 1:] *= theta[..., None]
  logging.vlog(1, 'Positivity limiter: %d cells scaled',
               int(np.sum(theta < 1.)))
  return out, theta


################################################################################
# Bottom compatibility.
################################################################################


def _constraint_matrix(mesh: mesh_lib.MeshPair, k: int) -> sparse.csr_matrix:
  """Rows: primal-average and dual-average constraints on (b^C, b^D).

  A primal row says that the average of b^C over a primal cell equals the
  average of b^D over it; a dual row is the mirror statement, kept only for
  dual cells covered entirely by real primal cells.
  """
  nb = basis_lib.num_basis(k)
  qavg = basis_lib.quarter_averages(k)
  primal, dual = mesh.primal, mesh.dual
  offset_d = primal.nx * primal.ny * nb

  def index(grid, i, j, shift):
    return shift + (i * grid.ny + j) * nb

  rows, cols, vals = [], [], []
  row = 0
  for target, source, t_shift, s_shift, lag in (
      (primal, dual, 0, offset_d, 0), (dual, primal, offset_d, 0, -1)):
    for i in range(target.nx):
      for j in range(target.ny):
        cells = []
        for l, m in mesh_lib.QUARTERS:
          si, sj = i + l + lag, j + m + lag
          if source.periodic_x:
            si %= source.nx
          if source.periodic_y:
            sj %= source.ny
          if not (0 <= si < source.nx and 0 <= sj < source.ny):
            break
          cells.append((si, sj, mesh_lib.QUARTERS.index((1 - l, 1 - m))))
        if len(cells) < 4:
          continue
        rows.append(row)
        cols.append(index(target, i, j, t_shift))
        vals.append(1.)
        for si, sj, q in cells:
          base = index(source, si, sj, s_shift)
          rows.extend([row] * nb)
          cols.extend(range(base, base + nb))
          vals.extend(-0.25 * qavg[q])
        row += 1
  size = offset_d + dual.nx * dual.ny * nb
  return sparse.coo_matrix((vals, (rows, cols)), shape=(row, size)).tocsr()


def bottom_residuals(b_primal: _Array, b_dual: _Array, mesh: mesh_lib.MeshPair,
                     k: int) -> _Array:
  """Violations of the average constraints; zero when they hold."""
  a = _constraint_matrix(mesh, k)
  return a @ np.concatenate([b_primal.ravel(), b_dual.ravel()])


def _min_norm_correction(a: sparse.csr_matrix, rhs: _Array):
  """Minimum-norm solution of `a delta = rhs` and the LSQR iteration count.

  LSQR also copes with the rank deficiency of periodic meshes.
  """
  result = sparse_linalg.lsqr(a, rhs, atol=1e-15, btol=1e-15, conlim=1e12,
                              iter_lim=max(1000, 4 * a.shape[0]))
  return result[0], result[2]


def _point_values_matrix(num_cells: int, k: int) -> sparse.csr_matrix:
  """Block-diagonal evaluation of every cell at the positivity points."""
  table = basis_lib.get_basis(k).values(
      mesh_lib.positivity_point_set(k).ref_points)
  return sparse.kron(sparse.identity(num_cells, format='csr'),
                     sparse.csr_matrix(table), format='csr')


def _enforce_upper_bounds(a: sparse.csr_matrix, v: sparse.csr_matrix,
                          x0: _Array, x: _Array, upper: _Array, slack: float,
                          nb: int, max_sweeps: int) -> _Array:
  """Pulls a compatible `x` back under `upper` at every point of `v`.

  Violated points join an active set held at their bound, and the smallest
  change of `x0` meeting the constraints and the active set is recomputed.
  Whatever excess remains afterwards is removed by lowering every cell by the
  same constant, which leaves the constraints intact.
  """
  active = np.zeros(upper.shape, dtype=bool)
  target_a = a @ x0
  for sweep in range(max_sweeps):
    new = (v @ x - upper > slack) & ~active
    if not np.any(new):
      break
    active |= new
    rows = np.flatnonzero(active)
    stacked = sparse.vstack([a, v[rows]], format='csr')
    delta, _ = _min_norm_correction(
        stacked, np.concatenate([target_a, v[rows] @ x0 - upper[rows]]))
    trial = x0 - delta
    if np.max(np.abs(a @ trial), initial=0.) > slack:
      logging.vlog(1, 'Bounded bottom sweep %d is inconsistent', sweep)
      break
    x = trial
  logging.vlog(1, 'Bottom bounds: %d active points', int(active.sum()))
  shift = float(np.max(v @ x - upper, initial=0.))
  if shift > slack:
    logging.warning('Bottom lowered by %.3e to stay under its own maxima',
                    shift)
    x = np.array(x, copy=True)
    x[::nb] -= shift
  return x


def modify_bathymetry(b_primal: _Array, b_dual: _Array,
                      mesh: mesh_lib.MeshPair, k: int,
                      tol: float = 1e-13,
                      bounded: bool = True,
                      max_sweeps: int = 50) -> Tuple[_Array, _Array]:
  """Smallest L2 change of (b^C, b^D) satisfying the average constraints.

  The correction is the minimum-norm solution `delta` of `A delta = A x0`;
  the modified bottoms are `x0 - delta`. With `bounded`, no cell may rise
  above the largest value it had at the positivity points, so a lake whose
  surface clears the input bottom also clears the modified one. Input that
  already satisfies the constraints is returned unchanged.

  Args:
    b_primal: (nx, ny, nb) primal bottom coefficients.
    b_dual: dual bottom coefficients.
    mesh: the mesh pair.
    k: polynomial degree.
    tol: required max-norm residual, relative to the bottom's magnitude.
    bounded: keep each cell under its own maximum.
    max_sweeps: active-set sweeps before falling back to a uniform shift.

  Returns:
    The modified primal and dual coefficients.
  """
  a = _constraint_matrix(mesh, k)
  x0 = np.concatenate([b_primal.ravel(), b_dual.ravel()])
  scale = max(1., float(np.max(np.abs(x0), initial=0.)))
  slack = tol * scale
  rhs = a @ x0
  if a.shape[0] == 0 or np.max(np.abs(rhs)) <= slack:
    return np.array(b_primal, copy=True), np.array(b_dual, copy=True)
  delta, iterations = _min_norm_correction(a, rhs)
  x = x0 - delta
  logging.vlog(1, 'Bottom modification: %d constraints, %d iterations',
               a.shape[0], iterations)
  if bounded:
    nb = basis_lib.num_basis(k)
    v = _point_values_matrix(x0.size // nb, k)
    values = (v @ x0).reshape(x0.size // nb, -1)
    upper = np.repeat(values.max(axis=-1), values.shape[-1])
    x = _enforce_upper_bounds(a, v, x0, x, upper, slack, nb, max_sweeps)
  residual = float(np.max(np.abs(a @ x)))
  logging.vlog(1, 'Bottom modification residual %.3e', residual)
  if residual > slack:
    raise errors.BottomModificationError(
        f'Bottom constraints not met: residual {residual:.3e}.')
  n = b_primal.size
  return x[:n].reshape(b_primal.shape), x[n:].reshape(b_dual.shape)
