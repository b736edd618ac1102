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

"""Central discontinuous Galerkin forward-Euler stage on overlapping meshes.

One stage updates the solution on a target mesh from the solution on the
other (source) mesh:

    U_T <- theta P_T(U_S) + (1 - theta) U_T
           + dt [ (F, phi_x) + (G, phi_y) + (S, phi) - <F n_x + G n_y, phi> ],

with every integrand evaluated from the source mesh. Each target cell is the
union of four quarters, quarter (l, m) lying in source window cell
(i + l, j + m); the target faces lie on source cell centre lines, where the
source data are smooth. Volume integrals use a Gauss rule per quarter and
face integrals a Gauss rule per half-face.

The source window is the ghost-padded source array sliced to
`target.n + 1` cells per direction: from index 1 for a primal target and from
index 0 for a dual target.
"""

import functools
from typing import Optional, Sequence, Tuple

import attr
import chex
from gncdg._src import basis as basis_lib
from gncdg._src import errors
from gncdg._src import fe
from gncdg._src import mesh as mesh_lib
from gncdg._src import model
import numpy as np

_Array = np.ndarray

H, HP, HQ = basis_lib.H, basis_lib.HP, basis_lib.HQ


def window_offset(target_kind: str) -> int:
  return 1 if target_kind == mesh_lib.MeshKind.PRIMAL else 0


def source_window(padded: _Array, target: mesh_lib.CellGrid) -> _Array:
  """Slice of a ghost-padded source array covering every target cell."""
  o = window_offset(target.kind)
  return padded[o:o + target.nx + 1, o:o + target.ny + 1]


@chex.dataclass
class StageInputs:
  """Everything one Euler stage reads.

  Attributes:
    coeffs: (nx, ny, 3, nb) target coefficients at the stage start.
    bottom: (nx, ny, nb) target bottom.
    source_coeffs: (nx + 1, ny + 1, 3, nb) source window coefficients.
    source_bottom: (nx + 1, ny + 1, nb) source window bottom.
    source_velocity: (nx + 1, ny + 1, k + 1, k + 1, 2) source window nodal
      velocity.
    dt: time step.
    theta: dt / tau, in [0, 1].
  """
  coeffs: chex.Array
  bottom: chex.Array
  source_coeffs: chex.Array
  source_bottom: chex.Array
  source_velocity: chex.Array
  dt: float
  theta: float


@attr.define(frozen=True)
class Piece:
  """Quadrature points of one quarter or half-face of the target cell."""
  offset: Tuple[int, int]
  target_points: _Array
  source_points: _Array
  weights: _Array


@attr.define(frozen=True)
class StageTables:
  quarters: Tuple[Piece, ...]
  # Keyed by (axis, side) with side 0 for the low face and 1 for the high one.
  faces: Tuple[Tuple[Tuple[int, int], Tuple[Piece, Piece]], ...]

  def face(self, axis: int, side: int) -> Tuple[Piece, Piece]:
    return dict(self.faces)[(axis, side)]


@functools.lru_cache(maxsize=None)
def stage_tables(k: int) -> StageTables:
  """Target/source reference points of every quarter and half-face."""
  rule = mesh_lib.gauss_rule(k)
  g, w = rule.points, rule.weights
  gx, gy = np.meshgrid(g, g, indexing='ij')
  wq = np.outer(w, w).ravel() / 4.
  quarters = []
  for l, m in mesh_lib.QUARTERS:
    cx, cy = mesh_lib.quarter_centre(l, m)
    target = np.stack([cx + gx.ravel() / 2., cy + gy.ravel() / 2.], axis=-1)
    source = target + np.array([0.5 - l, 0.5 - m])
    quarters.append(Piece(offset=(l, m), target_points=target,
                          source_points=source, weights=wq))
  faces = []
  for axis in (0, 1):
    for side in (0, 1):
      halves = []
      for half in (0, 1):
        along = (2 * half - 1) / 4. + g / 2.
        across = np.full_like(along, side - 0.5)
        if axis == 0:
          target = np.stack([across, along], axis=-1)
          offset = (side, half)
        else:
          target = np.stack([along, across], axis=-1)
          offset = (half, side)
        source = target + np.array([0.5 - offset[0], 0.5 - offset[1]])
        halves.append(Piece(offset=offset, target_points=target,
                            source_points=source, weights=w / 2.))
      faces.append(((axis, side), tuple(halves)))
  return StageTables(quarters=tuple(quarters), faces=tuple(faces))


def compute_gamma(eta_corners) -> _Array:
  """Mean of the four corner surface values (last axis)."""
  eta_corners = np.asarray(eta_corners, dtype=float)
  return eta_corners.mean(axis=-1)


def gamma_table(inputs: StageInputs, k: int) -> _Array:
  """Per target cell, the mean source surface at its four corners."""
  centre = basis_lib.get_basis(k).values(np.zeros((1, 2)))[0]
  eta = (inputs.source_coeffs[..., H, :] + inputs.source_bottom) @ centre
  corners = np.stack([eta[l:l + eta.shape[0] - 1, m:m + eta.shape[1] - 1]
                      for l, m in mesh_lib.QUARTERS], axis=-1)
  return compute_gamma(corners)


def _aligned(window: _Array, offset: Tuple[int, int], shape) -> _Array:
  l, m = offset
  return window[l:l + shape[0], m:m + shape[1]]


def _source_state(inputs: StageInputs, piece: Piece, grid: mesh_lib.CellGrid,
                  k: int):
  """LocalState, bottom derivatives and bottom values at a piece's points."""
  shape = inputs.coeffs.shape[:2]
  coeffs = _aligned(inputs.source_coeffs, piece.offset, shape)
  bottom = _aligned(inputs.source_bottom, piece.offset, shape)
  velocity = _aligned(inputs.source_velocity, piece.offset, shape)
  basis = basis_lib.get_basis(k)
  pts = piece.source_points
  vals = basis.values(pts)
  rx, ry = basis.gradients(pts)
  rxx, rxy, ryy = basis.hessians(pts)
  dx, dy = grid.dx, grid.dy
  ev = basis_lib.evaluate
  eta = coeffs[..., H, :] + bottom
  vel, vel_x, vel_y = fe.evaluate_local(velocity, pts, dx, dy)
  state = model.LocalState(
      h=ev(coeffs[..., H, :], vals),
      hP=ev(coeffs[..., HP, :], vals),
      hQ=ev(coeffs[..., HQ, :], vals),
      u=vel[..., 0], v=vel[..., 1],
      u_x=vel_x[..., 0], u_y=vel_y[..., 0],
      v_x=vel_x[..., 1], v_y=vel_y[..., 1],
      h_x=ev(coeffs[..., H, :], rx) / dx,
      h_y=ev(coeffs[..., H, :], ry) / dy,
      eta_x=ev(eta, rx) / dx,
      eta_y=ev(eta, ry) / dy,
      eta_xx=ev(eta, rxx) / dx**2,
      eta_yy=ev(eta, ryy) / dy**2)
  b = model.BottomDerivatives(
      b_x=ev(bottom, rx) / dx, b_y=ev(bottom, ry) / dy,
      b_xx=ev(bottom, rxx) / dx**2, b_xy=ev(bottom, rxy) / (dx * dy),
      b_yy=ev(bottom, ryy) / dy**2)
  return state, b, ev(bottom, vals)


def _test(values: _Array, weights: _Array, table: _Array) -> _Array:
  """sum_q w_q values[..., q] table[q, b] over the leading component axis."""
  return np.einsum('c...q,q,qb->...cb', values, weights, table)


def _euler_stage(inputs: StageInputs, grid: mesh_lib.CellGrid, k: int,
                 p: model.PhysParams, well_balanced: bool,
                 gammas: Optional[_Array]) -> _Array:
  nx, ny = inputs.coeffs.shape[:2]
  chex.assert_shape(inputs.source_coeffs,
                    (nx + 1, ny + 1) + inputs.coeffs.shape[2:])
  chex.assert_shape(inputs.source_velocity, (nx + 1, ny + 1, k + 1, k + 1, 2))
  tables = stage_tables(k)
  basis = basis_lib.get_basis(k)
  dx, dy, g = grid.dx, grid.dy, p.g
  theta, dt = inputs.theta, inputs.dt
  if well_balanced and gammas is None:
    gammas = gamma_table(inputs, k)

  projection = np.zeros_like(inputs.coeffs)
  rate = np.zeros_like(inputs.coeffs)
  correction = np.zeros(inputs.coeffs.shape[:2] + (basis.size,))

  for piece in tables.quarters:
    state, b, b_values = _source_state(inputs, piece, grid, k)
    phi = basis.values(piece.target_points)
    phi_x, phi_y = basis.gradients(piece.target_points)
    phi_x, phi_y = phi_x / dx, phi_y / dy
    w = piece.weights
    flux_f = model.flux_F(state, b, p)
    flux_g = model.flux_G(state, b, p)
    source = model.source_S(state, b, p, hydrostatic=not well_balanced)
    projection += _test(np.stack([state.h, state.hP, state.hQ]), w, phi)
    rate += (_test(flux_f, w, phi_x) + _test(flux_g, w, phi_y)
             + _test(source, w, phi))
    if well_balanced:
      gamma = gammas[..., None]
      eta = state.h + b_values
      phi_b = 0.5 * g * b_values**2 - g * gamma * b_values
      rate[..., HP, :] += (
          np.einsum('...q,q,qb->...b', -g * (eta - gamma) * b.b_x, w, phi)
          - np.einsum('...q,q,qb->...b', phi_b, w, phi_x))
      rate[..., HQ, :] += (
          np.einsum('...q,q,qb->...b', -g * (eta - gamma) * b.b_y, w, phi)
          - np.einsum('...q,q,qb->...b', phi_b, w, phi_y))
      b_target = basis_lib.evaluate(inputs.bottom, phi)
      correction += np.einsum('...q,q,qb->...b', b_values - b_target, w, phi)

  for axis, h in ((0, dx), (1, dy)):
    for side, sign in ((0, 1.), (1, -1.)):
      for piece in tables.face(axis, side):
        state, b, b_values = _source_state(inputs, piece, grid, k)
        phi = basis.values(piece.target_points)
        w = piece.weights
        if axis == 0:
          flux = model.flux_F(state, b, p)
        else:
          flux = model.flux_G(state, b, p)
        rate += sign / h * _test(flux, w, phi)
        if well_balanced:
          phi_b = 0.5 * g * b_values**2 - g * gammas[..., None] * b_values
          rate[..., HP + axis, :] -= sign / h * np.einsum(
              '...q,q,qb->...b', phi_b, w, phi)

  out = theta * projection + (1. - theta) * inputs.coeffs + dt * rate
  if well_balanced:
    out[..., H, :] += theta * correction
  bad = ~np.isfinite(out)
  if np.any(bad):
    cell = tuple(int(c) for c in np.argwhere(bad)[0][:2])
    raise errors.BlowUpError(
        f'Non-finite update on the {grid.kind} mesh at cell {cell}.')
  return out


def euler_stage_standard(inputs: StageInputs, grid: mesh_lib.CellGrid, k: int,
                         p: model.PhysParams) -> _Array:
  """One CDG forward-Euler stage with the plain source term.

  Args:
    inputs: target state and source window.
    grid: the target mesh.
    k: degree.
    p: physical parameters.

  Returns:
    Updated target coefficients (nx, ny, 3, nb).
  """
  return _euler_stage(inputs, grid, k, p, well_balanced=False, gammas=None)


def euler_stage_wellbalanced(inputs: StageInputs, grid: mesh_lib.CellGrid,
                             k: int, p: model.PhysParams,
                             gammas: Optional[_Array] = None) -> _Array:
  """One CDG stage that keeps still water at rest exactly.

  The `-g h grad(b)` source is split as
  `-g (eta - gamma) grad(b) + grad(g b^2 / 2 - g gamma b)`, the gradient part
  integrated by parts, and the depth picks up
  `theta * P_T(b_S - b_T)`, which balances the projection of the source
  bottom onto the target mesh.

  Args:
    inputs: target state and source window.
    grid: the target mesh.
    k: degree.
    p: physical parameters.
    gammas: per target cell surface levels; computed with `gamma_table` when
      omitted.

  Returns:
    Updated target coefficients.
  """
  return _euler_stage(inputs, grid, k, p, well_balanced=True, gammas=gammas)


################################################################################
# Time step.
################################################################################


@attr.define(frozen=True)
class TimeStep:
  """A step size, its CDG weight theta = dt / tau and tau itself."""
  dt: float
  theta: float
  tau: float

  def clipped(self, dt_max: float) -> 'TimeStep':
    dt = min(self.dt, dt_max)
    return TimeStep(dt=dt, theta=_theta(dt, self.tau), tau=self.tau)


def _theta(dt: float, tau: float) -> float:
  return float(min(1., dt / tau)) if tau > 0. else 1.


@functools.lru_cache(maxsize=None)
def _speed_table(k: int) -> Tuple[_Array, _Array]:
  points = np.concatenate([q.target_points for q in stage_tables(k).quarters])
  return points, basis_lib.get_basis(k).values(points)


def wave_speeds(fields: Sequence[Tuple[_Array, _Array]], dx: float, dy: float,
                k: int, g: float) -> Tuple[float, float, float, float]:
  """Max |u|, |v| and max |u| + c, |v| + c over both meshes.

  Args:
    fields: per mesh, (coefficients (nx, ny, 3, nb), nodal velocity
      (nx, ny, k+1, k+1, 2)).
    dx: cell width.
    dy: cell height.
    k: degree.
    g: gravity.

  Returns:
    (a_x, a_y, c_x, c_y).
  """
  points, table = _speed_table(k)
  a_x = a_y = c_x = c_y = 0.
  for coeffs, velocity in fields:
    h = np.maximum(basis_lib.evaluate(coeffs[..., H, :], table), 0.)
    vel, _, _ = fe.evaluate_local(velocity, points, dx, dy)
    celerity = np.sqrt(g * h)
    u, v = np.abs(vel[..., 0]), np.abs(vel[..., 1])
    a_x = max(a_x, float(u.max(initial=0.)))
    a_y = max(a_y, float(v.max(initial=0.)))
    c_x = max(c_x, float((u + celerity).max(initial=0.)))
    c_y = max(c_y, float((v + celerity).max(initial=0.)))
  return a_x, a_y, c_x, c_y


def max_timestep(fields: Sequence[Tuple[_Array, _Array]],
                 dx: float,
                 dy: float,
                 k: int,
                 p: model.PhysParams,
                 cfl: float,
                 omega1: float,
                 positivity: bool = True,
                 fixed_dt: Optional[float] = None) -> TimeStep:
  """Largest admissible step.

  `tau` is the smaller of the stability bound `cfl / (c_x/dx + c_y/dy)` and,
  with positivity on, `omega1 / (4 (a_x/dx + a_y/dy))`. The adaptive step is
  `tau` itself; a fixed step is capped by the positivity bound only.

  Args:
    fields: per mesh, (coefficients, nodal velocity).
    dx: cell width.
    dy: cell height.
    k: degree.
    p: physical parameters.
    cfl: stability constant.
    omega1: first Gauss-Lobatto weight on [-1/2, 1/2].
    positivity: enforce the positivity bound.
    fixed_dt: fixed step, or None for adaptive stepping.

  Returns:
    The step.
  """
  a_x, a_y, c_x, c_y = wave_speeds(fields, dx, dy, k, p.g)
  rate = c_x / dx + c_y / dy
  tau_stab = cfl / rate if rate > 0. else np.inf
  speed = a_x / dx + a_y / dy
  tau_pos = omega1 / (4. * speed) if positivity and speed > 0. else np.inf
  tau = min(tau_stab, tau_pos)
  dt = tau if fixed_dt is None else min(fixed_dt, tau_pos)
  if not dt > 0. or np.isnan(dt):
    raise errors.TimeStepError(f'Time step collapsed to {dt}.')
  return TimeStep(dt=float(dt), theta=_theta(dt, tau), tau=float(tau))


def mesh_total(coeffs: _Array, grid: mesh_lib.CellGrid,
               component: int = H) -> float:
  """Integral of one component over the cells of `grid`."""
  return float(np.sum(coeffs[..., component, 0]) * grid.area)
