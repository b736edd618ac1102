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

"""SSP-RK3 time stepping of the coupled primal/dual solution.

A forward-Euler substep runs the CDG stage on both meshes from the state at
the substep start, then the TVB and positivity limiters. The SSP-RK3 step
combines three substeps convexly and recovers the velocity after every
combination, so each substep sees a velocity consistent with its input.
"""

import math
import timeit
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, TypeVar

from absl import logging
import attr
import chex
from gncdg._src import basis as basis_lib
from gncdg._src import bathymetry as bathymetry_lib
from gncdg._src import boundary
from gncdg._src import cdg
from gncdg._src import config as config_lib
from gncdg._src import errors
from gncdg._src import fe
from gncdg._src import gauges as gauges_lib
from gncdg._src import limiters
from gncdg._src import mesh as mesh_lib
from gncdg._src import model
import jax.numpy as jnp
import numpy as np

_Array = np.ndarray
_State = TypeVar('_State')

H = basis_lib.H
_Kind = mesh_lib.MeshKind
_KINDS = (_Kind.PRIMAL, _Kind.DUAL)

# Shu-Osher form: (weight of the Euler result, Euler input time, output time),
# times as fractions of dt.
SSP_RK3_STAGES = ((1., 0., 1.), (0.25, 1., 0.5), (2. / 3., 0.5, 1.))


def ssp_rk3_step(u: _State, t: float, dt: float,
                 euler: Callable[[_State, float], _State],
                 combine: Callable[[_State, _State, float, float], _State],
                 on_stage: Optional[Callable[[int], None]] = None) -> _State:
  """Three-stage third-order SSP Runge-Kutta step.

  Args:
    u: state at time t.
    t: time.
    dt: step.
    euler: `euler(v, s)` returns the forward-Euler update of `v` taken at
      time `s` with step `dt`.
    combine: `combine(u, w_state, weight, s)` returns
      `(1 - weight) u + weight w_state` as a state valid at time `s`.
    on_stage: called with the stage index before each stage.

  Returns:
    The state at t + dt.
  """
  stage_state = u
  for stage, (weight, t_in, t_out) in enumerate(SSP_RK3_STAGES):
    if on_stage is not None:
      on_stage(stage)
    stage_state = combine(u, euler(stage_state, t + t_in * dt), weight,
                          t + t_out * dt)
  return stage_state


@attr.define(frozen=True)
class SchemeOptions:
  """Numerical toggles of the solver."""
  well_balanced: bool = True
  tvb: bool = True
  tvb_m: float = limiters.DEFAULT_TVB_M
  positivity: bool = True
  cfl: float = 0.2
  fixed_dt: Optional[float] = None
  fe_tol: float = fe.DEFAULT_TOL


@chex.dataclass
class SolverState:
  """Solution on both meshes at time t.

  Attributes:
    t: time.
    primal: (nx, ny, 3, nb) primal coefficients of (h, hP, hQ).
    dual: dual coefficients.
    velocity_primal: velocity recovered on the primal mesh.
    velocity_dual: velocity recovered on the dual mesh.
  """
  t: float
  primal: chex.Array
  dual: chex.Array
  velocity_primal: fe.FEVelocityField
  velocity_dual: fe.FEVelocityField

  def coeffs(self, kind: str) -> _Array:
    return self.primal if kind == _Kind.PRIMAL else self.dual

  def velocity(self, kind: str) -> fe.FEVelocityField:
    return self.velocity_primal if kind == _Kind.PRIMAL else self.velocity_dual


def _other(kind: str) -> str:
  return _Kind.DUAL if kind == _Kind.PRIMAL else _Kind.PRIMAL


class Solver:
  """Advances the coupled primal/dual solution."""

  def __init__(self,
               mesh: mesh_lib.MeshPair,
               bottom: bathymetry_lib.BottomFields,
               k: int,
               p: model.PhysParams,
               bcs: boundary.BoundaryConditions,
               options: Optional[SchemeOptions] = None):
    self.mesh = mesh
    self.bottom = bottom
    self.k = k
    self.p = p
    self.bcs = bcs
    self.options = options or SchemeOptions()
    self._padded_bottom = {
        kind: bcs.pad(bottom.on(kind), mesh.grid(kind), boundary.SCALAR)
        for kind in _KINDS}
    points = mesh_lib.positivity_point_set(k).ref_points
    self._point_table = basis_lib.get_basis(k).values(points)
    self._omega1 = mesh_lib.lobatto_rule(k).first_weight
    # Set by `initial_state`: near-dry cells are unexpected if none start dry.
    self.expect_wet = False
    if self.options.well_balanced:
      self._stage = cdg.euler_stage_wellbalanced
    else:
      self._stage = cdg.euler_stage_standard

  # -- pieces of a substep ---------------------------------------------------

  def limit(self, coeffs: _Array, kind: str, t: float) -> _Array:
    """TVB limiting of (h + b, hP, hQ), then the positivity limiter on h."""
    grid = self.mesh.grid(kind)
    bottom = self.bottom.on(kind)
    out = np.array(coeffs, copy=True)
    if self.options.tvb:
      padded_bottom = self._padded_bottom[kind]
      padded = self.bcs.pad(coeffs, grid, boundary.STATE, t, padded_bottom)
      averages = np.array(padded[..., 0], copy=True)
      averages[..., H] += padded_bottom[..., 0]
      surface = np.array(coeffs, copy=True)
      surface[..., H, :] += bottom
      limited, flagged = limiters.tvb_minmod_limit(surface, averages, grid,
                                                   self.k, self.options.tvb_m)
      limited[..., H, :] -= bottom
      out = np.where(flagged[..., None], limited, out)
    if self.options.positivity:
      out[..., H, :], _ = limiters.positivity_limit(out[..., H, :],
                                                    self._point_table)
    return out

  def recover(self, coeffs: _Array, kind: str, t: float) -> fe.FEVelocityField:
    return fe.recover_velocity(
        coeffs, self.bottom.on(kind), self.p, self.mesh.grid(kind), self.k,
        sides=self.bcs.sides, incident=self.bcs.incident, t=t,
        tol=self.options.fe_tol,
        expect_wet=self.expect_wet)

  def make_state(self, t: float, primal: _Array, dual: _Array) -> SolverState:
    """State with velocities recovered from the given coefficients."""
    return SolverState(
        t=t, primal=primal, dual=dual,
        velocity_primal=self.recover(primal, _Kind.PRIMAL, t),
        velocity_dual=self.recover(dual, _Kind.DUAL, t))

  def stage(self, state: SolverState, dt: float, theta: float) -> Dict[str,
                                                                        _Array]:
    """CDG forward-Euler update of both meshes, each from the other one."""
    out = {}
    for kind in _KINDS:
      source = _other(kind)
      target_grid = self.mesh.grid(kind)
      source_grid = self.mesh.grid(source)
      padded_bottom = self._padded_bottom[source]
      padded = self.bcs.pad(state.coeffs(source), source_grid, boundary.STATE,
                            state.t, padded_bottom)
      velocity = self.bcs.pad(state.velocity(source).local(), source_grid,
                              boundary.VELOCITY, state.t)
      inputs = cdg.StageInputs(
          coeffs=state.coeffs(kind),
          bottom=self.bottom.on(kind),
          source_coeffs=cdg.source_window(padded, target_grid),
          source_bottom=cdg.source_window(padded_bottom, target_grid),
          source_velocity=cdg.source_window(velocity, target_grid),
          dt=dt, theta=theta)
      out[kind] = self._stage(inputs, target_grid, self.k, self.p)
    return out

  def full_euler_substep(self, state: SolverState, dt: float, theta: float,
                         recover: bool = True) -> SolverState:
    """CDG stage on both meshes, limiters, then velocity recovery.

    Args:
      state: state at the substep start, velocities included.
      dt: step.
      theta: dt / tau.
      recover: recover the velocity of the result; otherwise the input
        velocities are carried over unchanged.

    Returns:
      The state at `state.t + dt`.
    """
    t = state.t + dt
    updated = self.stage(state, dt, theta)
    primal = self.limit(updated[_Kind.PRIMAL], _Kind.PRIMAL, t)
    dual = self.limit(updated[_Kind.DUAL], _Kind.DUAL, t)
    if recover:
      return self.make_state(t, primal, dual)
    return SolverState(t=t, primal=primal, dual=dual,
                       velocity_primal=state.velocity_primal,
                       velocity_dual=state.velocity_dual)

  def combine(self, u: SolverState, w: SolverState, weight: float,
              t: float) -> SolverState:
    """Convex combination of two states, velocity recovered at time t."""
    if weight == 1.:
      return self.make_state(t, w.primal, w.dual)
    return self.make_state(t, (1. - weight) * u.primal + weight * w.primal,
                           (1. - weight) * u.dual + weight * w.dual)

  # -- full step -------------------------------------------------------------

  def timestep(self, state: SolverState) -> cdg.TimeStep:
    fields = [(state.coeffs(kind), state.velocity(kind).local())
              for kind in _KINDS]
    return cdg.max_timestep(
        fields, self.mesh.dx, self.mesh.dy, self.k, self.p,
        cfl=self.options.cfl, omega1=self._omega1,
        positivity=self.options.positivity, fixed_dt=self.options.fixed_dt)

  def step(self, state: SolverState, dt_max: Optional[float] = None,
           step_index: Optional[int] = None) -> Tuple[SolverState,
                                                      cdg.TimeStep]:
    """One SSP-RK3 step; dt is clipped to `dt_max` when given.

    Numerical errors raised inside the step are re-raised tagged with
    `step_index` and the Runge-Kutta stage.
    """
    ts = self.timestep(state)
    if dt_max is not None:
      ts = ts.clipped(dt_max)
    current = [0]

    def on_stage(stage):
      current[0] = stage

    def euler(u, s):
      del s  # The substep reads its time from `u`.
      return self.full_euler_substep(u, ts.dt, ts.theta, recover=False)

    def combine(u, w, weight, s):
      return self.combine(u, w, weight, s)

    try:
      new = ssp_rk3_step(state, state.t, ts.dt, euler, combine, on_stage)
    except errors.NumericalError as e:
      if e.step is not None:
        raise
      raise type(e)(str(e), step=step_index, stage=current[0]) from e
    return new, ts

  # -- diagnostics -----------------------------------------------------------

  def mass(self, state: SolverState) -> float:
    """Mean of the primal and dual water volumes."""
    return 0.5 * sum(cdg.mesh_total(state.coeffs(kind), self.mesh.grid(kind))
                     for kind in _KINDS)

  def min_depth(self, state: SolverState) -> float:
    """Smallest cell-average depth over both meshes."""
    return min(float(state.coeffs(kind)[..., H, 0].min()) for kind in _KINDS)

  # -- initialisation --------------------------------------------------------

  def initial_state(self, eta_fn, u_fn, v_fn, b_fn,
                    t: float = 0.) -> SolverState:
    """Projects initial data, limits it and recovers the velocity.

    Args:
      eta_fn: surface elevation, jnp function of (x, y).
      u_fn: x-velocity.
      v_fn: y-velocity.
      b_fn: analytic bottom.
      t: initial time.

    Returns:
      The initial state.
    """
    basis = basis_lib.get_basis(self.k)
    points, _ = basis_lib.projection_quadrature(self.k)
    table = basis.values(points)

    def h_fn(x, y):
      return jnp.maximum(eta_fn(x, y) - b_fn(x, y), 0.)

    coeffs = {}
    for kind in _KINDS:
      grid = self.mesh.grid(kind)
      xs, ys = grid.physical(points[:, 0], points[:, 1])
      eta = model.sample(eta_fn, xs, ys)
      bottom = self.bottom.on(kind)
      b_poly = basis_lib.evaluate(bottom, table)
      h = basis_lib.project_values(eta, self.k) - bottom
      # Cells with a negative depth at a positivity point use the clipped one.
      wet = np.all(basis_lib.evaluate(h, self._point_table) >= 0., axis=-1)
      clipped = basis_lib.project_values(np.maximum(eta - b_poly, 0.), self.k)
      h = np.where(wet[..., None], h, clipped)
      hp, hq = model.momentum_from_velocity(h_fn, u_fn, v_fn, b_fn, self.p,
                                            grid, self.k)
      coeffs[kind] = self.limit(np.stack([h, hp, hq], axis=-2), kind, t)
    state = self.make_state(t, coeffs[_Kind.PRIMAL], coeffs[_Kind.DUAL])
    self.expect_wet = bool(np.all(state.velocity_primal.wet)
                           and np.all(state.velocity_dual.wet))
    return state


################################################################################
# Setup from a configuration.
################################################################################


def prepare_bottom(bathy: bathymetry_lib.BathymetryField,
                   mesh: mesh_lib.MeshPair, k: int,
                   bcs: boundary.BoundaryConditions,
                   bottom_limiter: bool = False,
                   modify: bool = False,
                   tvb_m: float = limiters.DEFAULT_TVB_M
                  ) -> bathymetry_lib.BottomFields:
  """Projection, optional TVB limiting, optional compatibility modification."""
  bottom = bathymetry_lib.project_bathymetry(bathy, mesh, k)
  fields = {kind: bottom.on(kind) for kind in _KINDS}
  if bottom_limiter:
    for kind in _KINDS:
      grid = mesh.grid(kind)
      padded = bcs.pad(fields[kind], grid, boundary.SCALAR)
      limited, flagged = limiters.tvb_minmod_limit(
          fields[kind][..., None, :], padded[..., 0][..., None], grid, k,
          tvb_m)
      fields[kind] = limited[..., 0, :]
      logging.info('Bottom limiter: %d %s cells limited', int(flagged.sum()),
                   kind)
  if modify:
    fields[_Kind.PRIMAL], fields[_Kind.DUAL] = limiters.modify_bathymetry(
        fields[_Kind.PRIMAL], fields[_Kind.DUAL], mesh, k)
  return bathymetry_lib.BottomFields(primal=fields[_Kind.PRIMAL],
                                     dual=fields[_Kind.DUAL])


def build_solver(config: config_lib.RunConfig) -> Tuple[Solver, Any]:
  """Mesh, bottom and solver for a configuration.

  Returns:
    The solver and the analytic bathymetry it was built from.
  """
  sc = config.scenario_def
  mesh = mesh_lib.build_overlapping_meshes(sc.domain, config.nx, config.ny,
                                           sc.bcs)
  p = model.PhysParams(g=config.g, alpha=config.alpha)
  bcs = boundary.BoundaryConditions(sides=mesh.bcs, k=config.k, g=config.g,
                                    incident=sc.incident_wave())
  bathy = bathymetry_lib.bathymetry_catalog(sc.bathymetry,
                                            sc.bathymetry_params)
  bottom = prepare_bottom(bathy, mesh, config.k, bcs,
                          bottom_limiter=config.bottom_limiter,
                          modify=config.positivity and config.modify_bottom,
                          tvb_m=config.tvb_m)
  options = SchemeOptions(
      well_balanced=config.well_balanced, tvb=config.tvb, tvb_m=config.tvb_m,
      positivity=config.positivity, cfl=config.cfl, fixed_dt=config.fixed_dt)
  return Solver(mesh, bottom, config.k, p, bcs, options), bathy


################################################################################
# Error norms.
################################################################################


def error_norms(state: SolverState, solver: Solver, h_exact: Callable,
                u_exact: Callable) -> Dict[str, float]:
  """L2 errors of h and u on the primal mesh against exact fields."""
  grid = solver.mesh.primal
  k = solver.k
  points, weights = basis_lib.projection_quadrature(k)
  xs, ys = grid.physical(points[:, 0], points[:, 1])
  table = basis_lib.get_basis(k).values(points)
  h = basis_lib.evaluate(state.primal[..., H, :], table)
  vel, _, _ = fe.evaluate_local(state.velocity_primal.local(), points,
                                grid.dx, grid.dy)
  out = {}
  for name, numeric, exact in (('h', h, h_exact), ('u', vel[..., 0], u_exact)):
    diff = numeric - model.sample(exact, xs, ys)
    out[f'l2_{name}'] = math.sqrt(
        float(np.sum(diff**2 * weights) * grid.area))
  return out


################################################################################
# Driver.
################################################################################


@attr.define
class SimulationOutputs:
  """Everything a run produces.

  Attributes:
    config: the configuration that was run.
    solver: the solver, for its mesh and bottom.
    state: final state.
    snapshots: (time, state) pairs at the configured snapshot times.
    gauges: gauge series.
    summary: step count, minimum depth, mass drift, wall time and errors.
  """
  config: config_lib.RunConfig
  solver: Solver
  state: SolverState
  snapshots: List[Tuple[float, SolverState]]
  gauges: List[gauges_lib.GaugeSeries]
  summary: Mapping[str, Any]


def _stops(config: config_lib.RunConfig) -> List[float]:
  stops = sorted({t for t in config.snapshot_times if t > 0.}
                 | {config.t_final})
  return [t for t in stops if t <= config.t_final]


def run_simulation(config: config_lib.RunConfig) -> SimulationOutputs:
  """Runs one configuration to its final time.

  Args:
    config: validated configuration.

  Returns:
    Final state, snapshots, gauge series and the run summary.
  """
  start = timeit.default_timer()
  sc = config.scenario_def
  solver, bathy = build_solver(config)
  logging.info('Running %s: %dx%d cells, k=%d, alpha=%g, t_final=%g',
               config.scenario, config.nx, config.ny, config.k, config.alpha,
               config.t_final)
  eta_fn, u_fn, v_fn = sc.initial_condition()
  state = solver.initial_state(eta_fn, u_fn, v_fn, bathy.fn)
  mass0 = solver.mass(state)
  min_h = solver.min_depth(state)
  gauges = gauges_lib.make_gauges(config.gauges, solver.mesh.primal, config.k)
  gauges_lib.record_gauges(gauges, state.primal, solver.bottom.primal, state.t)
  snapshots = []
  if 0. in config.snapshot_times:
    snapshots.append((0., state))

  steps = 0
  for stop in _stops(config):
    while stop - state.t > 1e-12 * max(1., abs(stop)):
      steps += 1
      state, ts = solver.step(state, dt_max=stop - state.t, step_index=steps)
      if abs(state.t - stop) <= 1e-12 * max(1., abs(stop)):
        state = state.replace(t=stop)
      min_h = min(min_h, solver.min_depth(state))
      if steps % config.gauge_every == 0 or state.t == config.t_final:
        gauges_lib.record_gauges(gauges, state.primal, solver.bottom.primal,
                                 state.t)
      if steps % config.log_every == 0:
        logging.info('step %d t=%.6f dt=%.3e theta=%.3f min h=%.3e', steps,
                     state.t, ts.dt, ts.theta, solver.min_depth(state))
    if stop in config.snapshot_times:
      snapshots.append((stop, state))

  mass = solver.mass(state)
  summary: Dict[str, Any] = dict(
      scenario=config.scenario, k=config.k, alpha=config.alpha, nx=config.nx,
      ny=config.ny, t_final=state.t, steps=steps, min_h=min_h,
      mass_initial=mass0, mass_final=mass,
      mass_drift=abs(mass - mass0) / max(abs(mass0), np.finfo(float).tiny),
      wall_time=timeit.default_timer() - start)
  if sc.has_exact:
    h_exact, u_exact = sc.exact_solution(state.t)
    summary.update(error_norms(state, solver, h_exact, u_exact))
  logging.info('Finished %s in %d steps (%.2fs): min h %.3e, mass drift %.3e',
               config.scenario, steps, summary['wall_time'], min_h,
               summary['mass_drift'])
  return SimulationOutputs(config=config, solver=solver, state=state,
                           snapshots=snapshots, gauges=gauges, summary=summary)
