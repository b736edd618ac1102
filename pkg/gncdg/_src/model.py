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

"""Physics of the dispersion-enhanced Green-Naghdi system.

The system is written as a balance law for U = (h, hP, hQ),

    U_t + F(U, u, v; b)_x + G(U, u, v; b)_y = S(U, u, v; b),

where the velocities (u, v) are recovered from (h, hP, hQ) by solving the
elliptic relations implemented in `momentum_from_velocity` (and, discretely,
in `fe.py`). The parameter `alpha` scales the dispersive terms; `alpha = 1`
is the standard model.

Analytic fields (exact solutions, incident waves, bathymetries) are scalar
`jax.numpy` functions of `(x, y)` so that their derivatives come from
`jax.grad`.
"""

from typing import Callable, Tuple

import attr
import chex
from gncdg._src import basis as basis_lib
from gncdg._src import errors
from gncdg._src import mesh as mesh_lib
import jax
import jax.numpy as jnp
import numpy as np

# The solver is double precision throughout; still-water tests rely on it.
jax.config.update('jax_enable_x64', True)

_Array = np.ndarray
ScalarFn = Callable[[float, float], float]

ALPHA_STANDARD = 1.0
ALPHA_ENHANCED = 1.159


def _positive(instance, attribute, value):
  del instance
  if not value > 0:
    raise errors.ConfigError(f'{attribute.name} must be positive, got {value}.')


@attr.define(frozen=True)
class PhysParams:
  g: float = attr.field(default=9.81, converter=float, validator=_positive)
  alpha: float = attr.field(default=ALPHA_STANDARD, converter=float,
                            validator=_positive)


@chex.dataclass
class LocalState:
  """Pointwise values of every quantity appearing in F, G and S."""
  h: chex.Array
  hP: chex.Array  # pylint: disable=invalid-name
  hQ: chex.Array  # pylint: disable=invalid-name
  u: chex.Array
  v: chex.Array
  u_x: chex.Array
  u_y: chex.Array
  v_x: chex.Array
  v_y: chex.Array
  h_x: chex.Array
  h_y: chex.Array
  eta_x: chex.Array
  eta_y: chex.Array
  eta_xx: chex.Array
  eta_yy: chex.Array


@chex.dataclass
class BottomDerivatives:
  b_x: chex.Array
  b_y: chex.Array
  b_xx: chex.Array
  b_xy: chex.Array
  b_yy: chex.Array


def _check_finite(name, *arrays):
  for a in arrays:
    if not np.all(np.isfinite(a)):
      raise errors.EvaluationError(f'Non-finite input to {name}.')


def _pressure_like(s: LocalState, b: BottomDerivatives, p: PhysParams):
  """Terms shared by the normal-momentum entries of F and G."""
  alpha, g = p.alpha, p.g
  h = s.h
  h2 = h * h
  h3 = h2 * h
  lap_eta = s.eta_xx + s.eta_yy
  return (s.hP * s.u + s.hQ * s.v + 0.5 * g * h2
          - alpha * h * s.u * s.v * b.b_x * b.b_y
          + 0.5 * (1. - alpha) * h2 * (s.u**2 * b.b_xx + s.v**2 * b.b_yy)
          - ((4. * alpha - 2.) / 3. * h3 * s.u_x**2
             + (6. * alpha - 2.) / 3. * h3 * s.u_x * s.v_y
             + (4. * alpha - 2.) / 3. * h3 * s.v_y**2)
          - 2. / 3. * (alpha - 1.) * h3 * s.u_y * s.v_x
          + (1. - alpha) * h2 * s.u * s.v * b.b_xy
          - (alpha - 1.) / 3. * g * h3 * lap_eta
          + 0.5 * (alpha - 1.) * g * h2 * (b.b_x * s.eta_x + b.b_y * s.eta_y))


def flux_F(s: LocalState, b: BottomDerivatives, p: PhysParams,  # pylint: disable=invalid-name
           check: bool = True) -> _Array:
  """x-direction flux; returns an array with a leading axis of size 3."""
  if check:
    _check_finite('flux_F', *s.values(), *b.values())
  alpha = p.alpha
  h = s.h
  div = s.u_x + s.v_y
  f1 = h * s.u
  f2 = (_pressure_like(s, b, p)
        - h * s.v**2 * (1. + alpha * b.b_y**2)
        + alpha * h**2 * s.u * div * b.b_x
        + 1.5 * alpha * h**2 * s.v * div * b.b_y)
  f3 = (h * s.u * s.v * (1. + alpha * b.b_y**2)
        + alpha * h * s.u**2 * b.b_x * b.b_y
        - 0.5 * alpha * h**2 * s.u * div * b.b_y)
  return np.stack(np.broadcast_arrays(f1, f2, f3))


def flux_G(s: LocalState, b: BottomDerivatives, p: PhysParams,  # pylint: disable=invalid-name
           check: bool = True) -> _Array:
  """y-direction flux."""
  if check:
    _check_finite('flux_G', *s.values(), *b.values())
  alpha = p.alpha
  h = s.h
  div = s.u_x + s.v_y
  g1 = h * s.v
  g2 = (h * s.u * s.v * (1. + alpha * b.b_x**2)
        + alpha * h * s.v**2 * b.b_x * b.b_y
        - 0.5 * alpha * h**2 * s.v * div * b.b_x)
  g3 = (_pressure_like(s, b, p)
        - h * s.u**2 * (1. + alpha * b.b_x**2)
        + 1.5 * alpha * h**2 * s.u * div * b.b_x
        + alpha * h**2 * s.v * div * b.b_y)
  return np.stack(np.broadcast_arrays(g1, g2, g3))


def source_S(s: LocalState, b: BottomDerivatives, p: PhysParams,  # pylint: disable=invalid-name
             check: bool = True, hydrostatic: bool = True) -> _Array:
  """Source term.

  Args:
    s: local state.
    b: bottom derivatives.
    p: physical parameters.
    check: whether to reject non-finite inputs.
    hydrostatic: include the `-g h grad(b)` part. The well-balanced scheme
      drops it and supplies its own decomposition of that term.

  Returns:
    Array with a leading axis of size 3; the first entry is zero.
  """
  if check:
    _check_finite('source_S', *s.values(), *b.values())
  alpha, g = p.alpha, p.g
  h = s.h
  h2 = h * h
  div = s.u_x + s.v_y
  grad_sq = s.u_x**2 + s.u_x * s.v_y + s.u_y * s.v_x + s.v_y**2
  lap_eta = s.eta_xx + s.eta_yy
  uv = s.u * s.v
  s2 = (-0.5 * alpha * h2 * s.u * div * b.b_xx
        - 0.5 * alpha * h2 * s.v * div * b.b_xy
        + (2. * alpha - 1.) * h * s.u**2 * b.b_x * b.b_xx
        + h * uv * ((3. * alpha - 2.) * b.b_x * b.b_xy + alpha * b.b_xx * b.b_y)
        + (alpha - 1.) * h2 * grad_sq * b.b_x
        + alpha * h * s.v**2 * b.b_xy * b.b_y
        + (alpha - 1.) * h * s.v**2 * b.b_x * b.b_yy
        + 0.5 * (alpha - 1.) * g * h2 * lap_eta * b.b_x
        - (alpha - 1.) * g * h * (b.b_x**2 * s.eta_x + b.b_x * b.b_y * s.eta_y))
  s3 = (-0.5 * alpha * h2 * s.u * div * b.b_xy
        - 0.5 * alpha * h2 * s.v * div * b.b_yy
        + (2. * alpha - 1.) * h * s.v**2 * b.b_y * b.b_yy
        + h * uv * ((3. * alpha - 2.) * b.b_xy * b.b_y + alpha * b.b_x * b.b_yy)
        + (alpha - 1.) * h2 * grad_sq * b.b_y
        + alpha * h * s.u**2 * b.b_x * b.b_xy
        + (alpha - 1.) * h * s.u**2 * b.b_xx * b.b_y
        + 0.5 * (alpha - 1.) * g * h2 * lap_eta * b.b_y
        - (alpha - 1.) * g * h * (b.b_x * b.b_y * s.eta_x + b.b_y**2 * s.eta_y))
  if hydrostatic:
    s2 = s2 - g * h * b.b_x
    s3 = s3 - g * h * b.b_y
  return np.stack(np.broadcast_arrays(0. * h, s2, s3))


################################################################################
# Analytic fields.
################################################################################


def sample(fn: ScalarFn, xs: _Array, ys: _Array) -> _Array:
  """Evaluates a scalar jnp function on arrays of points."""
  xs, ys = np.broadcast_arrays(np.asarray(xs, float), np.asarray(ys, float))
  flat = jax.vmap(fn)(jnp.asarray(xs.ravel()), jnp.asarray(ys.ravel()))
  return np.asarray(flat, dtype=float).reshape(xs.shape)


def zero_field(x, y):
  return 0. * x * y


def _d(fn: ScalarFn, axis: int) -> ScalarFn:
  return jax.grad(fn, argnums=axis)


def momentum_pointwise(h_fn: ScalarFn, u_fn: ScalarFn, v_fn: ScalarFn,
                       b_fn: ScalarFn,
                       p: PhysParams) -> Tuple[ScalarFn, ScalarFn]:
  """Pointwise (hP, hQ) of smooth fields, derivatives by autodiff."""
  alpha = p.alpha

  def flux_x_of_p(x, y):
    h = h_fn(x, y)
    return (alpha / 3. * h**3 * (_d(u_fn, 0)(x, y) + _d(v_fn, 1)(x, y))
            - alpha / 2. * h**2 * v_fn(x, y) * _d(b_fn, 1)(x, y))

  def flux_y_of_p(x, y):
    return alpha / 2. * h_fn(x, y)**2 * v_fn(x, y) * _d(b_fn, 0)(x, y)

  def flux_y_of_q(x, y):
    h = h_fn(x, y)
    return (alpha / 3. * h**3 * (_d(u_fn, 0)(x, y) + _d(v_fn, 1)(x, y))
            - alpha / 2. * h**2 * u_fn(x, y) * _d(b_fn, 0)(x, y))

  def flux_x_of_q(x, y):
    return alpha / 2. * h_fn(x, y)**2 * u_fn(x, y) * _d(b_fn, 1)(x, y)

  hess_b = jax.hessian(b_fn, argnums=(0, 1))

  def coefficients(x, y):
    h = h_fn(x, y)
    h_x, h_y = _d(h_fn, 0)(x, y), _d(h_fn, 1)(x, y)
    b_x, b_y = _d(b_fn, 0)(x, y), _d(b_fn, 1)(x, y)
    (b_xx, b_xy), (_, b_yy) = hess_b(x, y)
    uu = h * (1. + alpha * h_x * b_x + alpha / 2. * h * b_xx + alpha * b_x**2)
    uv = h * (alpha * h_y * b_x + alpha / 2. * h * b_xy + alpha * b_x * b_y)
    vu = h * (alpha * h_x * b_y + alpha / 2. * h * b_xy + alpha * b_x * b_y)
    vv = h * (1. + alpha * h_y * b_y + alpha / 2. * h * b_yy + alpha * b_y**2)
    return uu, uv, vu, vv

  def hp(x, y):
    uu, uv, _, _ = coefficients(x, y)
    return (-_d(flux_x_of_p, 0)(x, y) - _d(flux_y_of_p, 1)(x, y)
            + uu * u_fn(x, y) + uv * v_fn(x, y))

  def hq(x, y):
    _, _, vu, vv = coefficients(x, y)
    return (-_d(flux_y_of_q, 1)(x, y) - _d(flux_x_of_q, 0)(x, y)
            + vu * u_fn(x, y) + vv * v_fn(x, y))

  return hp, hq


def momentum_from_velocity(h_fn: ScalarFn, u_fn: ScalarFn, v_fn: ScalarFn,
                           b_fn: ScalarFn, p: PhysParams,
                           grid: mesh_lib.CellGrid,
                           k: int) -> Tuple[_Array, _Array]:
  """Projects the auxiliary momenta hP, hQ of smooth fields onto P^k.

  Args:
    h_fn: depth as a scalar jnp function of (x, y).
    u_fn: x-velocity.
    v_fn: y-velocity.
    b_fn: bottom.
    p: physical parameters.
    grid: target mesh.
    k: polynomial degree.

  Returns:
    Coefficients (nx, ny, nb) of hP and hQ.
  """
  hp, hq = momentum_pointwise(h_fn, u_fn, v_fn, b_fn, p)
  points, _ = basis_lib.projection_quadrature(k)
  xs, ys = grid.physical(points[:, 0], points[:, 1])
  hp_vals = sample(jax.jit(hp), xs, ys)
  hq_vals = sample(jax.jit(hq), xs, ys)
  for name, vals in (('hP', hp_vals), ('hQ', hq_vals)):
    if not np.all(np.isfinite(vals)):
      raise errors.ProjectionError(f'Non-finite {name} during initialisation.')
  return (basis_lib.project_values(hp_vals, k),
          basis_lib.project_values(hq_vals, k))


################################################################################
# Linear dispersion.
################################################################################


def _omega(k_mag, h0, g, alpha):
  kh2 = (h0 * k_mag)**2
  return k_mag * jnp.sqrt(g * h0 * (1. + (alpha - 1.) / 3. * kh2)
                          / (1. + alpha / 3. * kh2))


def _check_dispersion_args(k_mag, h0):
  if np.any(np.asarray(k_mag) < 0):
    raise ValueError('Wavenumber magnitude must be non-negative.')
  if not h0 > 0:
    raise ValueError(f'Still-water depth must be positive, got {h0}.')


def dispersion_omega(k_mag, h0: float, p: PhysParams):
  """Positive frequency branch of the linearised model."""
  _check_dispersion_args(k_mag, h0)
  return np.asarray(_omega(jnp.asarray(k_mag, dtype=jnp.float64), h0, p.g,
                           p.alpha))


def airy_omega(k_mag, h0: float, g: float):
  """Linear water-wave frequency sqrt(g k tanh(h0 k))."""
  _check_dispersion_args(k_mag, h0)
  k_mag = np.asarray(k_mag, dtype=float)
  return np.sqrt(g * k_mag * np.tanh(h0 * k_mag))


def group_velocity(k_mag, h0: float, p: PhysParams):
  """d omega / d|k| of the model, by automatic differentiation."""
  _check_dispersion_args(k_mag, h0)
  dw = jax.vmap(jax.grad(lambda k: _omega(k, h0, p.g, p.alpha)))
  k_arr = jnp.atleast_1d(jnp.asarray(k_mag, dtype=jnp.float64))
  return np.asarray(dw(k_arr)).reshape(np.shape(k_mag))


################################################################################
# Exact and incident waves.
################################################################################


def solitary_speed(h2: float, g: float) -> float:
  return float(np.sqrt(g * h2))


def solitary_wave(x, t, h1: float, h2: float, g: float, x0: float = 0.):
  """Exact solitary wave of the standard model; returns (h, u, v)."""
  if not h2 > h1 > 0:
    raise ValueError(f'Solitary wave needs h2 > h1 > 0, got {h1}, {h2}.')
  speed = jnp.sqrt(g * h2)
  kappa = jnp.sqrt(3. * (h2 - h1) / (h2 * h1**2))
  h = h1 + (h2 - h1) / jnp.cosh(0.5 * kappa * (x - x0 - speed * t))**2
  u = speed * (1. - h1 / h)
  return h, u, 0. * u


def stokes_incident_eta(x, t, T0: float, a0: float, lam: float):  # pylint: disable=invalid-name
  """Third-order Stokes wave elevation travelling in +x."""
  if not (T0 > 0 and a0 > 0 and lam > 0):
    raise ValueError(f'Stokes wave needs positive (T0, a0, lambda), got '
                     f'{(T0, a0, lam)}.')
  phase = 2. * jnp.pi * (x / lam - t / T0)
  return (a0 * jnp.cos(phase)
          + jnp.pi * a0**2 / lam * jnp.cos(2. * phase)
          - jnp.pi**2 * a0**3 / (2. * lam**2)
          * (jnp.cos(phase) - jnp.cos(3. * phase)))
