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

"""Result files: gauge and table CSVs, VTK snapshots, JSON run summary.

Floats are written with `repr`, the shortest string that reads back to the
same double.
"""

import contextlib
import csv
import json
import os
from typing import Any, Iterator, List, Mapping, Sequence, Tuple

from absl import logging
from gncdg._src import basis as basis_lib
from gncdg._src import config as config_lib
from gncdg._src import errors
from gncdg._src import fe
from gncdg._src import gauges as gauges_lib
import numpy as np

_Array = np.ndarray


@contextlib.contextmanager
def _open(path: str, mode: str = 'w') -> Iterator[Any]:
  try:
    with open(path, mode, newline='') as f:
      yield f
  except OSError as e:
    raise errors.OutputError(e.strerror or str(e), path) from e


def _cell(value) -> str:
  if isinstance(value, (float, np.floating)):
    return repr(float(value))
  return str(value)


def write_table_csv(header: Sequence[str], rows: Sequence[Sequence[Any]],
                    path: str) -> str:
  """Writes a header row and data rows."""
  with _open(path) as f:
    writer = csv.writer(f)
    writer.writerow(header)
    for row in rows:
      writer.writerow([_cell(v) for v in row])
  return path


def read_table_csv(path: str) -> Tuple[List[str], _Array]:
  """Header and float data of a CSV written by `write_table_csv`."""
  with _open(path, 'r') as f:
    reader = csv.reader(f)
    header = next(reader)
    rows = [[float(v) for v in row] for row in reader if row]
  return header, np.asarray(rows, dtype=float).reshape(-1, len(header))


def gauge_header(gauges: Sequence[gauges_lib.GaugeSeries]) -> List[str]:
  return ['t', 't_shifted'] + [f'eta({g.x!r} {g.y!r})' for g in gauges]


def write_gauge_csv(gauges: Sequence[gauges_lib.GaugeSeries], path: str,
                    time_offset: float = 0.) -> str:
  """One row per sample time: t, t + offset, then eta at every gauge."""
  times = gauges[0].times
  rows = []
  for n, t in enumerate(times):
    rows.append([t, t + time_offset] + [g.eta[n] for g in gauges])
  return write_table_csv(gauge_header(gauges), rows, path)


def compare_gauge_series(path: str, reference: str) -> float:
  """Largest eta difference between two gauge files with the same layout.

  Args:
    path: new gauge file.
    reference: frozen gauge file.

  Returns:
    Max absolute difference over all times and gauges.

  Raises:
    ValueError: if the headers or sample times differ.
  """
  header, data = read_table_csv(path)
  ref_header, ref = read_table_csv(reference)
  if header != ref_header or data.shape != ref.shape:
    raise ValueError(f'Gauge files {path} and {reference} differ in layout.')
  if not np.array_equal(data[:, 0], ref[:, 0]):
    raise ValueError(f'Gauge files {path} and {reference} differ in times.')
  if data.shape[1] <= 2:
    return 0.
  return float(np.max(np.abs(data[:, 2:] - ref[:, 2:]), initial=0.))


################################################################################
# VTK.
################################################################################


def snapshot_fields(state, solver) -> Mapping[str, _Array]:
  """h, eta, u, v and b at the primal cell centres, each (nx, ny)."""
  k = solver.k
  centre = np.zeros((1, 2))
  table = basis_lib.get_basis(k).values(centre)
  grid = solver.mesh.primal
  h = basis_lib.evaluate(state.primal[..., basis_lib.H, :], table)[..., 0]
  b = basis_lib.evaluate(solver.bottom.primal, table)[..., 0]
  vel, _, _ = fe.evaluate_local(state.velocity_primal.local(), centre,
                                grid.dx, grid.dy)
  return dict(h=h, eta=h + b, u=vel[..., 0, 0], v=vel[..., 0, 1], b=b)


def write_vtk(path: str, xs: _Array, ys: _Array,
              fields: Mapping[str, _Array], title: str = 'gncdg') -> str:
  """Legacy ASCII STRUCTURED_GRID file with point data.

  Args:
    path: output path.
    xs: (nx, ny) point x coordinates.
    ys: (nx, ny) point y coordinates.
    fields: name -> (nx, ny) scalar arrays.
    title: header line.

  Returns:
    The path.
  """
  nx, ny = xs.shape
  with _open(path) as f:
    f.write(f'# vtk DataFile Version 2.0\n{title}\nASCII\n')
    f.write('DATASET STRUCTURED_GRID\n')
    f.write(f'DIMENSIONS {nx} {ny} 1\n')
    f.write(f'POINTS {nx * ny} double\n')
    for j in range(ny):
      for i in range(nx):
        f.write(f'{xs[i, j]!r} {ys[i, j]!r} 0.0\n')
    f.write(f'POINT_DATA {nx * ny}\n')
    for name, values in fields.items():
      f.write(f'SCALARS {name} double 1\nLOOKUP_TABLE default\n')
      for j in range(ny):
        for i in range(nx):
          f.write(f'{float(values[i, j])!r}\n')
  return path


def write_snapshot(state, solver, path: str) -> str:
  xs, ys = solver.mesh.primal.centres()
  return write_vtk(path, xs, ys, snapshot_fields(state, solver),
                   title=f'gncdg t={state.t!r}')


################################################################################
# Summary and whole runs.
################################################################################


def _plain(value):
  if isinstance(value, (np.floating, np.integer)):
    return value.item()
  return value


def summary_json(summary: Mapping[str, Any]) -> str:
  return json.dumps({k: _plain(v) for k, v in summary.items()}, indent=2,
                    sort_keys=True)


def write_summary(summary: Mapping[str, Any], path: str) -> str:
  with _open(path) as f:
    f.write(summary_json(summary) + '\n')
  return path


def write_outputs(outputs, directory: str) -> List[str]:
  """Writes every artifact of a run into `directory`.

  Files: `config.ini`, `summary.json`, `gauges.csv` (only with gauges) and
  `snapshot_<t>.vtk` per snapshot time.

  Args:
    outputs: a `SimulationOutputs`.
    directory: target directory, created if missing.

  Returns:
    Paths written.
  """
  try:
    os.makedirs(directory, exist_ok=True)
  except OSError as e:
    raise errors.OutputError(e.strerror or str(e), directory) from e
  written = []
  path = os.path.join(directory, 'config.ini')
  with _open(path) as f:
    f.write(config_lib.config_to_ini(outputs.config))
  written.append(path)
  written.append(write_summary(outputs.summary,
                               os.path.join(directory, 'summary.json')))
  if outputs.gauges:
    written.append(write_gauge_csv(outputs.gauges,
                                   os.path.join(directory, 'gauges.csv'),
                                   outputs.config.time_offset))
  for t, state in outputs.snapshots:
    written.append(write_snapshot(
        state, outputs.solver, os.path.join(directory, f'snapshot_{t:g}.vtk')))
  for path in written:
    logging.info('Wrote %s', path)
  return written
