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

"""Command-line driver.

Usage:

  run.py run CONFIG [--out DIR] [--alpha X] [--k K] [--nx N --ny M]
      [--t_final T]
  run.py convergence CONFIG [--k K] [--spacings 1,0.5,0.25,0.125] [--out DIR]
  run.py dispersion [--alphas 1,1.159] [--h0 H] [--g G] [--out DIR]
  run.py scenarios

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 output error.
"""

import csv
import os
import sys
from typing import Any, Dict, Sequence

from absl import app
from absl import flags
from absl import logging
import gncdg

flags.DEFINE_string('out', None, 'Output directory; overrides [output].')
flags.DEFINE_float('alpha', None, 'Dispersion parameter; overrides [physics].')
flags.DEFINE_integer('k', None, 'Polynomial degree (1 or 2).')
flags.DEFINE_integer('nx', None, 'Primal cells along x.')
flags.DEFINE_integer('ny', None, 'Primal cells along y.')
flags.DEFINE_float('t_final', None, 'Final time.')
flags.DEFINE_list('spacings', ['1', '0.5', '0.25', '0.125'],
                  'Cell sizes of the convergence study.')
flags.DEFINE_float('dt_factor', 0.1, 'dt / dx of the convergence study.')
flags.DEFINE_list('alphas', ['1', '1.159'],
                  'Dispersion parameters of the dispersion table.')
flags.DEFINE_float('h0', 1., 'Still-water depth of the dispersion table.')
flags.DEFINE_float('g', 1., 'Gravity of the dispersion table.')
flags.DEFINE_float('k_max', 4., 'Largest wavenumber of the dispersion table.')

FLAGS = flags.FLAGS

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_OUTPUT = 4

_COMMANDS = ('run', 'convergence', 'dispersion', 'scenarios')


def _overrides() -> Dict[str, Any]:
  out = {}
  for flag, field in (('alpha', 'alpha'), ('k', 'k'), ('nx', 'nx'),
                      ('ny', 'ny'), ('t_final', 't_final'),
                      ('out', 'output_dir')):
    if FLAGS[flag].value is not None:
      out[field] = FLAGS[flag].value
  return out


def _config_path(argv: Sequence[str]) -> str:
  if len(argv) < 3:
    raise gncdg.ConfigError(f'`{argv[1]}` needs a configuration file.')
  return argv[2]


def _emit_table(table: gncdg.Table, name: str) -> None:
  if FLAGS.out:
    path = os.path.join(FLAGS.out, name)
    try:
      os.makedirs(FLAGS.out, exist_ok=True)
    except OSError as e:
      raise gncdg.OutputError(e.strerror or str(e), FLAGS.out) from e
    gncdg.write_table_csv(table.header, table.rows, path)
    logging.info('Wrote %s', path)
  else:
    writer = csv.writer(sys.stdout)
    writer.writerow(table.header)
    for row in table.rows:
      writer.writerow([repr(float(v)) for v in row])


def _run(argv: Sequence[str]) -> None:
  config = gncdg.load_config(_config_path(argv), _overrides())
  outputs = gncdg.run_simulation(config)
  if config.output_dir:
    gncdg.write_outputs(outputs, config.output_dir)
  print(gncdg.summary_json(outputs.summary))


def _convergence(argv: Sequence[str]) -> None:
  overrides = _overrides()
  overrides.pop('output_dir', None)
  config = gncdg.load_config(_config_path(argv), overrides)
  table = gncdg.convergence_report(
      config, [float(s) for s in FLAGS.spacings], FLAGS.dt_factor)
  _emit_table(table, f'convergence_k{config.k}.csv')


def _dispersion(argv: Sequence[str]) -> None:
  del argv
  table = gncdg.dispersion_report([float(a) for a in FLAGS.alphas],
                                  h0=FLAGS.h0, g=FLAGS.g, k_max=FLAGS.k_max)
  _emit_table(table, 'dispersion.csv')


def main(argv):
  if len(argv) < 2 or argv[1] not in _COMMANDS:
    logging.error('Expected one of %s as the command.', ', '.join(_COMMANDS))
    return EXIT_CONFIG
  command = argv[1]
  try:
    if command == 'scenarios':
      print(gncdg.describe_scenarios())
    elif command == 'run':
      _run(argv)
    elif command == 'convergence':
      _convergence(argv)
    else:
      _dispersion(argv)
  except gncdg.ConfigError as e:
    logging.error('Configuration error: %s', e)
    return EXIT_CONFIG
  except (gncdg.NumericalError, gncdg.EvaluationError,
          gncdg.ProjectionError) as e:
    logging.error('Numerical failure: %s', e)
    return EXIT_NUMERICAL
  except gncdg.OutputError as e:
    logging.error('Output error: %s', e)
    return EXIT_OUTPUT
  return 0


if __name__ == '__main__':
  app.run(main)
