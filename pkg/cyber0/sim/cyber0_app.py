#!/usr/bin/env python

"""CyBeR-0 simulator.

Usage:
  cyber0.py run <config file or profile> --out <dir>
  cyber0.py verify <lemmas|theorems|all>
  cyber0.py sweep <config file or profile> --param <name[+name...]> \\
      --values <v1,v2,...> --out <dir>

Exit codes: 0 success, 1 failed verification, 2 usage or config error,
3 divergence, 130 keyboard interrupt.
"""

import csv
import os
import subprocess
import time

import gflags

from . import app
from . import common_defs
from . import config as config_lib
from . import errors
from . import federation
from . import manager
from . import verify

FLAGS = gflags.FLAGS

gflags.DEFINE_string('out', '',
    'Output directory of run and sweep.')

gflags.DEFINE_string('param', '',
    'Config field(s) swept by sweep; join several with "+".')

gflags.DEFINE_string('values', '',
    'Comma-separated values for --param.')

gflags.DEFINE_integer('threads', 1,
    'Maximum number of clients evaluated in parallel.',
    lower_bound=1)

gflags.DEFINE_boolean('log_wall_time', False,
    'If true, log.csv records elapsed wall milliseconds; otherwise the '
    'wall_ms column is 0 and the file is reproducible byte for byte.')

gflags.DEFINE_integer('verify_seed', 0,
    'Root seed of the verification checks.',
    lower_bound=0)


def _EnvThreads():
  try:
    return max(1, int(os.environ.get(common_defs.ENV_THREADS, '1')))
  except ValueError:
    return 1

FLAGS.SetDefault('threads', _EnvThreads())


def VersionString():
  """git describe of the source tree, or the release version."""
  source_dir = os.path.dirname(os.path.abspath(__file__))
  try:
    out = subprocess.check_output(['git', 'describe', '--always', '--dirty',
        '--tags'], cwd=source_dir, stderr=subprocess.DEVNULL)
    return out.decode('utf-8').strip()
  except (OSError, subprocess.CalledProcessError):
    return common_defs.VERSION


class RunManifest(object):
  """Describes a finished run; the body re-parses as its config."""

  def __init__(self, config, version, wall_seconds, outputs):
    self.config = config
    self.version = version
    self.wall_seconds = wall_seconds
    self.outputs = list(outputs)

  def Render(self):
    lines = [
      '# cyber0 run manifest',
      '# version: %s' % self.version,
      '# wall_seconds: %.3f' % self.wall_seconds,
    ]
    for path in self.outputs:
      lines.append('# output: %s' % path)
    return '\n'.join(lines) + '\n' + self.config.Dump()

  def Write(self, path):
    with open(path, 'w', encoding='utf-8') as f:
      f.write(self.Render())

  @classmethod
  def Read(cls, path):
    """Returns the config echoed in a manifest file."""
    return config_lib.ParseFile(path)


class Cyber0App(app.App):
  """CyBeR-0 simulator.

  Usage:
    cyber0.py run <config|profile> --out <dir>
    cyber0.py verify <lemmas|theorems|all>
    cyber0.py sweep <config|profile> --param <name> --values <v1,v2> --out <dir>
  """

  def __init__(self, name='cyber0', args=None, out='', param='', values='',
      threads=1, log_wall_time=False, debug_events=False, verify_seed=0):
    super(Cyber0App, self).__init__(name, args)
    self._out = out
    self._param = param
    self._values = values
    self._threads = threads
    self._log_wall_time = log_wall_time
    self._debug_events = debug_events
    self._verify_seed = verify_seed

  @classmethod
  def FromFlags(cls, args):
    return cls(args=args, out=FLAGS.out, param=FLAGS.param,
        values=FLAGS.values, threads=FLAGS.threads,
        log_wall_time=FLAGS.log_wall_time, debug_events=FLAGS.debug_events,
        verify_seed=FLAGS.verify_seed)

  def _MainLoop(self):
    if not self._args:
      raise app.UsageError('Missing command')
    command, rest = self._args[0], self._args[1:]
    if command == 'run':
      if len(rest) != 1:
        raise app.UsageError('run takes exactly one config')
      return self.CmdRun(rest[0], self._out)
    elif command == 'verify':
      if len(rest) != 1:
        raise app.UsageError('verify takes exactly one suite')
      return self.CmdVerify(rest[0], self._verify_seed)
    elif command == 'sweep':
      if len(rest) != 1:
        raise app.UsageError('sweep takes exactly one config')
      return self.CmdSweep(rest[0], self._param, self._values, self._out)
    raise app.UsageError('Unknown command: %s' % command)

  def _LoadConfig(self, name_or_path):
    try:
      return config_lib.Load(name_or_path)
    except errors.ConfigError as e:
      self._logger.error('%s: %s' % (name_or_path, e))
      return None

  def _RunOne(self, config, out_dir, run_name):
    """Runs one experiment into out_dir.  Returns (exit code, final log)."""
    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, common_defs.LOG_CSV_NAME)
    manifest_path = os.path.join(out_dir, common_defs.MANIFEST_NAME)

    env = federation.SimEnv(debug_events=self._debug_events)
    env.AddCsvLog(log_path, self._log_wall_time)
    start = time.time()
    code = common_defs.EXIT_OK
    try:
      federation.RunExperiment(config, env, self._threads, run_name)
    except errors.DivergenceError as e:
      self._logger.error('Run diverged: %s' % e)
      code = common_defs.EXIT_DIVERGED
    except errors.ConfigError as e:
      self._logger.error('Bad config: %s' % e)
      return common_defs.EXIT_USAGE, None
    except (IOError, errors.DataFormatError) as e:
      self._logger.error('Cannot load data: %s' % e)
      return common_defs.EXIT_USAGE, None
    finally:
      env.DetachCsvLogs()

    RunManifest(config, VersionString(), time.time() - start,
        [log_path, manifest_path]).Write(manifest_path)
    self._logger.info('Wrote %s and %s' % (log_path, manifest_path))
    return code, env.GetHistoryManager().GetFinal()

  def CmdRun(self, config_path, out_dir):
    if not out_dir:
      raise app.UsageError('run needs --out')
    config = self._LoadConfig(config_path)
    if config is None:
      return common_defs.EXIT_USAGE
    code, _ = self._RunOne(config, out_dir, os.path.basename(config_path))
    return code

  def CmdVerify(self, suite, seed=0):
    if suite not in verify.Suite.NAMES:
      self._logger.error('Unknown suite %r; expected one of %s' % (suite,
          ', '.join(verify.Suite.NAMES)))
      return common_defs.EXIT_USAGE
    reports = verify.RunSuite(suite, seed, self._threads)
    print(verify.FormatTable(reports))
    if all(r.passed for r in reports):
      return common_defs.EXIT_OK
    return common_defs.EXIT_CHECK_FAILED

  def CmdSweep(self, config_path, param, values, out_dir):
    if not out_dir:
      raise app.UsageError('sweep needs --out')
    names = [p.strip() for p in param.split('+') if p.strip()]
    value_list = [v.strip() for v in values.split(',') if v.strip()]
    if not names:
      self._logger.error('sweep needs --param')
      return common_defs.EXIT_USAGE
    if not value_list:
      self._logger.error('sweep needs a non-empty --values list')
      return common_defs.EXIT_USAGE
    base = self._LoadConfig(config_path)
    if base is None:
      return common_defs.EXIT_USAGE

    configs = []
    for value in value_list:
      swept = base.Copy()
      try:
        for name in names:
          swept.SetFromText(name, value)
        swept.Validate()
      except errors.ConfigError as e:
        self._logger.error('%s=%s: %s' % (param, value, e))
        return common_defs.EXIT_USAGE
      configs.append((value, swept))

    os.makedirs(out_dir, exist_ok=True)
    summary_path = os.path.join(out_dir, common_defs.SUMMARY_CSV_NAME)
    worst = common_defs.EXIT_OK
    with open(summary_path, 'w', encoding='utf-8', newline='') as f:
      writer = csv.writer(f, lineterminator='\n')
      writer.writerow(common_defs.SUMMARY_COLUMNS)
      for value, swept in configs:
        run_name = '%s=%s' % (param, value)
        code, final = self._RunOne(swept, os.path.join(out_dir, run_name),
            run_name)
        worst = max(worst, code)
        if final is None:
          continue
        row = manager.FormatRow(final)
        writer.writerow([param, value] + row[:5])
    self._logger.info('Wrote %s' % summary_path)
    return worst
