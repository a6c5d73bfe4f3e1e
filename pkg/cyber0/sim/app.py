"""Command-line application base: flag parsing, logging and exit codes."""

import logging
import sys

import gflags

from . import common_defs

FLAGS = gflags.FLAGS

gflags.DEFINE_boolean('verbose', False,
    'If true, logs at DEBUG level.')

gflags.DEFINE_boolean('debug_events', False,
    'If true, logs debugging information about internal events.')

LOG_FORMAT = '%(asctime)s %(levelname)-8s (%(name)s) %(message)s'


class UsageError(Exception):
  """Bad command line; the application exits with EXIT_USAGE."""


def SetupLogging(verbose=False):
  root = logging.getLogger()
  for handler in list(root.handlers):
    root.removeHandler(handler)
  handler = logging.StreamHandler(sys.stderr)
  handler.setFormatter(logging.Formatter(LOG_FORMAT))
  root.addHandler(handler)
  root.setLevel(logging.DEBUG if verbose else logging.INFO)


class App(object):
  """A run-to-completion application.

  Subclasses implement _MainLoop, which returns the process exit code.
  """

  def __init__(self, name='main', args=None):
    self._name = name
    self._args = list(args or [])
    self._logger = logging.getLogger(name)
    self._do_quit = False

  @classmethod
  def BuildAndRun(cls, argv=None):
    """Parses flags from `argv`, builds the app and exits with its code."""
    argv = list(sys.argv if argv is None else argv)
    try:
      args = FLAGS(argv)
    except gflags.FlagsError as e:
      sys.stderr.write('%s\n\nUsage: %s ARGS\n%s\n' % (e, argv[0], FLAGS))
      sys.exit(common_defs.EXIT_USAGE)
    SetupLogging(FLAGS.verbose)
    sys.exit(cls.FromFlags(args[1:]).Start())

  @classmethod
  def FromFlags(cls, args):
    """Builds the app once flags are parsed."""
    return cls(args=args)

  def Start(self):
    self._Setup()
    try:
      return self._MainLoop()
    except UsageError as e:
      self._logger.error('%s' % e)
      sys.stderr.write('%s\n' % self.__doc__)
      return common_defs.EXIT_USAGE
    except KeyboardInterrupt:
      self._logger.info('Got keyboard interrupt, quitting')
      self.Quit()
      return common_defs.EXIT_INTERRUPTED
    finally:
      self._Teardown()

  def _Setup(self):
    self._logger.debug('Starting %s with args %s' % (self._name, self._args))

  def _Teardown(self):
    pass

  def _MainLoop(self):
    raise NotImplementedError

  def Quit(self):
    self._do_quit = True
