"""Managers reacting to run events: CSV logging, progress and history."""

import csv
import inspect
import logging

from . import common_defs
from . import simevent


def EventHandler(event_type):
  """Marks a Manager method as the handler of event_type."""
  def decorate(f):
    f.handled_events = getattr(f, 'handled_events', frozenset()) | \
        frozenset([event_type])
    return f
  return decorate


class Manager(object):
  """Base of the event consumers.  Attach() subscribes every handler."""

  def __init__(self, event_hub):
    self._event_hub = event_hub
    self._logger = logging.getLogger(type(self).__name__)

  def GetEventHandlers(self):
    """Returns {event type: set of bound handler methods}."""
    handlers = {}
    for _, method in inspect.getmembers(self, inspect.ismethod):
      for event_type in getattr(method, 'handled_events', ()):
        handlers.setdefault(event_type, set()).add(method)
    return handlers

  def Attach(self):
    for event_type, methods in self.GetEventHandlers().items():
      for method in sorted(methods, key=lambda m: m.__name__):
        self._event_hub.Subscribe(event_type, method)
    return self


def FormatFloat(value):
  return repr(float(value))


def FormatRow(event, log_wall_time=False):
  """Renders a RoundLog as the fixed log.csv columns."""
  return [
    str(int(event.step)),
    FormatFloat(event.train_loss),
    FormatFloat(event.test_acc),
    str(int(event.uplink_scalars)),
    str(int(event.downlink_scalars)),
    str(int(event.wall_ms)) if log_wall_time else '0',
  ]


class CsvLogManager(Manager):
  """Writes every RoundLog of a run to log.csv.

  wall_ms is written as 0 unless `log_wall_time` is set, so two runs of one
  config produce identical files.
  """

  def __init__(self, event_hub, path, log_wall_time=False):
    super(CsvLogManager, self).__init__(event_hub)
    self._path = path
    self._log_wall_time = log_wall_time
    self._file = None
    self._writer = None

  def GetPath(self):
    return self._path

  @EventHandler(simevent.RunStartedEvent)
  def _HandleRunStarted(self, event):
    self.Close()
    self._file = open(self._path, 'w', encoding='utf-8', newline='')
    self._writer = csv.writer(self._file, lineterminator='\n')
    self._writer.writerow(common_defs.LOG_COLUMNS)
    self._logger.debug('Writing %s' % self._path)

  @EventHandler(simevent.RoundLog)
  def _HandleRoundLog(self, event):
    if self._writer is None:
      self._logger.warning('Dropping %s: no run started' % event)
      return
    self._writer.writerow(FormatRow(event, self._log_wall_time))

  @EventHandler(simevent.RunFinishedEvent)
  def _HandleRunFinished(self, event):
    self.Close()

  def Close(self):
    if self._file is not None:
      self._file.close()
    self._file = None
    self._writer = None


class ProgressManager(Manager):
  @EventHandler(simevent.RunStartedEvent)
  def _HandleRunStarted(self, event):
    self._logger.info('Starting %s: engine=%s m=%s (byzantine=%s) d=%s T=%s' % (
        event.run_name, event.engine, event.num_clients, event.num_byzantine,
        event.dimension, event.steps))

  @EventHandler(simevent.RoundLog)
  def _HandleRoundLog(self, event):
    self._logger.info('step %5i  loss=%.6f  acc=%.4f  up=%i  down=%i' % (
        event.step, event.train_loss, event.test_acc, event.uplink_scalars,
        event.downlink_scalars))

  @EventHandler(simevent.RunFinishedEvent)
  def _HandleRunFinished(self, event):
    if event.diverged:
      self._logger.error('%s diverged after %s steps' % (event.run_name,
          event.steps))
    else:
      self._logger.info('%s finished %s steps in %.1fs' % (event.run_name,
          event.steps, event.wall_ms / 1000.0))


class HistoryManager(Manager):
  """Keeps the RoundLogs of the current run in memory."""

  def __init__(self, event_hub):
    super(HistoryManager, self).__init__(event_hub)
    self._history = []

  @EventHandler(simevent.RunStartedEvent)
  def _HandleRunStarted(self, event):
    self._history = []

  @EventHandler(simevent.RoundLog)
  def _HandleRoundLog(self, event):
    self._history.append(event)

  def GetHistory(self):
    return list(self._history)

  def GetFinal(self):
    return self._history[-1] if self._history else None
