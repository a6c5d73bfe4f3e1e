"""Run events and the hub that delivers them.

Round engines publish RunStartedEvent, RoundLog and RunFinishedEvent; the
managers in manager.py subscribe to the types they consume.  Delivery is
synchronous: events wait in a queue until Flush or DispatchNextEvent.
"""

import json
import logging
import queue

from . import util


class Event(object, metaclass=util.DeclarativeMetaclass):
  """A record with a fixed set of EventFields.  Unset fields read as default."""

  def __init__(self, **kwargs):
    object.__setattr__(self, '_values', {})
    for name, value in kwargs.items():
      setattr(self, name, value)

  def __setattr__(self, name, value):
    if name not in self.fields:
      raise AttributeError('%s has no field %s' % (type(self).__name__, name))
    self._values[name] = value

  def __getattr__(self, name):
    field = type(self).fields.get(name)
    if field is None:
      raise AttributeError('%s has no field %s' % (type(self).__name__, name))
    return self._values.get(name, field.default)

  def __str__(self):
    pairs = ('%s=%s' % (name, getattr(self, name)) for name in self.fields)
    return '<%s %s>' % (type(self).__name__, ' '.join(pairs))

  def ToDict(self):
    return {
      'event': type(self).__name__,
      'data': dict((name, getattr(self, name)) for name in self.fields),
    }

  def ToJson(self, indent=2):
    return json.dumps(self.ToDict(), indent=indent)


class EventField(util.Field):
  pass


class RunStartedEvent(Event):
  run_name = EventField()
  engine = EventField()
  num_clients = EventField()
  num_byzantine = EventField()
  dimension = EventField()
  steps = EventField()


class RoundLog(Event):
  """Metrics at one logged step.  Communication counters are cumulative."""
  step = EventField()
  train_loss = EventField()
  test_acc = EventField()
  uplink_scalars = EventField()
  downlink_scalars = EventField()
  wall_ms = EventField(0)


class RunFinishedEvent(Event):
  run_name = EventField()
  steps = EventField()
  wall_ms = EventField()
  diverged = EventField(False)


class EventHub(object):
  """Queues published events and hands each to the callbacks of its type."""

  def __init__(self, debug=False):
    self._debug = debug
    self._callbacks = {}
    self._pending = queue.Queue()
    self._logger = logging.getLogger('eventhub')

  def Subscribe(self, event_cls, cb):
    """Registers cb(event) for events of exactly event_cls."""
    if not (isinstance(event_cls, type) and issubclass(event_cls, Event)):
      raise ValueError('Can only subscribe to Event classes, not %r' %
          (event_cls,))
    self._callbacks.setdefault(event_cls, []).append(cb)

  def Unsubscribe(self, event_cls, cb):
    self._callbacks.get(event_cls, []).remove(cb)

  def PublishEvent(self, event):
    self._pending.put(event)

  def DispatchNextEvent(self, timeout=None):
    """Delivers one queued event, waiting up to `timeout` seconds for it."""
    try:
      event = self._pending.get(timeout=timeout)
    except queue.Empty:
      return False
    self._Deliver(event)
    return True

  def Flush(self):
    """Delivers every queued event.  Returns how many were delivered."""
    delivered = 0
    while not self._pending.empty():
      self._Deliver(self._pending.get_nowait())
      delivered += 1
    return delivered

  def _Deliver(self, event):
    if self._debug:
      self._logger.debug('Dispatching %s' % event)
    for cb in list(self._callbacks.get(type(event), ())):
      cb(event)
