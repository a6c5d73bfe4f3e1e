"""Small helpers shared across the simulator."""

import collections
import functools


class Field(object):
  """A declared attribute of a DeclarativeMetaclass class.

  Fields remember their declaration order so that classes built from them
  (events, configs) iterate their fields in source order.
  """
  _creation_counter = 0

  def __init__(self, default=None):
    self.default = default
    self.name = None
    self._order = Field._creation_counter
    Field._creation_counter += 1


class DeclarativeMetaclass(type):
  """Collects Field class attributes into an ordered `fields` mapping."""

  def __new__(mcs, name, bases, attrs):
    declared = [(k, v) for k, v in list(attrs.items()) if isinstance(v, Field)]
    declared.sort(key=lambda item: item[1]._order)
    for field_name, field in declared:
      field.name = field_name
      attrs.pop(field_name)

    fields = collections.OrderedDict()
    for base in bases:
      fields.update(getattr(base, 'fields', {}))
    fields.update(declared)
    attrs['fields'] = fields
    return super(DeclarativeMetaclass, mcs).__new__(mcs, name, bases, attrs)


def synchronized(f):
  """Decorator that runs a method while holding `self._lock`."""
  @functools.wraps(f)
  def decorated(self, *args, **kwargs):
    with self._lock:
      return f(self, *args, **kwargs)
  return decorated
