"""Exception types raised by the simulator."""


class SimError(Exception):
  """Base exception type."""


class ConfigError(SimError):
  """Thrown when an experiment config cannot be parsed or is invalid."""

  def __init__(self, message, line=None, column=None):
    self.line = line
    self.column = column
    if line is not None:
      message = 'line %s, column %s: %s' % (line, column or 1, message)
    super(ConfigError, self).__init__(message)


class ShapeError(SimError):
  """Thrown when vector or matrix shapes disagree."""


class NonFiniteError(SimError):
  """Thrown when a NaN or infinite value reaches a public operation."""


class AggregationError(SimError):
  """Thrown when reports cannot be aggregated."""


class DataFormatError(SimError):
  """Base type for dataset ingestion failures."""


class BadMagicError(DataFormatError):
  """IDX header carries an unexpected magic number."""


class TruncatedPayloadError(DataFormatError):
  """IDX payload is shorter than its header promises."""


class CountMismatchError(DataFormatError):
  """Image and label files disagree on the number of rows."""


class LabelRangeError(DataFormatError):
  """A label falls outside of [0, num_classes)."""


class DivergenceError(SimError):
  """A loss, coefficient or aggregate became non-finite during a run."""

  def __init__(self, message, step=None, direction=None, client=None):
    self.step = step
    self.direction = direction
    self.client = client
    context = 'step=%s direction=%s client=%s' % (step, direction, client)
    super(DivergenceError, self).__init__('%s (%s)' % (message, context))


class ReplicaMismatchError(SimError):
  """A client replica drifted from the federator model."""
