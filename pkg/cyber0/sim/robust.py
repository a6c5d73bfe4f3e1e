"""Trimmed-mean aggregation of client reports and first-order baselines."""

import math

import numpy as np

from . import errors


def TrimCount(m, beta):
  """floor(beta * m), checking that at least one value survives."""
  if not 0.0 <= beta < 0.5:
    raise errors.AggregationError('beta must lie in [0, 1/2), got %r' % (beta,))
  if m < 1:
    raise errors.AggregationError('Nothing to aggregate')
  trim = int(math.floor(beta * m))
  if m - 2 * trim < 1:
    raise errors.AggregationError('No survivors: m=%i, beta=%r' % (m, beta))
  return trim


def _TrimmedColumns(values, beta):
  """Column-wise trimmed mean of an (m, n) matrix.

  NaN counts as +inf.  Survivors are summed in ascending order, and each
  mean is clipped to its survivors' [min, max].
  """
  m = values.shape[0]
  trim = TrimCount(m, beta)
  ordered = np.where(np.isnan(values), np.inf, values)
  ordered.sort(axis=0)
  survivors = ordered[trim:m - trim]

  total = survivors[0].copy()
  for row in survivors[1:]:
    total += row
  mean = total / len(survivors)
  return np.clip(mean, survivors[0], survivors[-1])


def TrimmedMean(values, beta):
  """Mean after dropping the floor(beta m) smallest and largest values."""
  values = np.asarray(values, dtype=np.float64).reshape(-1, 1)
  return float(_TrimmedColumns(values, beta)[0])


class AggregationInput(object):
  """One step's client reports, in client-id order, plus the trim fraction."""

  def __init__(self, reports, beta):
    if not reports:
      raise errors.AggregationError('No reports to aggregate')
    counts = set(len(report) for report in reports)
    if len(counts) != 1:
      raise errors.AggregationError('Reports carry different coefficient '
          'counts: %s' % sorted(counts))
    TrimCount(len(reports), beta)
    self.reports = sorted(reports, key=lambda report: report.client_id)
    self.beta = beta

  def __str__(self):
    return '<AggregationInput m=%i n=%i beta=%s>' % (self.GetNumClients(),
        self.GetNumCoefficients(), self.beta)

  def GetNumClients(self):
    return len(self.reports)

  def GetNumCoefficients(self):
    return len(self.reports[0])

  def Matrix(self):
    return np.vstack([report.coefficients for report in self.reports])


def RobustDirectionAggregate(agg_input):
  """Trimmed mean of every coefficient position, across clients."""
  return _TrimmedColumns(agg_input.Matrix(), agg_input.beta)


def _StackGradients(grads):
  if not len(grads):
    raise errors.AggregationError('No gradients to aggregate')
  shapes = set(np.shape(g) for g in grads)
  if len(shapes) != 1:
    raise errors.ShapeError('Gradients differ in shape: %s' % sorted(shapes))
  return np.vstack(grads)


def CoordwiseTrimmedMean(grads, beta):
  """Trimmed mean applied independently to each coordinate."""
  return _TrimmedColumns(_StackGradients(grads), beta)


def MeanAggregate(grads):
  """Coordinate-wise mean (FedAvg); the beta = 0 trimmed mean."""
  return CoordwiseTrimmedMean(grads, 0.0)
