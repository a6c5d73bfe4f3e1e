"""Unittest for robust module"""

import math
import unittest

import numpy as np

from . import errors
from . import robust
from .zo import ClientReport


def _OracleTrimmedMean(values, beta):
  ordered = sorted(float('inf') if math.isnan(v) else v for v in values)
  trim = int(math.floor(beta * len(values)))
  survivors = ordered[trim:len(ordered) - trim]
  total = survivors[0]
  for v in survivors[1:]:
    total += v
  mean = total / len(survivors)
  return min(max(mean, survivors[0]), survivors[-1])


class TrimmedMeanTestCase(unittest.TestCase):
  def testExamples(self):
    self.assertEqual(2.5, robust.TrimmedMean([1.0, 2.0, 3.0, 100.0], 0.25))
    self.assertEqual(5.0, robust.TrimmedMean([5.0], 0.0))
    self.assertEqual(3.0, robust.TrimmedMean([7.0, 3.0, -1.0], 1.0 / 3.0))
    self.assertEqual(2.0, robust.TrimmedMean([1.0, 2.0, 3.0], 0.0))

  def testTrimCount(self):
    self.assertEqual(0, robust.TrimCount(3, 0.3))
    self.assertEqual(1, robust.TrimCount(4, 0.25))
    self.assertEqual(5, robust.TrimCount(40, 0.125))
    self.assertRaises(errors.AggregationError, robust.TrimCount, 4, 0.5)
    self.assertRaises(errors.AggregationError, robust.TrimCount, 4, -0.1)
    self.assertRaises(errors.AggregationError, robust.TrimCount, 0, 0.0)

  def testNanCountsAsLargest(self):
    self.assertEqual(3.0, robust.TrimmedMean([np.nan, 1.0, 2.0, 3.0, 4.0], 0.2))

  def testContainment(self):
    self.assertEqual(1e300, robust.TrimmedMean([1e300] * 3, 0.0))
    self.assertEqual(-1e300, robust.TrimmedMean([-1e300] * 4, 0.25))

  def testMatchesOracle(self):
    rng = np.random.RandomState(0)
    for _ in range(10000):
      m = rng.randint(1, 13)
      beta = rng.choice([0.0, 0.1, 0.125, 0.2, 0.25, 0.3, 0.4, 0.49])
      values = rng.randn(m) * 10.0 ** rng.randint(-3, 4)
      if rng.uniform() < 0.1:
        values[rng.randint(m)] = np.nan
      expected = _OracleTrimmedMean(list(values), beta)
      self.assertEqual(expected, robust.TrimmedMean(values, beta))


class RobustDirectionAggregateTestCase(unittest.TestCase):
  def setUp(self):
    rng = np.random.RandomState(1)
    self.values = rng.randn(8, 5)
    self.reports = [ClientReport(i, row) for i, row in enumerate(self.values)]

  def testColumnsAreIndependent(self):
    agg = robust.RobustDirectionAggregate(robust.AggregationInput(self.reports,
        0.25))
    self.assertEqual(5, len(agg))
    for r in range(5):
      self.assertEqual(robust.TrimmedMean(self.values[:, r], 0.25), agg[r])

  def testClientOrderDoesNotMatter(self):
    expected = robust.RobustDirectionAggregate(robust.AggregationInput(
        self.reports, 0.125))
    shuffled = [self.reports[i] for i in (5, 2, 7, 0, 1, 6, 3, 4)]
    agg_input = robust.AggregationInput(shuffled, 0.125)
    self.assertEqual(list(range(8)), [r.client_id for r in agg_input.reports])
    self.assertTrue(np.array_equal(expected,
        robust.RobustDirectionAggregate(agg_input)))

  def testRejectsBadInput(self):
    self.assertRaises(errors.AggregationError, robust.AggregationInput, [],
        0.0)
    mixed = self.reports[:3] + [ClientReport(3, [1.0])]
    self.assertRaises(errors.AggregationError, robust.AggregationInput, mixed,
        0.0)
    self.assertRaises(errors.AggregationError, robust.AggregationInput,
        self.reports, 0.5)


class CoordwiseTestCase(unittest.TestCase):
  def testMean(self):
    agg = robust.MeanAggregate([np.array([1.0, 2.0]), np.array([3.0, 4.0])])
    self.assertEqual([2.0, 3.0], list(agg))

  def testTrimsOutliersPerCoordinate(self):
    grads = [np.array([1.0, -100.0]), np.array([2.0, 1.0]),
        np.array([3.0, 2.0]), np.array([1000.0, 3.0])]
    self.assertEqual([2.5, 1.5], list(robust.CoordwiseTrimmedMean(grads, 0.25)))

  def testRejectsMismatchedShapes(self):
    self.assertRaises(errors.ShapeError, robust.CoordwiseTrimmedMean,
        [np.zeros(2), np.zeros(3)], 0.0)
    self.assertRaises(errors.AggregationError, robust.MeanAggregate, [])


if __name__ == '__main__':
  unittest.main()
