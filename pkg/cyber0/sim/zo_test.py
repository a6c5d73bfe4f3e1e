"""Unittest for zo module"""

import unittest

import numpy as np

from . import errors
from . import losses
from . import zo
from .data import Dataset
from .seedstream import Direction
from .seedstream import DirectionCache
from .seedstream import DirectionMode
from .seedstream import DirectionSeed


class ExplodingModel(losses.LossModel):
  def GetDimension(self):
    return 4

  def Eval(self, w, batch):
    return float('inf')


class ZoConfigTestCase(unittest.TestCase):
  def testValidation(self):
    self.assertRaises(ValueError, zo.ZoConfig, 0.0, 4)
    self.assertRaises(ValueError, zo.ZoConfig, 1e-3, 4, mu_zero=True)
    self.assertRaises(ValueError, zo.ZoConfig, 1e-3, 0)
    self.assertRaises(ValueError, zo.ZoConfig, 1e-3, 4, 'uniform')
    self.assertRaises(ValueError, zo.ZoConfig, float('nan'), 4)
    cfg = zo.ZoConfig(0.0, 4, mu_zero=True)
    self.assertTrue(cfg.mu_zero)

  def testScaleFactor(self):
    self.assertEqual(1.0, zo.ZoConfig(1e-3, 1).ScaleFactor(7850))
    self.assertEqual(7850.0, zo.ZoConfig(1e-3, 1,
        DirectionMode.SPHERE).ScaleFactor(7850))


class ZoCoefficientTestCase(unittest.TestCase):
  def setUp(self):
    self.rng = np.random.RandomState(11)
    self.logreg = losses.LogisticRegressionModel(3, 3)
    self.batch = Dataset(self.rng.uniform(size=(6, 3)), [0, 1, 2, 0, 1, 2], 3)

  def testHandExample(self):
    model = losses.QuadraticModel(2.0, [0.0])
    for mode in DirectionMode.ALL:
      cfg = zo.ZoConfig(0.5, 1, mode)
      g = zo.ZoCoefficient(model, np.array([1.0]), None, cfg, 0,
          direction=np.array([1.0]))
      self.assertEqual(2.0, g)

  def testOrthogonalDirection(self):
    model = losses.QuadraticModel(1.0, [0.0, 0.0])
    cfg = zo.ZoConfig(1e-3, 1)
    g = zo.ZoCoefficient(model, np.array([0.0, 1.0]), None, cfg, 0,
        direction=np.array([1.0, 0.0]))
    self.assertEqual(0.0, g)

  def testSphereScalesByDimension(self):
    w = self.rng.randn(self.logreg.GetDimension())
    z = self.rng.randn(len(w))
    z /= np.linalg.norm(z)
    gaussian = zo.ZoCoefficient(self.logreg, w, self.batch,
        zo.ZoConfig(1e-3, 1), 0, direction=z)
    sphere = zo.ZoCoefficient(self.logreg, w, self.batch,
        zo.ZoConfig(1e-3, 1, DirectionMode.SPHERE), 0, direction=z)
    self.assertEqual(len(w) * gaussian, sphere)

  def testStreamedMatchesMaterialized(self):
    w = self.rng.randn(self.logreg.GetDimension())
    seed = DirectionSeed(4, 2, 1)
    for mode in DirectionMode.ALL:
      cfg = zo.ZoConfig(1e-3, 1, mode)
      streamed = zo.ZoCoefficient(self.logreg, w, self.batch, cfg, seed)
      materialized = zo.ZoCoefficient(self.logreg, w, self.batch, cfg, seed,
          direction=Direction(seed, len(w), mode))
      self.assertEqual(streamed, materialized)

  def testRestoresParameters(self):
    w = self.rng.randn(self.logreg.GetDimension()) * 1.7
    original = w.copy()
    cfg = zo.ZoConfig(1e-3, 1, DirectionMode.SPHERE)
    for r in range(5):
      zo.ZoCoefficient(self.logreg, w, self.batch, cfg, DirectionSeed(0, 0, r))
      self.assertTrue(np.array_equal(original, w))

  def testRestoresParametersOnError(self):
    w = self.rng.randn(4)
    original = w.copy()
    with self.assertRaises(errors.DivergenceError):
      zo.ZoCoefficient(ExplodingModel(), w, None, zo.ZoConfig(1e-3, 1), 9)
    self.assertTrue(np.array_equal(original, w))

  def testRejectsMuZeroConfig(self):
    self.assertRaises(ValueError, zo.ZoCoefficient, self.logreg,
        np.zeros(12), self.batch, zo.ZoConfig(0.0, 1, mu_zero=True), 0)

  def testQuadraticDifferenceIsExactProjection(self):
    model = losses.QuadraticModel(1.0, np.zeros(8))
    w = self.rng.randn(8)
    for mode in DirectionMode.ALL:
      for r in range(10):
        seed = DirectionSeed(1, 0, r)
        finite = zo.ZoCoefficient(model, w, None, zo.ZoConfig(1e-3, 1, mode),
            seed)
        exact = zo.ZoCoefficientMu0(model, w, None, zo.ZoConfig(0.0, 1, mode,
            mu_zero=True), seed)
        self.assertLess(abs(finite - exact), 1e-8 * (1.0 + abs(exact)))

  def testBiasShrinksQuadratically(self):
    w = self.rng.randn(self.logreg.GetDimension())
    exact_cfg = zo.ZoConfig(0.0, 1, mu_zero=True)
    errors_by_mu = []
    for mu in (1e-3, 5e-4):
      total = 0.0
      for r in range(20):
        seed = DirectionSeed(2, 0, r)
        exact = zo.ZoCoefficientMu0(self.logreg, w, self.batch, exact_cfg, seed)
        finite = zo.ZoCoefficient(self.logreg, w, self.batch,
            zo.ZoConfig(mu, 1), seed)
        total += abs(finite - exact)
      errors_by_mu.append(total)
    self.assertGreaterEqual(errors_by_mu[0] / errors_by_mu[1], 1.9)

  def testMu0SharesGradient(self):
    w = self.rng.randn(self.logreg.GetDimension())
    cfg = zo.ZoConfig(0.0, 1, mu_zero=True)
    grad = self.logreg.Grad(w, self.batch)
    seed = DirectionSeed(3, 1, 0)
    self.assertEqual(zo.ZoCoefficientMu0(self.logreg, w, self.batch, cfg, seed),
        zo.ZoCoefficientMu0(self.logreg, w, self.batch, cfg, seed, grad=grad))
    grad[0] = np.nan
    self.assertRaises(errors.DivergenceError, zo.ZoCoefficientMu0, self.logreg,
        w, self.batch, cfg, seed, grad=grad)


class ApplyUpdateTestCase(unittest.TestCase):
  def setUp(self):
    self.w0 = np.random.RandomState(5).randn(50)

  def testZeroCoefficientsKeepModel(self):
    w = self.w0.copy()
    zo.ApplyUpdate(w, np.zeros(8), 3, 0, 0.1, zo.ZoConfig(1e-3, 8), 17)
    self.assertTrue(np.array_equal(self.w0, w))

  def testSingleDirection(self):
    for mode in DirectionMode.ALL:
      cfg = zo.ZoConfig(1e-3, 1, mode)
      eta, g = 0.05, 2.5
      w = self.w0.copy()
      zo.ApplyUpdate(w, [g], 4, 0, eta, cfg, 17)
      z = Direction(DirectionSeed(17, 4, 0), len(w), mode)
      expected = self.w0 + (-eta * g / 1) * z
      self.assertTrue(np.array_equal(expected, w))

  def testCacheMatchesStream(self):
    coefficients = np.array([0.3, -1.2, 4.0, 0.0])
    for mode in DirectionMode.ALL:
      cfg = zo.ZoConfig(1e-3, 4, mode)
      streamed = self.w0.copy()
      zo.ApplyUpdate(streamed, coefficients, 2, 1, 0.01, cfg, 8)
      cached = self.w0.copy()
      zo.ApplyUpdate(cached, coefficients, 2, 1, 0.01, cfg, 8,
          cache=DirectionCache(8, len(cached), mode))
      self.assertTrue(np.array_equal(streamed, cached))

  def testEpochSelectsDirections(self):
    cfg = zo.ZoConfig(1e-3, 2)
    a = self.w0.copy()
    zo.ApplyUpdate(a, [1.0, 1.0], 2, 0, 0.01, cfg, 8)
    b = self.w0.copy()
    zo.ApplyUpdate(b, [1.0, 1.0], 2, 1, 0.01, cfg, 8)
    self.assertFalse(np.array_equal(a, b))

  def testRejectsBadCoefficients(self):
    cfg = zo.ZoConfig(1e-3, 3)
    w = self.w0.copy()
    self.assertRaises(errors.ShapeError, zo.ApplyUpdate, w, [1.0, 2.0], 0, 0,
        0.1, cfg, 1)
    self.assertRaises(errors.NonFiniteError, zo.ApplyUpdate, w,
        [1.0, np.inf, 2.0], 0, 0, 0.1, cfg, 1)
    self.assertTrue(np.array_equal(self.w0, w))


if __name__ == '__main__':
  unittest.main()
