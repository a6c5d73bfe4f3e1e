"""Loss models: multinomial logistic regression, a strongly convex quadratic
and a skewed variant of it."""

import math

import numpy as np

from . import common_defs
from . import core
from . import errors


class LossModel(object):
  """Interface of a differentiable loss f(w; batch)."""

  def GetDimension(self):
    raise NotImplementedError

  def Eval(self, w, batch):
    raise NotImplementedError

  def Grad(self, w, batch):
    raise NotImplementedError

  def Accuracy(self, w, dataset):
    """Fraction of correctly classified rows, or NaN when meaningless."""
    return float('nan')


class LogisticRegressionModel(LossModel):
  """Softmax regression with the bias folded in as a constant-1 feature.

  Parameters are laid out row-major as a (p + 1) x C matrix whose last row
  holds the biases, so d = (p + 1) * C.  The loss is the mean cross-entropy
  over the batch, with no regularization.
  """

  def __init__(self, num_features=common_defs.MNIST_FEATURES,
      num_classes=common_defs.MNIST_CLASSES):
    self._p = int(num_features)
    self._c = int(num_classes)

  def __str__(self):
    return '<LogisticRegressionModel p=%i C=%i d=%i>' % (self._p, self._c,
        self.GetDimension())

  def GetDimension(self):
    return (self._p + 1) * self._c

  def GetNumClasses(self):
    return self._c

  def _Unpack(self, w):
    if w.shape != (self.GetDimension(),):
      raise errors.ShapeError('Expected %i parameters, got shape %s' % (
          self.GetDimension(), w.shape))
    weights = w.reshape(self._p + 1, self._c)
    return weights[:self._p], weights[self._p]

  def _CheckBatch(self, batch):
    features, labels = batch.features, batch.labels
    if len(labels) == 0:
      raise errors.ShapeError('Empty batch')
    if features.ndim != 2 or features.shape[1] != self._p:
      raise errors.ShapeError('Expected %i features per row, got shape %s' % (
          self._p, features.shape))
    if features.shape[0] != len(labels):
      raise errors.ShapeError('Row count mismatch: %i features vs %i labels' % (
          features.shape[0], len(labels)))
    if labels.min() < 0 or labels.max() >= self._c:
      raise errors.LabelRangeError('Labels must lie in [0, %i)' % self._c)
    return features, labels

  def _Logits(self, w, features):
    weights, bias = self._Unpack(w)
    return features.dot(weights) + bias

  def Eval(self, w, batch):
    features, labels = self._CheckBatch(batch)
    logits = self._Logits(w, features)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(len(labels))
    return float(np.mean(log_norm - shifted[rows, labels]))

  def Grad(self, w, batch):
    features, labels = self._CheckBatch(batch)
    logits = self._Logits(w, features)
    shifted = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(shifted)
    probs /= probs.sum(axis=1, keepdims=True)
    probs[np.arange(len(labels)), labels] -= 1.0
    probs /= len(labels)
    grad = np.empty((self._p + 1, self._c), dtype=np.float64)
    grad[:self._p] = features.T.dot(probs)
    grad[self._p] = probs.sum(axis=0)
    return grad.reshape(-1)

  def Predict(self, w, features):
    return np.argmax(self._Logits(w, features), axis=1)

  def Accuracy(self, w, dataset):
    predicted = self.Predict(w, dataset.features)
    return float(np.mean(predicted == dataset.labels))


class QuadraticModel(LossModel):
  """F(w) = (lambda / 2) * ||w - w*||^2, independent of the data batch."""

  def __init__(self, curvature, optimum):
    if not curvature > 0:
      raise ValueError('curvature must be positive, got %r' % (curvature,))
    self._lambda = float(curvature)
    self._optimum = core.ParamVector(optimum)

  def __str__(self):
    return '<QuadraticModel lambda=%s d=%i>' % (self._lambda,
        self.GetDimension())

  def GetDimension(self):
    return len(self._optimum)

  def GetCurvature(self):
    return self._lambda

  def GetOptimum(self):
    return self._optimum

  def Eval(self, w, batch=None):
    diff = w - self._optimum
    return 0.5 * self._lambda * float(np.dot(diff, diff))

  def Grad(self, w, batch=None):
    return self._lambda * (w - self._optimum)

  def Distance(self, w):
    return float(np.linalg.norm(w - self._optimum))

  def DistanceFromLoss(self, loss):
    """Inverts F for the distance ||w - w*||."""
    return math.sqrt(max(0.0, 2.0 * loss / self._lambda))


class SkewedQuadraticModel(QuadraticModel):
  """A convex loss that matches the quadratic to second order at w*.

  F(w) = (lambda / a^2) * sum_i (exp(a u_i) - 1 - a u_i), u = w - w*.  The
  Hessian at w* is lambda * I, but the third derivative is lambda * a, so a
  central difference with mu > 0 is biased by O(a mu^2) even at w*.  With
  a = 0 this is the quadratic.
  """

  def __init__(self, curvature, optimum, skew):
    super(SkewedQuadraticModel, self).__init__(curvature, optimum)
    if not skew >= 0:
      raise ValueError('skew must be non-negative, got %r' % (skew,))
    self._skew = float(skew)

  def __str__(self):
    return '<SkewedQuadraticModel lambda=%s skew=%s d=%i>' % (self._lambda,
        self._skew, self.GetDimension())

  def GetSkew(self):
    return self._skew

  def Eval(self, w, batch=None):
    if self._skew == 0.0:
      return super(SkewedQuadraticModel, self).Eval(w, batch)
    t = self._skew * (w - self._optimum)
    # expm1(t) - t keeps full precision for tiny t.
    return self._lambda * float(np.sum(np.expm1(t) - t)) / self._skew ** 2

  def Grad(self, w, batch=None):
    if self._skew == 0.0:
      return super(SkewedQuadraticModel, self).Grad(w, batch)
    return self._lambda * np.expm1(self._skew * (w - self._optimum)) / \
        self._skew

  def DistanceFromLoss(self, loss):
    if self._skew == 0.0:
      return super(SkewedQuadraticModel, self).DistanceFromLoss(loss)
    raise NotImplementedError('F is not radial; use Distance(w)')
