"""Zero-order coefficients and their seed-replay application.

A client never uploads a gradient.  For every shared direction z_r it
uploads the single scalar

    c * (f(w + mu z_r; B) - f(w - mu z_r; B)) / (2 mu)

with c = d for sphere directions and c = 1 for Gaussian ones, or, in the
mu = 0 mode, the exact projection c * <grad f(w; B), z_r>.  Whoever holds
the aggregated scalars rebuilds the update by regenerating z_r from its
seed.
"""

import math

import numpy as np

from . import errors
from .seedstream import Direction
from .seedstream import DirectionMode
from .seedstream import DirectionSeed
from .seedstream import PerturbInplace


class ZoConfig(object):
  """Perturbation settings shared by every participant of a run."""

  def __init__(self, mu, k, direction_mode=DirectionMode.GAUSSIAN,
      mu_zero=False):
    if direction_mode not in DirectionMode.ALL:
      raise ValueError('Unknown direction mode: %r' % (direction_mode,))
    if int(k) < 1:
      raise ValueError('k must be positive, got %r' % (k,))
    if mu < 0 or not math.isfinite(mu):
      raise ValueError('mu must be finite and non-negative, got %r' % (mu,))
    if (mu > 0) == bool(mu_zero):
      raise ValueError('Exactly one of mu > 0 and mu_zero must hold '
          '(mu=%r, mu_zero=%r)' % (mu, mu_zero))
    self.mu = float(mu)
    self.k = int(k)
    self.direction_mode = direction_mode
    self.mu_zero = bool(mu_zero)

  def __str__(self):
    return '<ZoConfig mu=%s k=%i mode=%s mu_zero=%s>' % (self.mu, self.k,
        self.direction_mode, self.mu_zero)

  def ScaleFactor(self, d):
    """The c in c * quotient: d for sphere directions, 1 for Gaussian."""
    if self.direction_mode == DirectionMode.SPHERE:
      return float(d)
    return 1.0


class ClientReport(object):
  """The coefficients one client uploads for one step."""

  def __init__(self, client_id, coefficients):
    self.client_id = int(client_id)
    self.coefficients = np.asarray(coefficients, dtype=np.float64).reshape(-1)

  def __str__(self):
    return '<ClientReport client=%i n=%i>' % (self.client_id,
        len(self.coefficients))

  def __len__(self):
    return len(self.coefficients)


def _Perturb(w, scale, seed, mode, direction):
  if direction is None:
    PerturbInplace(w, scale, seed, mode)
  else:
    w += scale * direction


def _CheckedLoss(model, w, batch, sign):
  loss = model.Eval(w, batch)
  if not math.isfinite(loss):
    raise errors.DivergenceError('Non-finite loss %r at w %s mu z' % (loss,
        sign))
  return loss


def ZoCoefficient(model, w, batch, cfg, seed, direction=None):
  """Central finite-difference coefficient along the direction of `seed`.

  `w` is perturbed in place and restored from a snapshot, so it is
  bit-identical to its input on return (also on error).  A pre-materialized
  `direction` may be passed instead of streaming it from the seed.
  """
  if cfg.mu_zero:
    raise ValueError('ZoCoefficient needs mu > 0; use ZoCoefficientMu0')
  snapshot = w.copy()
  try:
    _Perturb(w, cfg.mu, seed, cfg.direction_mode, direction)
    loss_plus = _CheckedLoss(model, w, batch, '+')
    np.copyto(w, snapshot)
    _Perturb(w, -cfg.mu, seed, cfg.direction_mode, direction)
    loss_minus = _CheckedLoss(model, w, batch, '-')
  finally:
    np.copyto(w, snapshot)
  quotient = (loss_plus - loss_minus) / (2.0 * cfg.mu)
  return cfg.ScaleFactor(len(w)) * quotient


def ZoCoefficientMu0(model, w, batch, cfg, seed, grad=None, direction=None):
  """Projection c * <grad f(w; B), z> of the exact gradient.

  Pass `grad` to share one gradient evaluation across a step's directions.
  """
  if grad is None:
    grad = model.Grad(w, batch)
  if not np.all(np.isfinite(grad)):
    raise errors.DivergenceError('Non-finite gradient')
  if direction is None:
    direction = Direction(seed, len(w), cfg.direction_mode)
  return cfg.ScaleFactor(len(w)) * float(np.dot(grad, direction))


def ApplyUpdate(w, coefficients, step, epoch, eta, cfg, root_seed, cache=None):
  """Replays w <- w - (eta / k) * sum_r g_r z_r in ascending r.

  Each term goes through one in-place perturbation with the direction of
  (root_seed, step, r, epoch).  With a DirectionCache the directions come
  from the cache; the arithmetic per coordinate is the same.
  """
  coefficients = np.asarray(coefficients, dtype=np.float64)
  if len(coefficients) != cfg.k:
    raise errors.ShapeError('Expected %i coefficients, got %i' % (cfg.k,
        len(coefficients)))
  if not np.all(np.isfinite(coefficients)):
    raise errors.NonFiniteError('Aggregated coefficients must be finite')
  for r in range(cfg.k):
    scale = -eta * coefficients[r] / cfg.k
    if cache is not None:
      w += scale * cache.Get(step, r, epoch)
    else:
      PerturbInplace(w, scale, DirectionSeed(root_seed, step, r, epoch),
          cfg.direction_mode)
