"""Byzantine client behaviors.

Colluding attackers see every honest coefficient of the current step and
all send the same forged value per direction.  Label flipping instead
poisons the attackers' local shards and leaves them otherwise honest.
"""

import logging
import math

import numpy as np

from . import errors
from .data import Dataset
from .seedstream import RngStream
from .seedstream import SeedTuple
from .seedstream import StreamKind

LOGGER = logging.getLogger('adversary')


class AttackKind(object):
  NONE = 'none'
  FULL_KNOWLEDGE = 'full_knowledge'
  ALWAYS_SMALL = 'always_small'
  ALWAYS_LARGE = 'always_large'
  RANDOM_CHOICE = 'random_choice'
  LABEL_FLIPPING = 'label_flipping'

  ALL = (NONE, FULL_KNOWLEDGE, ALWAYS_SMALL, ALWAYS_LARGE, RANDOM_CHOICE,
      LABEL_FLIPPING)

  # Attacks that replace uploaded coefficients.
  FORGING = (FULL_KNOWLEDGE, ALWAYS_SMALL, ALWAYS_LARGE, RANDOM_CHOICE)


class AttackSpec(object):
  """The attack kind and the fixed set of Byzantine client ids.

  There are floor(alpha * m) attackers, the highest client indices, and none
  at all when the kind is NONE.
  """

  def __init__(self, kind, alpha, m):
    if kind not in AttackKind.ALL:
      raise ValueError('Unknown attack: %r' % (kind,))
    if not 0.0 <= alpha < 0.5:
      raise ValueError('alpha must lie in [0, 1/2), got %r' % (alpha,))
    self.kind = kind
    self.alpha = alpha
    self.m = int(m)
    count = 0 if kind == AttackKind.NONE else int(math.floor(alpha * m))
    self.byzantine_ids = frozenset(range(self.m - count, self.m))

  def __str__(self):
    return '<AttackSpec %s byzantine=%s>' % (self.kind,
        sorted(self.byzantine_ids))

  def IsByzantine(self, client_id):
    return client_id in self.byzantine_ids

  def GetHonestIds(self):
    return [i for i in range(self.m) if i not in self.byzantine_ids]

  def ForgesCoefficients(self):
    return self.kind in AttackKind.FORGING and bool(self.byzantine_ids)

  def FlipsLabels(self):
    return self.kind == AttackKind.LABEL_FLIPPING


def OrderIndex(beta, m):
  """1-based order statistic targeted by the attacks: max(floor(beta m), 1)."""
  return max(int(math.floor(beta * m)), 1)


def _OrderStatistics(honest, beta, m):
  """Returns (j-th smallest, j-th largest) per column of `honest`."""
  honest = np.asarray(honest, dtype=np.float64)
  if honest.ndim == 1:
    honest = honest.reshape(-1, 1)
  count = honest.shape[0]
  if count == 0:
    raise errors.AggregationError('Attack needs at least one honest value')
  j = min(OrderIndex(beta, m), count)
  ordered = np.sort(honest, axis=0)
  return honest, ordered[j - 1], ordered[count - j]


def AdversarySeed(root_seed, step):
  return SeedTuple(root_seed, step, 0, 0, StreamKind.ADVERSARY)


def Forge(kind, honest, beta, m, seed=None):
  """Forged value per column of the (honest clients, n) matrix `honest`.

  `seed` is a SeedTuple or integer seed; only RANDOM_CHOICE consumes it.
  """
  honest, small, large = _OrderStatistics(honest, beta, m)
  if kind == AttackKind.ALWAYS_SMALL:
    return small
  elif kind == AttackKind.ALWAYS_LARGE:
    return large
  elif kind == AttackKind.FULL_KNOWLEDGE:
    # Only the sign of this mean is used; dividing by m follows the attack
    # definition even though attackers are not summed.
    honest_mean = honest.sum(axis=0) / m
    return np.where(honest_mean >= 0.0, small, large)
  elif kind == AttackKind.RANDOM_CHOICE:
    if seed is None:
      raise ValueError('random_choice needs an adversary seed')
    if isinstance(seed, SeedTuple):
      stream = RngStream.FromTuple(seed)
    else:
      stream = RngStream(seed)
    pick_large = stream.Bits(len(small)).astype(bool)
    return np.where(pick_large, large, small)
  raise ValueError('Attack %r does not forge coefficients' % (kind,))


def FullKnowledge(honest_values, beta, m):
  return float(Forge(AttackKind.FULL_KNOWLEDGE, honest_values, beta, m)[0])


def AlwaysSmall(honest_values, beta, m):
  return float(Forge(AttackKind.ALWAYS_SMALL, honest_values, beta, m)[0])


def AlwaysLarge(honest_values, beta, m):
  return float(Forge(AttackKind.ALWAYS_LARGE, honest_values, beta, m)[0])


def RandomChoice(honest_values, beta, m, seed):
  return float(Forge(AttackKind.RANDOM_CHOICE, honest_values, beta, m, seed)[0])


def LabelFlip(dataset):
  """Maps label l to C - 1 - l (9 - l on MNIST)."""
  labels = dataset.labels
  if len(labels) and (labels.min() < 0 or labels.max() >= dataset.num_classes):
    raise errors.LabelRangeError('Labels must lie in [0, %i)' %
        dataset.num_classes)
  return Dataset(dataset.features, dataset.num_classes - 1 - labels,
      dataset.num_classes)
