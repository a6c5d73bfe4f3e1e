"""Deterministic seed derivation and shared random perturbation directions.

The federator and every client regenerate identical perturbation directions
from a seed tuple (root s, step t, sample r, epoch e, kind) instead of
transmitting vectors.  The stream identity is frozen:

  * Seed derivation: start from h = 0 and absorb the five words root, step,
    sample, epoch and kind tag (each reduced mod 2**64) in that order with
    h <- SplitMix64Finalize((h + 0x9E3779B97F4A7C15) XOR word).
  * Bit stream: numpy's counter-based Philox4x64-10 keyed by the derived
    seed, counter starting at zero, read through `random_raw`.
  * Uniforms: (raw >> 11) * 2**-53, a double in [0, 1).
  * Gaussians: Marsaglia's polar method over consecutive uniform pairs,
    processed in blocks of POLAR_PAIRS_PER_BLOCK pairs; rejected pairs are
    part of the stream.
  * Sphere directions: a Gaussian direction divided by its L2 norm, the norm
    accumulated chunk by chunk (DIRECTION_CHUNK coordinates per np.dot).
"""

import logging
import threading

import numpy as np

from . import common_defs
from . import util

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_DOUBLE_UNIT = 1.0 / (1 << 53)

LOGGER = logging.getLogger('seedstream')


class StreamKind(object):
  """Kind tags separating the independent families of random streams."""
  DIRECTION = 0
  DATA_SHUFFLE = 1
  INIT = 2
  ADVERSARY = 3
  MONTE_CARLO = 4

  ALL = (DIRECTION, DATA_SHUFFLE, INIT, ADVERSARY, MONTE_CARLO)


class InitPurpose(object):
  """Step values used with StreamKind.INIT to keep one-off draws apart."""
  MODEL = 0
  PARTITION_IID = 1
  PARTITION_NONIID = 2
  SYNTHETIC = 3
  OPTIMUM = 4


class DirectionMode(object):
  GAUSSIAN = 'gaussian'
  SPHERE = 'sphere'

  ALL = (GAUSSIAN, SPHERE)


def SplitMix64Finalize(x):
  """The SplitMix64 output mixing function on a 64-bit integer."""
  z = x & MASK64
  z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
  z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
  return z ^ (z >> 31)


class SeedTuple(object):
  """Identifies one random stream: (root, step, sample, epoch, kind)."""

  def __init__(self, root, step=0, sample=0, epoch=0, kind=StreamKind.DIRECTION):
    if kind not in StreamKind.ALL:
      raise ValueError('Unknown stream kind: %r' % (kind,))
    self.root = int(root)
    self.step = int(step)
    self.sample = int(sample)
    self.epoch = int(epoch)
    self.kind = kind

  def __str__(self):
    return '<SeedTuple s=%i t=%i r=%i e=%i kind=%i>' % self.AsTuple()

  def __eq__(self, other):
    return isinstance(other, SeedTuple) and self.AsTuple() == other.AsTuple()

  def __hash__(self):
    return hash(self.AsTuple())

  def AsTuple(self):
    return self.root, self.step, self.sample, self.epoch, self.kind


def DeriveSeed(seed_tuple):
  """Mixes a SeedTuple into a 64-bit stream seed.  Pure and portable."""
  h = 0
  for word in seed_tuple.AsTuple():
    h = SplitMix64Finalize(((h + GOLDEN_GAMMA) & MASK64) ^ (word & MASK64))
  return h


def DirectionSeed(root, step, sample, epoch=0):
  return DeriveSeed(SeedTuple(root, step, sample, epoch, StreamKind.DIRECTION))


class RngStream(object):
  """A deterministic random stream keyed by a derived 64-bit seed.

  The i-th value drawn depends only on (seed, i).  Streams are value types:
  never share one between concurrent tasks.
  """

  def __init__(self, seed):
    self._seed = int(seed) & MASK64
    self._bitgen = np.random.Philox(key=self._seed)
    self._pending = np.empty(0, dtype=np.float64)

  def __str__(self):
    return '<RngStream seed=0x%016x>' % self._seed

  @classmethod
  def FromTuple(cls, seed_tuple):
    return cls(DeriveSeed(seed_tuple))

  def GetSeed(self):
    return self._seed

  def RandomRaw(self, n):
    """Returns the next `n` raw 64-bit words."""
    return self._bitgen.random_raw(int(n))

  def Uniform(self, n):
    """Returns `n` doubles in [0, 1)."""
    raw = self.RandomRaw(n)
    return (raw >> np.uint64(11)).astype(np.float64) * _DOUBLE_UNIT

  def Bits(self, n):
    """Returns `n` fair coin flips as an int array of zeros and ones."""
    return (self.RandomRaw(n) >> np.uint64(63)).astype(np.int64)

  def Permutation(self, n):
    """Returns a permutation of range(n) driven by raw stream words."""
    keys = self.RandomRaw(n)
    return np.argsort(keys, kind='stable')

  def Generator(self):
    """A numpy Generator drawing from this stream's bits.

    Its samplers belong to numpy, not to the frozen polar method, so use it
    only for Monte-Carlo work that need not match across numpy versions.
    """
    return np.random.Generator(self._bitgen)

  def _PolarBlock(self):
    u = 2.0 * self.Uniform(2 * common_defs.POLAR_PAIRS_PER_BLOCK) - 1.0
    x = u[0::2]
    y = u[1::2]
    s = x * x + y * y
    keep = (s > 0.0) & (s < 1.0)
    x, y, s = x[keep], y[keep], s[keep]
    factor = np.sqrt(-2.0 * np.log(s) / s)
    block = np.empty(2 * len(s), dtype=np.float64)
    block[0::2] = x * factor
    block[1::2] = y * factor
    return block

  def Normal(self, n):
    """Returns the next `n` standard normal values of the stream."""
    n = int(n)
    parts = [self._pending]
    have = len(self._pending)
    while have < n:
      block = self._PolarBlock()
      parts.append(block)
      have += len(block)
    values = np.concatenate(parts) if len(parts) > 1 else parts[0]
    self._pending = values[n:]
    return values[:n]


def _StreamChunks(seed, d):
  """Yields (lo, hi, gaussian chunk) covering coordinates [0, d)."""
  stream = RngStream(seed)
  chunk = common_defs.DIRECTION_CHUNK
  for lo in range(0, d, chunk):
    hi = min(d, lo + chunk)
    yield lo, hi, stream.Normal(hi - lo)


def _SphereNorm(seed, d):
  total = 0.0
  for _, _, z in _StreamChunks(seed, d):
    total += float(np.dot(z, z))
  return float(np.sqrt(total))


def _SphereSeed(seed, d):
  """Returns (seed, norm) of the first draw with a non-zero norm."""
  norm = _SphereNorm(seed, d)
  while norm == 0.0:
    LOGGER.warning('All-zero sphere draw for seed 0x%016x, redrawing' % seed)
    seed = SplitMix64Finalize(seed + GOLDEN_GAMMA)
    norm = _SphereNorm(seed, d)
  return seed, norm


def GaussianDirection(seed, d):
  """Returns d independent N(0, 1) values from the stream of `seed`."""
  if d < 1:
    raise ValueError('dimension must be positive, got %r' % (d,))
  z = np.empty(d, dtype=np.float64)
  for lo, hi, chunk in _StreamChunks(seed, d):
    z[lo:hi] = chunk
  return z


def SphereDirection(seed, d):
  """Returns a direction drawn uniformly from the unit sphere in R^d."""
  seed, norm = _SphereSeed(seed, d)
  return GaussianDirection(seed, d) / norm


def Direction(seed, d, mode):
  if mode == DirectionMode.GAUSSIAN:
    return GaussianDirection(seed, d)
  elif mode == DirectionMode.SPHERE:
    return SphereDirection(seed, d)
  raise ValueError('Unknown direction mode: %r' % (mode,))


def PerturbInplace(w, scale, seed, mode):
  """Applies w <- w + scale * z(seed) without materializing z.

  Gaussian directions are streamed chunk by chunk.  Sphere directions take a
  first pass for the normalizer and a second, replayed pass for the update.
  The arithmetic per coordinate is identical to `w += scale * Direction(...)`.
  """
  d = len(w)
  if mode == DirectionMode.GAUSSIAN:
    for lo, hi, z in _StreamChunks(seed, d):
      w[lo:hi] += scale * z
  elif mode == DirectionMode.SPHERE:
    seed, norm = _SphereSeed(seed, d)
    for lo, hi, z in _StreamChunks(seed, d):
      w[lo:hi] += scale * (z / norm)
  else:
    raise ValueError('Unknown direction mode: %r' % (mode,))


class DirectionCache(object):
  """Per-step memo of materialized directions, shared read-only by clients.

  Every consumer of a step's direction gets the same array, so cached and
  streamed perturbations agree bit for bit.
  """

  def __init__(self, root, d, mode):
    self._root = root
    self._d = d
    self._mode = mode
    self._step = None
    self._directions = {}
    self._lock = threading.Lock()

  @util.synchronized
  def Get(self, step, sample, epoch=0):
    if step != self._step:
      self._directions.clear()
      self._step = step
    key = (sample, epoch)
    z = self._directions.get(key)
    if z is None:
      z = Direction(DirectionSeed(self._root, step, sample, epoch), self._d,
          self._mode)
      z.setflags(write=False)
      self._directions[key] = z
    return z
