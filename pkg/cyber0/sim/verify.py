"""Monte-Carlo and convergence checks of the zero-order estimator theory.

Every Monte-Carlo estimate is a deterministic function of its seed: draws
come in shards of MONTE_CARLO_SHARD samples, each from its own MONTE_CARLO
stream (root = seed, step = shard index), and shard results are reduced in
shard order.
"""

from concurrent import futures
import logging
import math
import time

import numpy as np

from . import common_defs
from . import config as config_lib
from . import federation
from .seedstream import DirectionMode
from .seedstream import RngStream
from .seedstream import SeedTuple
from .seedstream import StreamKind

LOGGER = logging.getLogger('verify')

RATE_CHECK_SECONDS = 60.0

# Seeds averaged by the floor check.
FLOOR_SEEDS = 5

# Floors below this are indistinguishable from rounding.
FLOOR_RESOLUTION = 1e-12


class Suite(object):
  LEMMAS = 'lemmas'
  THEOREMS = 'theorems'
  ALL = 'all'
  NAMES = (LEMMAS, THEOREMS, ALL)


class TheoryParams(object):
  """Step-size divisor tau, step size eta and rate bound of the analysis."""

  def __init__(self, curvature, smoothness, d, k, mu_positive=False):
    if not 0 < curvature <= smoothness:
      raise ValueError('Need 0 < lambda <= L_F, got %r and %r' % (curvature,
          smoothness))
    self.curvature = float(curvature)
    self.smoothness = float(smoothness)
    self.d = int(d)
    self.k = int(k)
    self.mu_positive = bool(mu_positive)
    if self.mu_positive:
      self.tau = (2.0 * d + (k - 1) * (1.0 + math.sqrt(d))) / k
      self.eta = 1.0 / (2.0 * self.tau * self.smoothness)
    else:
      self.tau = float(d + k - 1) / k
      self.eta = 1.0 / (self.tau * self.smoothness)

  def __str__(self):
    return '<TheoryParams d=%i k=%i tau=%.6g eta=%.6g>' % (self.d, self.k,
        self.tau, self.eta)

  def RateBound(self):
    """Per-step contraction bound 1 - lambda / (c tau (L_F + lambda))."""
    factor = 2.0 if self.mu_positive else 1.0
    return 1.0 - self.curvature / (factor * self.tau *
        (self.smoothness + self.curvature))


class CheckReport(object):
  """Outcome of one check: estimate, target and tolerance."""

  def __init__(self, name, estimate, target, tolerance, passed, detail=''):
    self.name = name
    self.estimate = estimate
    self.target = target
    self.tolerance = tolerance
    self.passed = bool(passed)
    self.detail = detail

  def __str__(self):
    return '%-28s %-4s estimate=%-12.6g target=%-12.6g tol=%-10.4g %s' % (
        self.name, 'PASS' if self.passed else 'FAIL', self.estimate,
        self.target, self.tolerance, self.detail)


def FormatTable(reports):
  lines = ['%-28s %-4s %s' % ('check', 'ok', 'values')]
  lines.extend(str(r) for r in reports)
  passed = sum(1 for r in reports if r.passed)
  lines.append('%i/%i checks passed' % (passed, len(reports)))
  return '\n'.join(lines)


### Monte-Carlo plumbing

def _ShardSizes(total, shard):
  sizes = [shard] * (total // shard)
  if total % shard:
    sizes.append(total % shard)
  return sizes


def _ShardStream(seed, index):
  return RngStream.FromTuple(SeedTuple(seed, index, 0, 0,
      StreamKind.MONTE_CARLO))


def SphereBatch(stream, n, d, bulk=False):
  """n independent unit-sphere draws as rows of an (n, d) matrix.

  With `bulk` the normals come from numpy's ziggurat sampler on the same
  stream bits, several times faster than the polar method.
  """
  normal = stream.Generator().standard_normal if bulk else stream.Normal
  z = normal(n * d).reshape(n, d)
  norms = np.sqrt(np.einsum('ij,ij->i', z, z))
  zero = norms == 0.0
  while np.any(zero):
    z[zero] = normal(int(zero.sum()) * d).reshape(-1, d)
    norms = np.sqrt(np.einsum('ij,ij->i', z, z))
    zero = norms == 0.0
  z /= norms[:, None]
  return z


def _MonteCarlo(seed, total, per_shard, fn, threads=1):
  """Evaluates fn(stream, n) per shard and sums the results in shard order."""
  sizes = _ShardSizes(int(total), int(per_shard))
  jobs = list(enumerate(sizes))

  def Run(job):
    index, n = job
    return fn(_ShardStream(seed, index), n)
  if threads > 1:
    with futures.ThreadPoolExecutor(max_workers=threads) as pool:
      parts = list(pool.map(Run, jobs))
  else:
    parts = [Run(job) for job in jobs]
  total_value = parts[0]
  for part in parts[1:]:
    total_value = total_value + part
  return total_value


### Estimator moments

def McIsotropy(d, n, seed, threads=1):
  """Max-abs deviation of the empirical E[z z^T] from I/d.

  Returns (deviation, empirical second-moment matrix).
  """
  def Shard(stream, count):
    z = SphereBatch(stream, count, d)
    return z.T.dot(z)
  moment = _MonteCarlo(seed, n, common_defs.MONTE_CARLO_SHARD, Shard,
      threads) / n
  deviation = float(np.max(np.abs(moment - np.eye(d) / d)))
  return deviation, moment


def McNormFactor(d, k, n, x, seed, threads=1):
  """Empirical E||(1/k) sum_r d <x, z_r> z_r||^2 / ||x||^2.

  Approaches (d + k - 1) / k.  Returns (ratio, standard error).
  """
  x = np.asarray(x, dtype=np.float64)
  per_shard = max(1, common_defs.MONTE_CARLO_SHARD // k)

  def Shard(stream, count):
    z = SphereBatch(stream, count * k, d, bulk=True).reshape(count, k, d)
    projections = z.dot(x)
    v = np.einsum('nk,nkd->nd', projections, z) * float(d) / k
    squares = np.einsum('nd,nd->n', v, v)
    return np.array([squares.sum(), np.dot(squares, squares)])
  sums = _MonteCarlo(seed, n, per_shard, Shard, threads)
  norm_sq = float(np.dot(x, x))
  mean = sums[0] / n
  variance = max(0.0, sums[1] / n - mean * mean)
  return mean / norm_sq, math.sqrt(variance / n) / norm_sq


def McCrossAbsBound(d, n, x, seed, threads=1):
  """Empirical E[|z1^T z2| (x^T z1)^2] over independent sphere pairs.

  Returns (estimate, bound ||x||^2 / d^(3/2)).
  """
  x = np.asarray(x, dtype=np.float64)

  def Shard(stream, count):
    z1 = SphereBatch(stream, count, d)
    z2 = SphereBatch(stream, count, d)
    cross = np.abs(np.einsum('ij,ij->i', z1, z2))
    return float(np.sum(cross * z1.dot(x) ** 2))
  estimate = _MonteCarlo(seed, n, common_defs.MONTE_CARLO_SHARD, Shard,
      threads) / n
  bound = float(np.dot(x, x)) / d ** 1.5
  return estimate, bound


def SmoothedGapQuadratic(curvature, mu, d, n, seed, offset=None, threads=1):
  """Monte-Carlo F_mu(w) - F(w) for F = (lambda/2)||w||^2.

  `offset` is w - w*; by default a small seeded vector.  The analytic value
  is lambda mu^2 / 2 for every w.  Returns (estimate, |estimate - analytic|,
  standard error).
  """
  if offset is None:
    stream = _ShardStream(seed, -1)
    offset = 0.01 * stream.Normal(d) / math.sqrt(d)
  offset = np.asarray(offset, dtype=np.float64)

  def Shard(stream, count):
    z = SphereBatch(stream, count, d)
    moved = offset + mu * z
    still = np.tile(offset, (count, 1))
    gaps = 0.5 * curvature * np.einsum('ij,ij->i', moved, moved) - \
        0.5 * curvature * np.einsum('ij,ij->i', still, still)
    return np.array([gaps.sum(), np.dot(gaps, gaps)])
  sums = _MonteCarlo(seed, n, common_defs.MONTE_CARLO_SHARD, Shard, threads)
  estimate = sums[0] / n
  variance = max(0.0, sums[1] / n - estimate * estimate)
  analytic = 0.5 * curvature * mu * mu
  return estimate, abs(estimate - analytic), math.sqrt(variance / n)


def McUnbiasedness(d, n, gradient, seed, threads=1):
  """Relative L2 error of (1/N) sum_r d <g, z_r> z_r against g."""
  gradient = np.asarray(gradient, dtype=np.float64)

  def Shard(stream, count):
    z = SphereBatch(stream, count, d)
    return (d * z.dot(gradient)).dot(z)
  estimate = _MonteCarlo(seed, n, common_defs.MONTE_CARLO_SHARD, Shard,
      threads) / n
  return float(np.linalg.norm(estimate - gradient) / np.linalg.norm(gradient))


### Convergence on quadratics

def _MeanTrace(config, seeds, measure, threads=1):
  total = None
  steps = None
  for seed in seeds:
    run_config = config.Copy(seed=int(seed))
    engine = federation.Cyber0Engine(run_config, threads=threads,
        run_name='rate-seed-%i' % seed)
    model = engine.GetProblem().model
    history = engine.Run()
    values = np.array([measure(model, h.train_loss) for h in history])
    if total is None:
      total = values
      steps = np.array([h.step for h in history], dtype=np.float64)
    else:
      total = total + values
  return steps, total / len(seeds)


def DistanceTrace(config, seeds, threads=1):
  """Mean ||w_t - w*|| per logged step over runs with root seeds `seeds`.

  Needs a quadratic, whose loss gives the distance.  Returns (steps, mean
  distances).
  """
  return _MeanTrace(config, seeds,
      lambda model, loss: model.DistanceFromLoss(loss), threads)


def GapTrace(config, seeds, threads=1):
  """Mean F(w_t) - F(w*) per logged step; works for the skewed loss too."""
  def Gap(model, loss):
    return loss - model.Eval(model.GetOptimum())
  return _MeanTrace(config, seeds, Gap, threads)


def FitRate(steps, distances):
  """Per-step geometric rate fitted to log(distance) by least squares.

  Points at zero distance are left out; a trace that reaches zero before two
  positive points exist has rate 0.
  """
  positive = distances > 0
  if positive.sum() < 2:
    return 0.0
  slope = np.polyfit(steps[positive], np.log(distances[positive]), 1)[0]
  return float(math.exp(slope))


def ContractionRate(config, seeds, threads=1):
  """Fitted per-step contraction of the seed-averaged distance to w*."""
  steps, distances = DistanceTrace(config, seeds, threads)
  return FitRate(steps, distances)


def ErrorFloor(config, seeds, tail=0.2, threads=1):
  """sqrt(2 (F(w) - F(w*)) / lambda) over the last `tail` of logged steps.

  On the quadratic this is the root-mean-square distance to w*; on the skewed
  loss it agrees with the distance to second order.
  """
  _, gaps = GapTrace(config, seeds, threads)
  count = max(1, int(len(gaps) * tail))
  gap = max(0.0, float(np.mean(gaps[-count:])))
  return math.sqrt(2.0 * gap / config.quad_lambda)


def TheoryConfig(profile, d, k, mu=0.0, **overrides):
  """A quadratic profile set up with the step size of TheoryParams."""
  base = config_lib.Load(profile)
  params = TheoryParams(base.quad_lambda, base.quad_lambda, d, k,
      mu_positive=mu > 0)
  return base.Copy(quad_dim=d, k=k, mu=mu, mu_zero=not mu > 0,
      eta=params.eta, direction_mode=DirectionMode.SPHERE,
      **overrides).Validate(), params


### Suites

def LemmaChecks(seed=0, threads=1):
  reports = []

  d, n = 10, 1000000
  deviation, moment = McIsotropy(d, n, seed, threads)
  reports.append(CheckReport('isotropy d=10', deviation, 0.0, 0.002,
      deviation < 0.002, 'N=%i' % n))
  diagonal = float(np.mean(np.diag(moment)))
  reports.append(CheckReport('isotropy diagonal d=10', diagonal, 1.0 / d,
      0.01 / d, abs(diagonal - 1.0 / d) <= 0.01 / d, 'N=%i' % n))

  x = np.ones(8)
  for k, n, rel_tol in ((1, 200000, 0.03), (512, 200000, 0.02)):
    ratio, stderr = McNormFactor(8, k, n, x, seed, threads)
    target = (8.0 + k - 1) / k
    reports.append(CheckReport('norm factor d=8 k=%i' % k, ratio, target,
        rel_tol * target, abs(ratio - target) <= rel_tol * target,
        '3se=%.3g' % (3 * stderr)))

  d, n = 16, 1000000
  x = _ShardStream(seed, -1).Normal(d)
  estimate, bound = McCrossAbsBound(d, n, x, seed, threads)
  reports.append(CheckReport('cross bound d=16', estimate, bound, 0.1 * bound,
      estimate <= 0.9 * bound, 'needs estimate <= 0.9 bound'))

  curvature, mu, n = 1.0, 0.1, 100000
  estimate, deviation, stderr = SmoothedGapQuadratic(curvature, mu, 10, n,
      seed, threads=threads)
  target = 0.5 * curvature * mu * mu
  reports.append(CheckReport('smoothed gap mu=0.1', estimate, target,
      0.05 * target, deviation <= 0.05 * target, '3se=%.3g' % (3 * stderr)))

  d, n = 10, 100000
  gradient = _ShardStream(seed, -2).Normal(d)
  error = McUnbiasedness(d, n, gradient, seed, threads)
  reports.append(CheckReport('unbiasedness d=10', error, 0.0, 0.03,
      error < 0.03, 'relative L2 error'))
  return reports


def RateChecks(seed=0, threads=1, num_seeds=20):
  """Fitted mu = 0 contraction against the rate bound, plus its wall time."""
  reports = []
  seeds = [seed + i for i in range(num_seeds)]
  start = time.time()
  for d, k in ((1, 1), (16, 16)):
    config, params = TheoryConfig('quad_exact', d, k)
    rate = ContractionRate(config, seeds, threads)
    bound = params.RateBound()
    reports.append(CheckReport('mu=0 rate d=%i k=%i' % (d, k), rate, bound,
        0.02, rate <= bound + 0.02, 'tau=%.4g' % params.tau))
  elapsed = time.time() - start
  reports.append(CheckReport('mu=0 rate wall time', elapsed,
      RATE_CHECK_SECONDS, 0.0, elapsed < RATE_CHECK_SECONDS,
      '%i seeds' % num_seeds))
  return reports


def FloorChecks(seed=0, threads=1, num_seeds=FLOOR_SEEDS):
  """The mu > 0 error floor on the skewed loss shrinks with mu.

  Both floors must sit above FLOOR_RESOLUTION, so rounding noise alone
  cannot pass the check.
  """
  seeds = [seed + i for i in range(num_seeds)]
  floors = []
  for mu in (1e-3, 1e-4):
    config, _ = TheoryConfig('quad_finite_diff', 16, 16, mu)
    floors.append(ErrorFloor(config, seeds, threads=threads))
  ratio = floors[0] / floors[1] if floors[1] > 0 else float('inf')
  passed = ratio >= 5.0 and floors[1] > FLOOR_RESOLUTION
  return [CheckReport('mu>0 floor shrink', ratio, 5.0, 0.0, passed,
      'floors %.3g vs %.3g' % tuple(floors))]


def TheoremChecks(seed=0, threads=1):
  return RateChecks(seed, threads) + FloorChecks(seed, threads)


def RunSuite(name, seed=0, threads=1):
  if name not in Suite.NAMES:
    raise ValueError('Unknown suite %r; expected one of %s' % (name,
        ', '.join(Suite.NAMES)))
  reports = []
  if name in (Suite.LEMMAS, Suite.ALL):
    reports.extend(LemmaChecks(seed, threads))
  if name in (Suite.THEOREMS, Suite.ALL):
    reports.extend(TheoremChecks(seed, threads))
  for report in reports:
    LOGGER.info('%s' % report)
  return reports
