"""Builds the model, data and client shards an ExperimentConfig describes."""

import logging
import os

import numpy as np

from . import adversary
from . import common_defs
from . import core
from . import data
from . import errors
from . import losses
from .seedstream import InitPurpose
from .seedstream import RngStream
from .seedstream import SeedTuple
from .seedstream import StreamKind

LOGGER = logging.getLogger('problem')

_MNIST_CACHE = {}


class Problem(object):
  """Everything a round engine needs besides the config.

  `train`, `test` and `partition` are None for the data-free quadratic.
  `client_data` is the dataset each client samples from (label-flipped for
  flipping attackers).
  """

  def __init__(self, model, w0, train=None, test=None, partition=None,
      client_data=None):
    self.model = model
    self.w0 = w0
    self.train = train
    self.test = test
    self.partition = partition
    self.client_data = client_data

  def __str__(self):
    return '<Problem %s train=%s test=%s>' % (self.model, self.train, self.test)

  def GetDimension(self):
    return self.model.GetDimension()

  def TrainLoss(self, w):
    return self.model.Eval(w, self.train)

  def TestAccuracy(self, w):
    if self.test is None:
      return float('nan')
    return self.model.Accuracy(w, self.test)


def MnistDir(config):
  data_dir = config.data_dir or os.environ.get(common_defs.ENV_MNIST_DIR, '')
  if not data_dir:
    raise errors.ConfigError('dataset = mnist needs data_dir or $%s' %
        common_defs.ENV_MNIST_DIR)
  return data_dir


def LoadData(config):
  """Returns (train, test) for a logreg config."""
  if config.dataset == 'mnist':
    data_dir = os.path.abspath(MnistDir(config))
    if data_dir not in _MNIST_CACHE:
      _MNIST_CACHE[data_dir] = data.LoadMnist(data_dir)
    return _MNIST_CACHE[data_dir]
  train = data.SynthGenerate(config.data_seed, config.synth_n, config.synth_p,
      config.synth_classes, split=0)
  test = data.SynthGenerate(config.data_seed, config.synth_test_n,
      config.synth_p, config.synth_classes, split=1)
  return train, test


def InitialModel(config, d):
  if config.init_scale == 0:
    return core.Zeros(d)
  stream = RngStream.FromTuple(SeedTuple(config.data_seed, InitPurpose.MODEL,
      0, 0, StreamKind.INIT))
  return config.init_scale * stream.Normal(d)


def QuadraticOptimum(config):
  d = config.quad_dim
  if config.quad_optimum == 'zero':
    return core.Zeros(d)
  stream = RngStream.FromTuple(SeedTuple(config.data_seed, InitPurpose.OPTIMUM,
      0, 0, StreamKind.INIT))
  return stream.Normal(d)


def BuildProblem(config):
  if config.model == 'quadratic':
    if config.quad_skew > 0:
      model = losses.SkewedQuadraticModel(config.quad_lambda,
          QuadraticOptimum(config), config.quad_skew)
    else:
      model = losses.QuadraticModel(config.quad_lambda,
          QuadraticOptimum(config))
    return Problem(model, InitialModel(config, model.GetDimension()))

  train, test = LoadData(config)
  model = losses.LogisticRegressionModel(train.GetNumFeatures(),
      train.num_classes)
  if config.distribution == 'iid':
    partition = data.PartitionIid(train, config.num_clients, config.data_seed)
  else:
    partition = data.PartitionNonIid(train, config.num_clients,
        config.data_seed)
  LOGGER.debug('Partition: %s' % partition)

  client_data = [train] * config.num_clients
  attack = adversary.AttackSpec(config.attack, config.alpha, config.num_clients)
  if attack.FlipsLabels() and attack.byzantine_ids:
    flipped = adversary.LabelFlip(train)
    for client_id in attack.byzantine_ids:
      client_data[client_id] = flipped
  return Problem(model, InitialModel(config, model.GetDimension()), train, test,
      partition, client_data)
