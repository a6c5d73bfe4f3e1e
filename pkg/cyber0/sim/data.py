"""Datasets: MNIST IDX ingestion, synthetic data and client partitioning."""

import gzip
import logging
import os
import struct

import numpy as np

from . import common_defs
from . import errors
from .seedstream import InitPurpose
from .seedstream import RngStream
from .seedstream import SeedTuple
from .seedstream import StreamKind

LOGGER = logging.getLogger('data')


class Dataset(object):
  """Feature rows in [0, 1] with integer class labels."""

  def __init__(self, features, labels, num_classes):
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2:
      raise errors.ShapeError('Features must be a matrix, got shape %s' % (
          features.shape,))
    if features.shape[0] != len(labels):
      raise errors.ShapeError('Row count mismatch: %i features vs %i labels' % (
          features.shape[0], len(labels)))
    if not np.all(np.isfinite(features)):
      raise errors.NonFiniteError('Dataset features must be finite')
    if len(labels) and (labels.min() < 0 or labels.max() >= num_classes):
      raise errors.LabelRangeError('Labels must lie in [0, %i)' % num_classes)
    self.features = features
    self.labels = labels
    self.num_classes = int(num_classes)

  def __str__(self):
    return '<Dataset rows=%i p=%i classes=%i>' % (len(self), self.GetNumFeatures(),
        self.num_classes)

  def __len__(self):
    return len(self.labels)

  def GetNumFeatures(self):
    return self.features.shape[1]

  def Subset(self, indices):
    return Dataset(self.features[indices], self.labels[indices], self.num_classes)

  def LabelHistogram(self):
    return np.bincount(self.labels, minlength=self.num_classes)


### IDX files

def _Open(path, mode='rb'):
  if path.endswith('.gz'):
    return gzip.open(path, mode)
  return open(path, mode)


def _ReadHeader(f, path, magic, num_dims):
  header = f.read(4 * (1 + num_dims))
  if len(header) < 4:
    raise errors.TruncatedPayloadError('%s: missing IDX header' % path)
  found = struct.unpack('>I', header[:4])[0]
  if found != magic:
    raise errors.BadMagicError('%s: bad magic 0x%08x (expected 0x%08x)' % (
        path, found, magic))
  if len(header) < 4 * (1 + num_dims):
    raise errors.TruncatedPayloadError('%s: truncated IDX header' % path)
  return struct.unpack('>%iI' % num_dims, header[4:])


def _ReadPayload(f, path, size):
  payload = f.read(size)
  if len(payload) < size:
    raise errors.TruncatedPayloadError('%s: expected %i payload bytes, found %i'
        % (path, size, len(payload)))
  return np.frombuffer(payload, dtype=np.uint8)


def LoadIdx(images_path, labels_path, num_classes=common_defs.MNIST_CLASSES):
  """Reads an IDX image/label file pair into a Dataset.

  Files ending in .gz are decompressed transparently.  Pixel bytes are
  divided by 255.
  """
  with _Open(images_path) as f:
    count, rows, cols = _ReadHeader(f, images_path,
        common_defs.IDX_IMAGES_MAGIC, 3)
    pixels = _ReadPayload(f, images_path, count * rows * cols)
  with _Open(labels_path) as f:
    (label_count,) = _ReadHeader(f, labels_path, common_defs.IDX_LABELS_MAGIC, 1)
    labels = _ReadPayload(f, labels_path, label_count)

  if count != label_count:
    raise errors.CountMismatchError('%s has %i images but %s has %i labels' % (
        images_path, count, labels_path, label_count))

  features = pixels.reshape(count, rows * cols) / common_defs.PIXEL_MAX
  LOGGER.info('Loaded %i rows of %i features from %s' % (count, rows * cols,
      images_path))
  return Dataset(features, labels.astype(np.int64), num_classes)


def WriteIdx(dataset, images_path, labels_path, shape=None):
  """Writes a Dataset as an IDX pair, quantizing features back to bytes."""
  count, p = dataset.features.shape
  if shape is None:
    side = int(round(p ** 0.5))
    shape = (side, p // side) if side * (p // side) == p else (1, p)
  pixels = np.rint(dataset.features * common_defs.PIXEL_MAX).astype(np.uint8)
  with _Open(images_path, 'wb') as f:
    f.write(struct.pack('>4I', common_defs.IDX_IMAGES_MAGIC, count, shape[0],
        shape[1]))
    f.write(pixels.tobytes())
  with _Open(labels_path, 'wb') as f:
    f.write(struct.pack('>2I', common_defs.IDX_LABELS_MAGIC, count))
    f.write(dataset.labels.astype(np.uint8).tobytes())


def _FindFile(data_dir, base):
  for name in (base, base + '.gz'):
    path = os.path.join(data_dir, name)
    if os.path.exists(path):
      return path
  raise IOError('No %s(.gz) under %s; run fetch_mnist.py first' % (base,
      data_dir))


def LoadMnist(data_dir):
  """Returns (train, test) Datasets from the standard MNIST file names."""
  names = common_defs.MNIST_FILES
  train = LoadIdx(_FindFile(data_dir, names['train_images']),
      _FindFile(data_dir, names['train_labels']))
  test = LoadIdx(_FindFile(data_dir, names['test_images']),
      _FindFile(data_dir, names['test_labels']))
  return train, test


### Synthetic data

def SynthGenerate(seed, n, p, num_classes, spread=0.05, split=0):
  """Class-conditional Gaussian blobs clipped to [0, 1].

  Centroids depend only on `seed`; `split` selects an independent draw of
  rows around the same centroids (0 for train, 1 for test).
  """
  if n < 1 or p < 1 or num_classes < 1:
    raise ValueError('n, p and num_classes must be positive')
  centroid_stream = RngStream.FromTuple(SeedTuple(seed, InitPurpose.SYNTHETIC,
      0, 0, StreamKind.INIT))
  centroids = centroid_stream.Uniform(num_classes * p).reshape(num_classes, p)

  rows = RngStream.FromTuple(SeedTuple(seed, InitPurpose.SYNTHETIC, 1 + split,
      0, StreamKind.INIT))
  labels = (np.arange(n) % num_classes)[rows.Permutation(n)]
  noise = rows.Normal(n * p).reshape(n, p)
  features = np.clip(centroids[labels] + spread * noise, 0.0, 1.0)
  return Dataset(features, labels, num_classes)


### Partitions

class Partition(object):
  """Disjoint shards of row indices, one per client."""

  def __init__(self, shards):
    self.shards = [np.asarray(s, dtype=np.int64) for s in shards]

  def __str__(self):
    return '<Partition clients=%i sizes=%s>' % (len(self.shards),
        [len(s) for s in self.shards])

  def __len__(self):
    return len(self.shards)

  def GetShard(self, client_id):
    return self.shards[client_id]

  def IsDisjoint(self):
    joined = np.concatenate(self.shards) if self.shards else np.empty(0)
    return len(np.unique(joined)) == len(joined)


def PartitionIid(dataset, m, seed):
  """Seeded shuffle, grouped by label, then dealt round-robin.

  Shard sizes differ by at most one, and so do any two clients' counts of
  each label.
  """
  n = len(dataset)
  if m < 1 or m > n:
    raise ValueError('Cannot split %i rows across %i clients' % (n, m))
  stream = RngStream.FromTuple(SeedTuple(seed, InitPurpose.PARTITION_IID, 0, 0,
      StreamKind.INIT))
  order = stream.Permutation(n)
  order = order[np.argsort(dataset.labels[order], kind='stable')]
  return Partition([np.sort(order[i::m]) for i in range(m)])


def LabelOwners(m, num_classes):
  """Maps each label to the clients that hold it.

  With m >= C, client i holds label i mod C; with fewer clients, client i
  holds every label l with l mod m == i.
  """
  owners = {}
  for label in range(num_classes):
    if m >= num_classes:
      owners[label] = [i for i in range(m) if i % num_classes == label]
    else:
      owners[label] = [label % m]
  return owners


def PartitionNonIid(dataset, m, seed):
  """Gives each client a restricted label set; rows split evenly per label."""
  if m < 1 or m > len(dataset):
    raise ValueError('Cannot split %i rows across %i clients' % (len(dataset), m))
  stream = RngStream.FromTuple(SeedTuple(seed, InitPurpose.PARTITION_NONIID, 0,
      0, StreamKind.INIT))
  order = stream.Permutation(len(dataset))
  shuffled_labels = dataset.labels[order]

  parts = [[] for _ in range(m)]
  for label, clients in sorted(LabelOwners(m, dataset.num_classes).items()):
    rows = order[shuffled_labels == label]
    for client, piece in zip(clients, np.array_split(rows, len(clients))):
      parts[client].append(piece)
  shards = [np.sort(np.concatenate(p)) if p else np.empty(0, dtype=np.int64)
      for p in parts]
  return Partition(shards)


class BatchSampler(object):
  """Draws a client's batches as a pure function of the sample position.

  The client's sample sequence is its shard, re-permuted on every pass with
  a DATA_SHUFFLE stream keyed by (data seed, pass, client).  Batches never
  repeat a row until the pass is exhausted.
  """

  def __init__(self, dataset, shard, client_id, batch_size, data_seed):
    if len(shard) == 0:
      raise ValueError('Client %i holds no rows' % client_id)
    self._dataset = dataset
    self._shard = shard
    self._client_id = client_id
    self._batch_size = int(batch_size)
    self._data_seed = data_seed
    self._cached_pass = None
    self._cached_order = None

  def _PassOrder(self, pass_index):
    if pass_index != self._cached_pass:
      stream = RngStream.FromTuple(SeedTuple(self._data_seed, pass_index,
          self._client_id, 0, StreamKind.DATA_SHUFFLE))
      self._cached_order = self._shard[stream.Permutation(len(self._shard))]
      self._cached_pass = pass_index
    return self._cached_order

  def GetShardData(self):
    return self._dataset.Subset(self._shard)

  def Batch(self, batch_index):
    """Returns the `batch_index`-th batch of this client."""
    n = len(self._shard)
    start = batch_index * self._batch_size
    end = start + self._batch_size
    pieces = []
    position = start
    while position < end:
      pass_index = position // n
      lo = position - pass_index * n
      hi = min(n, lo + (end - position))
      pieces.append(self._PassOrder(pass_index)[lo:hi])
      position += hi - lo
    return self._dataset.Subset(np.concatenate(pieces))
