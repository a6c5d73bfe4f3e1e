#!/usr/bin/env python

"""Downloads the four MNIST IDX files (gzipped) into --data_dir."""

import os

import gflags
import requests

from cyber0.sim import app
from cyber0.sim import common_defs

FLAGS = gflags.FLAGS

gflags.DEFINE_string('mnist_url', 'https://ossci-datasets.s3.amazonaws.com/mnist/',
    'Base URL of the gzipped MNIST files.')

gflags.DEFINE_string('data_dir', os.environ.get(common_defs.ENV_MNIST_DIR, 'mnist'),
    'Directory to store the files in.')

gflags.DEFINE_integer('timeout_seconds', 60,
    'Timeout of each download.',
    lower_bound=1)


class FetchMnistApp(app.App):
  def _MainLoop(self):
    os.makedirs(FLAGS.data_dir, exist_ok=True)
    for base in sorted(common_defs.MNIST_FILES.values()):
      name = base + '.gz'
      path = os.path.join(FLAGS.data_dir, name)
      if os.path.exists(path):
        self._logger.info('%s already present' % path)
        continue
      url = FLAGS.mnist_url.rstrip('/') + '/' + name
      self._logger.info('Fetching %s' % url)
      try:
        r = requests.get(url, timeout=FLAGS.timeout_seconds)
        r.raise_for_status()
      except requests.exceptions.RequestException as e:
        self._logger.error('Download failed: %s' % e)
        return common_defs.EXIT_CHECK_FAILED
      with open(path + '.part', 'wb') as f:
        f.write(r.content)
      os.rename(path + '.part', path)
    self._logger.info('MNIST is in %s; export %s=%s' % (FLAGS.data_dir,
        common_defs.ENV_MNIST_DIR, os.path.abspath(FLAGS.data_dir)))
    return common_defs.EXIT_OK


if __name__ == '__main__':
  FetchMnistApp.BuildAndRun()
