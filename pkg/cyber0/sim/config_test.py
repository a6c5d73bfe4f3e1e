"""Unittest for config module"""

import os
import shutil
import tempfile
import unittest

from . import config
from . import errors
from .config import ExperimentConfig


class ExperimentConfigTestCase(unittest.TestCase):
  def testDefaults(self):
    c = ExperimentConfig()
    self.assertEqual('cyber0', c.engine)
    self.assertEqual(12, c.num_clients)
    self.assertEqual(64, c.k)
    self.assertEqual(1e-3, c.mu)
    self.assertEqual(0.25, c.beta)
    self.assertEqual(400, c.steps)
    self.assertEqual(1, c.local_epochs)
    self.assertFalse(c.mu_zero)
    self.assertTrue(c.cache_directions)
    self.assertEqual(0, c.NumByzantine())

  def testFieldOrder(self):
    names = list(ExperimentConfig.fields)
    self.assertEqual(['engine', 'model', 'dataset', 'data_dir'], names[:4])
    self.assertEqual('cache_directions', names[-1])

  def testSet(self):
    c = ExperimentConfig(k=8)
    self.assertEqual(8, c.k)
    c.mu = 1
    self.assertEqual(1.0, c.mu)
    self.assertIsInstance(c.mu, float)
    self.assertRaises(errors.ConfigError, c.Set, 'k', 'four')
    self.assertRaises(errors.ConfigError, c.Set, 'k', 0)
    self.assertRaises(errors.ConfigError, c.Set, 'k', True)
    self.assertRaises(errors.ConfigError, c.Set, 'alpha', 0.5)
    self.assertRaises(errors.ConfigError, c.Set, 'eta', float('inf'))
    self.assertRaises(errors.ConfigError, c.Set, 'attack', 'sybil')
    self.assertRaises(errors.ConfigError, c.Set, 'bogus', 1)
    self.assertRaises(AttributeError, getattr, c, 'bogus')

  def testNumByzantine(self):
    c = ExperimentConfig(attack='full_knowledge', alpha=0.25, num_clients=12)
    self.assertEqual(3, c.NumByzantine())
    c.attack = 'none'
    self.assertEqual(0, c.NumByzantine())

  def testCopy(self):
    c = ExperimentConfig()
    d = c.Copy(k=4, steps=3)
    self.assertEqual(64, c.k)
    self.assertEqual(4, d.k)
    self.assertNotEqual(c, d)
    self.assertEqual(c, c.Copy())

  def testValidate(self):
    c = ExperimentConfig()
    self.assertIs(c, c.Validate())
    self.assertRaises(errors.ConfigError, c.Copy(mu=0.0).Validate)
    self.assertRaises(errors.ConfigError, c.Copy(mu_zero=True).Validate)
    c.Copy(mu=0.0, mu_zero=True).Validate()
    self.assertRaises(errors.ConfigError, c.Copy(engine='fedavg',
        attack='always_large', alpha=0.25).Validate)
    c.Copy(engine='fedavg', attack='label_flipping', alpha=0.25).Validate()
    self.assertRaises(errors.ConfigError, c.Copy(engine='coordwise_tm',
        local_epochs=2).Validate)
    self.assertRaises(errors.ConfigError, c.Copy(model='quadratic',
        attack='label_flipping').Validate)


class ParseTestCase(unittest.TestCase):
  def assertParseError(self, text, line, column):
    with self.assertRaises(errors.ConfigError) as cm:
      config.Parse(text)
    self.assertEqual(line, cm.exception.line)
    self.assertEqual(column, cm.exception.column)
    self.assertTrue(str(cm.exception).startswith('line %i, column %i: ' % (
        line, column)))

  def testParse(self):
    c = config.Parse('# comment\n\nk = 8   # trailing\nattack=always_small\n'
        'mu_zero = false\neta = 0.5\n')
    self.assertEqual(8, c.k)
    self.assertEqual('always_small', c.attack)
    self.assertEqual(0.5, c.eta)
    self.assertEqual(ExperimentConfig().Copy(k=8, attack='always_small',
        eta=0.5), c)

  def testParseOnBase(self):
    base = ExperimentConfig(steps=7)
    c = config.Parse('k = 2\n', base=base)
    self.assertEqual(7, c.steps)
    self.assertEqual(2, c.k)
    self.assertEqual(64, base.k)

  def testErrorPositions(self):
    self.assertParseError('k = four\n', 1, 5)
    self.assertParseError('k = 4\n  bogus = 1\n', 2, 3)
    self.assertParseError('k = 4\nsteps\n', 2, 1)
    self.assertParseError('k = 4\n\nk = 5\n', 3, 1)
    self.assertParseError('alpha = 0.75\n', 1, 9)
    self.assertParseError('mu_zero = maybe\n', 1, 11)
    self.assertParseError('k =\n', 1, 4)

  def testEmptyString(self):
    c = config.Parse('data_dir =\n')
    self.assertEqual('', c.data_dir)

  def testDumpRoundTrip(self):
    c = ExperimentConfig(engine='coordwise_tm', eta=16.0 / 31.0, mu=0.0,
        mu_zero=True, data_dir='/tmp/mnist', attack='label_flipping',
        alpha=0.17, seed=2 ** 40)
    self.assertEqual(c, config.Parse(c.Dump()))
    self.assertIn('eta = %r\n' % (16.0 / 31.0), c.Dump())
    self.assertIn('mu_zero = true\n', c.Dump())

  def testHashInsideValue(self):
    c = config.Parse('data_dir = /data/run#3\nk = 4 #trailing\n#k = 9\n')
    self.assertEqual('/data/run#3', c.data_dir)
    self.assertEqual(4, c.k)
    self.assertEqual(c, config.Parse(c.Dump()))


class ProfileTestCase(unittest.TestCase):
  def setUp(self):
    self.tmpdir = tempfile.mkdtemp()

  def tearDown(self):
    shutil.rmtree(self.tmpdir)

  def testAllProfilesLoad(self):
    names = config.ListProfiles()
    for name in ('mnist_k64', 'mnist_fedavg', 'mnist_coordwise_tm',
        'mnist_40_clients', 'quad_exact', 'quad_finite_diff', 'synth_smoke'):
      self.assertIn(name, names)
    for name in names:
      self.assertIsInstance(config.Load(name), ExperimentConfig)

  def testProfileValues(self):
    exact = config.Load('quad_exact')
    self.assertEqual('quadratic', exact.model)
    self.assertTrue(exact.mu_zero)
    self.assertAlmostEqual(16.0 / 31.0, exact.eta)
    finite_diff = config.Load('quad_finite_diff')
    self.assertAlmostEqual(8.0 / 107.0, finite_diff.eta)
    forty = config.Load('mnist_40_clients')
    self.assertEqual(40, forty.num_clients)
    self.assertEqual(5, forty.NumByzantine())

  def testLoadPath(self):
    path = os.path.join(self.tmpdir, 'run.cfg')
    with open(path, 'w') as f:
      f.write('model = quadratic\nsteps = 5\n')
    c = config.Load(path)
    self.assertEqual('quadratic', c.model)
    self.assertEqual(5, c.steps)

  def testLoadMissing(self):
    self.assertRaises(errors.ConfigError, config.Load,
        os.path.join(self.tmpdir, 'nothing'))

  def testLoadAlias(self):
    self.assertEqual(config.Load('mnist_k64'), config.Load('mnist_fig1b_k64'))
    self.assertEqual(config.Load('quad_exact'), config.Load('quad_thm2'))
    for alias, name in config.PROFILE_ALIASES.items():
      self.assertIn(name, config.ListProfiles())
      self.assertNotIn(alias, config.ListProfiles())

  def testLoadValidates(self):
    path = os.path.join(self.tmpdir, 'bad.cfg')
    with open(path, 'w') as f:
      f.write('mu = 0.0\n')
    self.assertRaises(errors.ConfigError, config.Load, path)


if __name__ == '__main__':
  unittest.main()
