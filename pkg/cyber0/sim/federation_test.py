"""Unittest for federation module"""

import math
import os
import shutil
import tempfile
import unittest

import numpy as np

from . import common_defs
from . import core
from . import data
from . import errors
from . import federation
from . import losses
from . import manager
from . import problem as problem_lib
from . import zo
from .config import ExperimentConfig


def _SynthConfig(**overrides):
  base = ExperimentConfig(dataset='synthetic', synth_n=240, synth_test_n=60,
      synth_p=4, synth_classes=3, num_clients=4, k=4, steps=6, batch_size=8,
      eval_every=2, eta=0.1)
  return base.Copy(**overrides)


def _Rows(history):
  return [manager.FormatRow(ev) for ev in history]


class CommCostTestCase(unittest.TestCase):
  def testMnistCounts(self):
    d = common_defs.MNIST_DIMENSION
    cyber0 = ExperimentConfig(k=64)
    fedavg = ExperimentConfig(engine='fedavg')
    self.assertEqual((25600, 1 + d + 25600), federation.CommCost(cyber0, 400, d))
    self.assertEqual((3140000, d + 3140000), federation.CommCost(fedavg, 400, d))
    ratio = 3140000 / 25600.0
    self.assertAlmostEqual(122.66, ratio, places=2)

  def testModelBroadcast(self):
    c = ExperimentConfig(k=8, broadcast='model')
    self.assertEqual((80, 1 + 50 + 500), federation.CommCost(c, 10, 50))

  def testLocalEpochs(self):
    c = ExperimentConfig(k=8, local_epochs=3)
    self.assertEqual((240, 1 + 50 + 240), federation.CommCost(c, 10, 50))

  def testStepZero(self):
    self.assertEqual((0, 51), federation.CommCost(ExperimentConfig(), 0, 50))


class ClientTestCase(unittest.TestCase):
  def setUp(self):
    self.config = _SynthConfig()
    self.problem = problem_lib.BuildProblem(self.config)

  def _Client(self, client_id=0, **kwargs):
    return federation.Client(client_id, self.problem.model, self.problem.w0,
        self.problem.client_data[client_id],
        self.problem.partition.GetShard(client_id), 8, 0, **kwargs)

  def testBatchPosition(self):
    client = self._Client()
    sampler = data.BatchSampler(self.problem.train,
        self.problem.partition.GetShard(0), 0, 8, 0)
    self.assertTrue(np.array_equal(sampler.Batch(7).labels,
        client.Batch(2, 1, 3).labels))
    self.assertTrue(np.array_equal(sampler.Batch(2).features,
        client.Batch(2).features))

  def testFullLocalData(self):
    client = self._Client(full_local_data=True)
    self.assertEqual(len(self.problem.partition.GetShard(0)),
        len(client.Batch(5)))

  def testLocalEpochsResetReplica(self):
    client = self._Client()
    cfg = zo.ZoConfig(1e-3, 4)
    before = client.w.copy()
    report = client.ComputeReport(0, cfg, 3, 0.1, local_epochs=3)
    self.assertEqual(12, len(report))
    self.assertTrue(np.array_equal(before, client.w))
    single = self._Client().ComputeReport(0, cfg, 3, 0.1)
    self.assertTrue(np.array_equal(single.coefficients,
        report.coefficients[:4]))
    self.assertFalse(np.array_equal(report.coefficients[:4],
        report.coefficients[4:8]))


class Cyber0EngineTestCase(unittest.TestCase):
  def testDeterministic(self):
    config = _SynthConfig()
    first = _Rows(federation.RunCyber0(config))
    second = _Rows(federation.RunCyber0(config))
    self.assertEqual(first, second)
    self.assertEqual(['0', '2', '4', '6'], [row[0] for row in first])

  def testThreadsDoNotChangeResults(self):
    config = _SynthConfig(attack='random_choice', alpha=0.25)
    self.assertEqual(_Rows(federation.RunCyber0(config)),
        _Rows(federation.RunCyber0(config, threads=4)))

  def testDirectionCacheDoesNotChangeResults(self):
    for mode in ('gaussian', 'sphere'):
      config = _SynthConfig(direction_mode=mode, local_epochs=2)
      cached = federation.Cyber0Engine(config)
      streamed = federation.Cyber0Engine(config.Copy(cache_directions=False))
      cached.Run()
      streamed.Run()
      self.assertTrue(np.array_equal(cached.GetState().w,
          streamed.GetState().w))

  def testSeedChangesTrajectory(self):
    a = federation.Cyber0Engine(_SynthConfig())
    b = federation.Cyber0Engine(_SynthConfig(seed=1))
    a.Run()
    b.Run()
    self.assertFalse(np.array_equal(a.GetState().w, b.GetState().w))

  def testReplicasFollowFederator(self):
    for broadcast in ('coefficients', 'model'):
      engine = federation.Cyber0Engine(_SynthConfig(check_replicas=True,
          broadcast=broadcast, local_epochs=2, attack='full_knowledge',
          alpha=0.25))
      history = engine.Run()
      self.assertEqual(6, engine.GetState().GetStep())
      for client in engine.GetClients():
        self.assertTrue(np.array_equal(engine.GetState().w, client.w))
      self.assertEqual(6 * 2 * 4, history[-1].uplink_scalars)

  def testReplicaMismatchDetected(self):
    engine = federation.Cyber0Engine(_SynthConfig(check_replicas=True))
    engine._Step(0)
    engine._CheckState(0)
    engine.GetClients()[2].w[0] += 1.0
    self.assertRaises(errors.ReplicaMismatchError, engine._CheckState, 0)

  def testLocalEpochEntryPoint(self):
    config = _SynthConfig()
    self.assertEqual(_Rows(federation.RunCyber0(config)),
        _Rows(federation.RunCyber0LocalEpochs(config)))
    self.assertNotEqual(_Rows(federation.RunCyber0(config)),
        _Rows(federation.RunCyber0LocalEpochs(config.Copy(local_epochs=2))))

  def testLossDecreases(self):
    config = _SynthConfig(steps=40, eval_every=10, eta=0.2)
    history = federation.RunCyber0(config)
    self.assertAlmostEqual(math.log(3), history[0].train_loss, places=12)
    self.assertLess(history[-1].train_loss, history[0].train_loss)
    self.assertFalse(math.isnan(history[-1].test_acc))

  def testByzantineClientsDoNotCompute(self):
    engine = federation.Cyber0Engine(_SynthConfig(attack='always_large',
        alpha=0.25))
    engine.Run()
    self.assertEqual(frozenset([3]), engine._attack.byzantine_ids)
    self.assertTrue(np.all(np.isfinite(engine.GetState().w)))

  def testLabelFlippingPoisonsShards(self):
    engine = federation.Cyber0Engine(_SynthConfig(attack='label_flipping',
        alpha=0.25))
    problem = engine.GetProblem()
    self.assertIs(problem.train, problem.client_data[0])
    self.assertTrue(np.array_equal(2 - problem.train.labels,
        problem.client_data[3].labels))

  def testQuadraticMuZero(self):
    config = ExperimentConfig(model='quadratic', quad_dim=4, num_clients=1,
        beta=0.0, mu=0.0, mu_zero=True, k=4, direction_mode='sphere',
        eta=4.0 / 7.0, steps=20, eval_every=5)
    history = federation.RunCyber0(config)
    self.assertTrue(math.isnan(history[0].test_acc))
    self.assertLess(history[-1].train_loss, 1e-3 * history[0].train_loss)

  def testSkewedQuadratic(self):
    config = ExperimentConfig(model='quadratic', quad_dim=4, quad_skew=0.5,
        num_clients=1, beta=0.0, mu=1e-3, k=4, direction_mode='sphere',
        eta=0.1, steps=60, eval_every=10)
    model = problem_lib.BuildProblem(config).model
    self.assertIsInstance(model, losses.SkewedQuadraticModel)
    self.assertEqual(0.5, model.GetSkew())
    history = federation.RunCyber0(config)
    self.assertLess(history[-1].train_loss, 0.25 * history[0].train_loss)
    plain = problem_lib.BuildProblem(config.Copy(quad_skew=0.0)).model
    self.assertNotIsInstance(plain, losses.SkewedQuadraticModel)

  def testProjection(self):
    config = ExperimentConfig(model='quadratic', quad_dim=16, num_clients=3,
        beta=0.0, k=4, eta=0.1, steps=10, project_radius=0.5)
    engine = federation.Cyber0Engine(config)
    self.assertGreater(np.linalg.norm(engine.GetProblem().model.GetOptimum()),
        0.5)
    engine.Run()
    limit = 0.5 * (1 + core.BALL_SLACK)
    self.assertLessEqual(np.linalg.norm(engine.GetState().w), limit)
    for client in engine.GetClients():
      self.assertTrue(np.array_equal(engine.GetState().w, client.w))

  def testDivergence(self):
    config = ExperimentConfig(model='quadratic', quad_dim=4, num_clients=1,
        beta=0.0, k=2, eta=1e200, steps=50)
    with self.assertRaises(errors.DivergenceError) as cm:
      with np.errstate(all='ignore'):
        federation.RunCyber0(config)
    self.assertIsNotNone(cm.exception.step)


class FirstOrderEngineTestCase(unittest.TestCase):
  def testCoordwiseWithoutTrimmingIsFedAvg(self):
    config = _SynthConfig(beta=0.0)
    self.assertEqual(_Rows(federation.RunFedAvg(config)),
        _Rows(federation.RunCoordwiseTm(config)))

  def testFedAvgSingleClientIsSgd(self):
    config = _SynthConfig(engine='fedavg', num_clients=1, beta=0.0)
    engine = federation.FedAvgEngine(config)
    problem = engine.GetProblem()
    sampler = data.BatchSampler(problem.train, problem.partition.GetShard(0), 0,
        config.batch_size, config.data_seed)
    w = problem.w0.copy()
    for step in range(config.steps):
      grad = problem.model.Grad(w, sampler.Batch(step))
      w = w + (-config.eta) * grad
    engine.Run()
    self.assertTrue(np.array_equal(w, engine.GetState().w))

  def testCommunication(self):
    history = federation.RunFedAvg(_SynthConfig())
    d = (4 + 1) * 3
    self.assertEqual(6 * d, history[-1].uplink_scalars)
    self.assertEqual(d + 6 * d, history[-1].downlink_scalars)

  def testRejectsForgingAttacks(self):
    self.assertRaises(errors.ConfigError, federation.RunFedAvg,
        _SynthConfig(attack='full_knowledge', alpha=0.25))


class RunExperimentTestCase(unittest.TestCase):
  def setUp(self):
    self.tmpdir = tempfile.mkdtemp()

  def tearDown(self):
    shutil.rmtree(self.tmpdir)

  def testCsvLog(self):
    env = federation.SimEnv()
    path = os.path.join(self.tmpdir, common_defs.LOG_CSV_NAME)
    env.AddCsvLog(path)
    history = federation.RunExperiment(_SynthConfig(engine='coordwise_tm'),
        env, run_name='tm')
    env.DetachCsvLogs()
    with open(path) as f:
      lines = f.read().splitlines()
    self.assertEqual(','.join(common_defs.LOG_COLUMNS), lines[0])
    self.assertEqual([','.join(row) for row in _Rows(history)], lines[1:])
    self.assertIs(history[-1], env.GetHistoryManager().GetFinal())


if __name__ == '__main__':
  unittest.main()
