"""Round engines: CyBeR-0 and the first-order baselines.

Every engine runs the same loop.  Clients compute their uploads (in
parallel), the adversary forges the Byzantine uploads, the federator
aggregates and updates its model, and every client replica applies the same
update.  Round metrics are published as RoundLog events on the SimEnv's
EventHub.
"""

from concurrent import futures
import logging
import math
import time

import numpy as np

from . import adversary
from . import core
from . import data
from . import errors
from . import manager
from . import problem as problem_lib
from . import robust
from . import simevent
from . import zo
from .config import Engine
from .seedstream import DirectionCache
from .seedstream import DirectionSeed


class SimEnv(object):
  """Wraps the context of a simulation: the event hub and its managers."""

  def __init__(self, debug_events=False):
    self._event_hub = simevent.EventHub(debug=debug_events)
    self._logger = logging.getLogger('env')
    self._history_manager = manager.HistoryManager(self._event_hub).Attach()
    self._progress_manager = manager.ProgressManager(self._event_hub).Attach()
    self._csv_managers = []

  def GetEventHub(self):
    return self._event_hub

  def GetHistoryManager(self):
    return self._history_manager

  def AddCsvLog(self, path, log_wall_time=False):
    mgr = manager.CsvLogManager(self._event_hub, path, log_wall_time).Attach()
    self._csv_managers.append(mgr)
    return mgr

  def DetachCsvLogs(self):
    for mgr in self._csv_managers:
      mgr.Close()
      for event_type, methods in mgr.GetEventHandlers().items():
        for method in methods:
          self._event_hub.Unsubscribe(event_type, method)
    self._csv_managers = []


def CommCost(config, t, d):
  """Cumulative (uplink, downlink) scalars per client after t steps.

  CyBeR-0 uploads E*k coefficients per step.  Downlink counts the seed and
  the initial model once, then either the E*k aggregated coefficients or
  the full model per step.  The baselines upload and download d scalars per
  step, plus the initial model.
  """
  if config.engine in Engine.BASELINES:
    return t * d, d + t * d
  per_step = config.local_epochs * config.k
  uplink = t * per_step
  if config.broadcast == 'model':
    return uplink, 1 + d + t * d
  return uplink, 1 + d + t * per_step


class Client(object):
  """One simulated participant with its own model replica."""

  def __init__(self, client_id, model, w0, dataset=None, shard=None,
      batch_size=64, data_seed=0, full_local_data=False):
    self.client_id = client_id
    self.w = w0.copy()
    self._model = model
    self._sampler = None
    self._local_data = None
    if dataset is not None:
      self._sampler = data.BatchSampler(dataset, shard, client_id, batch_size,
          data_seed)
      if full_local_data:
        self._local_data = self._sampler.GetShardData()
    self._logger = logging.getLogger('client-%i' % client_id)

  def __str__(self):
    return '<Client %i>' % self.client_id

  def Batch(self, step, epoch=0, local_epochs=1):
    if self._sampler is None:
      return None
    if self._local_data is not None:
      return self._local_data
    return self._sampler.Batch(step * local_epochs + epoch)

  def _Coefficients(self, step, epoch, batch, cfg, root_seed, cache):
    grad = None
    if cfg.mu_zero:
      grad = self._model.Grad(self.w, batch)
    coefficients = np.empty(cfg.k, dtype=np.float64)
    for r in range(cfg.k):
      seed = DirectionSeed(root_seed, step, r, epoch)
      direction = cache.Get(step, r, epoch) if cache is not None else None
      try:
        if cfg.mu_zero:
          value = zo.ZoCoefficientMu0(self._model, self.w, batch, cfg, seed,
              grad=grad, direction=direction)
        else:
          value = zo.ZoCoefficient(self._model, self.w, batch, cfg, seed,
              direction=direction)
      except errors.DivergenceError as e:
        raise errors.DivergenceError(str(e), step, r, self.client_id)
      if not math.isfinite(value):
        raise errors.DivergenceError('Non-finite coefficient %r' % value, step,
            r, self.client_id)
      coefficients[r] = value
    return coefficients

  def ComputeReport(self, step, cfg, root_seed, eta, local_epochs=1,
      cache=None):
    """Returns this step's ClientReport of local_epochs * k coefficients.

    With several local epochs the client updates its replica with its own
    coefficients between epochs, then resets it to the start-of-step model.
    """
    snapshot = self.w.copy() if local_epochs > 1 else None
    parts = []
    try:
      for epoch in range(local_epochs):
        batch = self.Batch(step, epoch, local_epochs)
        coefficients = self._Coefficients(step, epoch, batch, cfg, root_seed,
            cache)
        parts.append(coefficients)
        if epoch < local_epochs - 1:
          zo.ApplyUpdate(self.w, coefficients, step, epoch, eta, cfg,
              root_seed, cache)
    finally:
      if snapshot is not None:
        np.copyto(self.w, snapshot)
    return zo.ClientReport(self.client_id, np.concatenate(parts))

  def ComputeGradient(self, step):
    grad = self._model.Grad(self.w, self.Batch(step))
    if not np.all(np.isfinite(grad)):
      raise errors.DivergenceError('Non-finite gradient', step, None,
          self.client_id)
    return grad


def ApplyAggregate(w, aggregate, step, cfg, eta, root_seed, local_epochs=1,
    cache=None):
  """Replays the aggregated coefficients of every local epoch, in order."""
  for epoch in range(local_epochs):
    zo.ApplyUpdate(w, aggregate[epoch * cfg.k:(epoch + 1) * cfg.k], step,
        epoch, eta, cfg, root_seed, cache)


class RoundEngine(object):
  """Shared run loop.  Subclasses implement _Step."""

  NAME = None

  def __init__(self, config, env=None, threads=1, problem=None,
      run_name=None):
    self._config = config.Validate()
    self._env = env or SimEnv()
    self._threads = max(1, int(threads))
    self._run_name = run_name or self.NAME
    self._logger = logging.getLogger('%s-engine' % self.NAME)
    self._problem = problem or problem_lib.BuildProblem(config)
    self._attack = adversary.AttackSpec(config.attack, config.alpha,
        config.num_clients)
    self._state = core.ModelState(self._problem.w0.copy())
    self._clients = self._BuildClients()
    self._pool = None

  def _BuildClients(self):
    problem = self._problem
    clients = []
    for client_id in range(self._config.num_clients):
      dataset = shard = None
      if problem.partition is not None:
        dataset = problem.client_data[client_id]
        shard = problem.partition.GetShard(client_id)
      clients.append(Client(client_id, problem.model, problem.w0, dataset,
          shard, self._config.batch_size, self._config.data_seed,
          self._config.full_local_data))
    return clients

  def GetState(self):
    return self._state

  def GetClients(self):
    return self._clients

  def GetProblem(self):
    return self._problem

  def _Map(self, fn, items):
    """Applies fn to items, possibly in parallel; results keep item order."""
    if self._pool is None:
      return [fn(item) for item in items]
    return list(self._pool.map(fn, items))

  def _Project(self, w):
    if self._config.project_radius > 0:
      return core.ProjectBall(w, self._config.project_radius)
    return w

  def _CheckState(self, step):
    if not np.all(np.isfinite(self._state.w)):
      raise errors.DivergenceError('Model became non-finite', step)
    if self._config.check_replicas:
      for client in self._clients:
        if not np.array_equal(client.w, self._state.w):
          raise errors.ReplicaMismatchError('Client %i drifted from the '
              'federator model at step %i' % (client.client_id, step))

  def _Step(self, step):
    raise NotImplementedError

  def _ShouldLog(self, step):
    return step == 0 or step == self._config.steps or \
        step % self._config.eval_every == 0

  def _PublishRoundLog(self, step, start_time):
    w = self._state.w
    uplink, downlink = CommCost(self._config, step,
        self._problem.GetDimension())
    event = simevent.RoundLog(step=step,
        train_loss=self._problem.TrainLoss(w),
        test_acc=self._problem.TestAccuracy(w),
        uplink_scalars=uplink,
        downlink_scalars=downlink,
        wall_ms=int((time.time() - start_time) * 1000))
    self._env.GetEventHub().PublishEvent(event)
    self._env.GetEventHub().Flush()

  def Run(self):
    """Runs all steps and returns the list of RoundLogs."""
    hub = self._env.GetEventHub()
    config = self._config
    start_time = time.time()
    hub.PublishEvent(simevent.RunStartedEvent(run_name=self._run_name,
        engine=self.NAME, num_clients=config.num_clients,
        num_byzantine=len(self._attack.byzantine_ids),
        dimension=self._problem.GetDimension(), steps=config.steps))
    hub.Flush()

    diverged = False
    if self._threads > 1:
      self._pool = futures.ThreadPoolExecutor(max_workers=self._threads)
    try:
      self._PublishRoundLog(0, start_time)
      for step in range(config.steps):
        self._Step(step)
        self._state.Advance()
        self._CheckState(step)
        if self._ShouldLog(self._state.GetStep()):
          self._PublishRoundLog(self._state.GetStep(), start_time)
    except errors.DivergenceError:
      diverged = True
      raise
    finally:
      if self._pool is not None:
        self._pool.shutdown()
        self._pool = None
      hub.PublishEvent(simevent.RunFinishedEvent(run_name=self._run_name,
          steps=self._state.GetStep(),
          wall_ms=int((time.time() - start_time) * 1000), diverged=diverged))
      hub.Flush()
    return self._env.GetHistoryManager().GetHistory()


class Cyber0Engine(RoundEngine):
  """Zero-order rounds with per-direction trimmed-mean aggregation."""

  NAME = Engine.CYBER0

  def __init__(self, config, env=None, threads=1, problem=None,
      run_name=None):
    super(Cyber0Engine, self).__init__(config, env, threads, problem, run_name)
    config = self._config
    self._zo_config = zo.ZoConfig(config.mu, config.k, config.direction_mode,
        config.mu_zero)
    self._cache = None
    if config.cache_directions:
      self._cache = DirectionCache(config.seed, self._problem.GetDimension(),
          config.direction_mode)

  def _Step(self, step):
    config = self._config
    forging = self._attack.ForgesCoefficients()
    workers = [c for c in self._clients
        if not (forging and self._attack.IsByzantine(c.client_id))]

    def Compute(client):
      return client.ComputeReport(step, self._zo_config, config.seed,
          config.eta, config.local_epochs, self._cache)
    reports = self._Map(Compute, workers)

    if forging:
      honest = np.vstack([report.coefficients for report in reports])
      forged = adversary.Forge(config.attack, honest, config.beta,
          config.num_clients, adversary.AdversarySeed(config.seed, step))
      for client_id in sorted(self._attack.byzantine_ids):
        reports.append(zo.ClientReport(client_id, forged))

    aggregate = robust.RobustDirectionAggregate(
        robust.AggregationInput(reports, config.beta))
    if not np.all(np.isfinite(aggregate)):
      bad = int(np.flatnonzero(~np.isfinite(aggregate))[0])
      raise errors.DivergenceError('Non-finite aggregate', step,
          bad % config.k)

    ApplyAggregate(self._state.w, aggregate, step, self._zo_config, config.eta,
        config.seed, config.local_epochs, self._cache)
    self._state.w = self._Project(self._state.w)

    if config.broadcast == 'model':
      for client in self._clients:
        np.copyto(client.w, self._state.w)
      return

    def Replay(client):
      ApplyAggregate(client.w, aggregate, step, self._zo_config, config.eta,
          config.seed, config.local_epochs, self._cache)
      client.w = self._Project(client.w)
    self._Map(Replay, self._clients)


class FirstOrderEngine(RoundEngine):
  """Clients upload exact batch gradients; the federator broadcasts w."""

  def _Aggregate(self, grads):
    raise NotImplementedError

  def _Step(self, step):
    grads = self._Map(lambda client: client.ComputeGradient(step),
        self._clients)
    aggregate = self._Aggregate(grads)
    if not np.all(np.isfinite(aggregate)):
      raise errors.DivergenceError('Non-finite aggregate gradient', step)
    self._state.w = self._Project(
        core.Axpy(self._state.w, -self._config.eta, aggregate))
    for client in self._clients:
      np.copyto(client.w, self._state.w)


class FedAvgEngine(FirstOrderEngine):
  NAME = Engine.FEDAVG

  def _Aggregate(self, grads):
    return robust.MeanAggregate(grads)


class CoordwiseTmEngine(FirstOrderEngine):
  NAME = Engine.COORDWISE_TM

  def _Aggregate(self, grads):
    return robust.CoordwiseTrimmedMean(grads, self._config.beta)


ENGINES = {
  Engine.CYBER0: Cyber0Engine,
  Engine.FEDAVG: FedAvgEngine,
  Engine.COORDWISE_TM: CoordwiseTmEngine,
}


def RunCyber0(config, env=None, threads=1):
  return Cyber0Engine(config, env, threads).Run()


def RunCyber0LocalEpochs(config, env=None, threads=1):
  if config.local_epochs < 1:
    raise errors.ConfigError('local_epochs must be at least 1')
  return Cyber0Engine(config, env, threads).Run()


def RunFedAvg(config, env=None, threads=1):
  return FedAvgEngine(config.Copy(engine=Engine.FEDAVG), env, threads).Run()


def RunCoordwiseTm(config, env=None, threads=1):
  return CoordwiseTmEngine(config.Copy(engine=Engine.COORDWISE_TM), env,
      threads).Run()


def RunExperiment(config, env=None, threads=1, run_name=None):
  """Runs the engine named by config.engine."""
  engine_cls = ENGINES[config.engine]
  return engine_cls(config, env, threads, run_name=run_name).Run()
