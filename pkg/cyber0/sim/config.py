"""Experiment configuration: flat `key = value` files and bundled profiles.

A config file holds one assignment per line.  Blank lines are ignored, as
is a `#` comment that starts a line or follows whitespace; a `#` inside a
value such as a path is kept.  Keys are the field names of
ExperimentConfig.  Errors carry the line and column of the offending token.
"""

import math
import os
import re

from . import errors
from . import util
from .adversary import AttackKind
from .seedstream import DirectionMode

PROFILE_DIR = os.path.join(os.path.dirname(__file__), 'profiles')
PROFILE_SUFFIX = '.cfg'

# Older profile names, still accepted by Load.
PROFILE_ALIASES = {
  'mnist_fig1b_k64': 'mnist_k64',
  'quad_thm2': 'quad_exact',
}

_COMMENT_RE = re.compile(r'(?:^|\s)#')


class ConfigField(util.Field):
  """A typed config entry.  Subclasses convert to and from text."""

  def __init__(self, default, help=''):
    super(ConfigField, self).__init__(default)
    self.help = help

  def Parse(self, text):
    raise NotImplementedError

  def Format(self, value):
    return str(value)

  def Check(self, value):
    """Raises ValueError if `value` is out of range."""


class IntField(ConfigField):
  def __init__(self, default, help='', lower_bound=None):
    super(IntField, self).__init__(default, help)
    self.lower_bound = lower_bound

  def Parse(self, text):
    return int(text, 10)

  def Check(self, value):
    if not isinstance(value, int) or isinstance(value, bool):
      raise ValueError('expected an integer, got %r' % (value,))
    if self.lower_bound is not None and value < self.lower_bound:
      raise ValueError('must be >= %s, got %s' % (self.lower_bound, value))


class FloatField(ConfigField):
  def __init__(self, default, help='', lower_bound=None, upper_bound=None):
    super(FloatField, self).__init__(default, help)
    self.lower_bound = lower_bound
    self.upper_bound = upper_bound

  def Parse(self, text):
    return float(text)

  def Format(self, value):
    return repr(float(value))

  def Check(self, value):
    if not math.isfinite(value):
      raise ValueError('must be finite, got %r' % (value,))
    if self.lower_bound is not None and value < self.lower_bound:
      raise ValueError('must be >= %s, got %r' % (self.lower_bound, value))
    if self.upper_bound is not None and value >= self.upper_bound:
      raise ValueError('must be < %s, got %r' % (self.upper_bound, value))


class BoolField(ConfigField):
  TRUE = ('true', 'yes', 'on', '1')
  FALSE = ('false', 'no', 'off', '0')

  def Parse(self, text):
    lowered = text.lower()
    if lowered in self.TRUE:
      return True
    if lowered in self.FALSE:
      return False
    raise ValueError('expected true or false, got %r' % (text,))

  def Format(self, value):
    return 'true' if value else 'false'

  def Check(self, value):
    if not isinstance(value, bool):
      raise ValueError('expected a boolean, got %r' % (value,))


class ChoiceField(ConfigField):
  def __init__(self, default, choices, help=''):
    super(ChoiceField, self).__init__(default, help)
    self.choices = tuple(choices)

  def Parse(self, text):
    return text

  def Check(self, value):
    if value not in self.choices:
      raise ValueError('expected one of %s, got %r' % ('|'.join(self.choices),
          value))


class StringField(ConfigField):
  def Parse(self, text):
    return text


class Engine(object):
  CYBER0 = 'cyber0'
  FEDAVG = 'fedavg'
  COORDWISE_TM = 'coordwise_tm'
  ALL = (CYBER0, FEDAVG, COORDWISE_TM)
  BASELINES = (FEDAVG, COORDWISE_TM)


class ExperimentConfig(object, metaclass=util.DeclarativeMetaclass):
  """Every knob of one simulated run.  Defaults follow the MNIST setup."""

  engine = ChoiceField(Engine.CYBER0, Engine.ALL,
      help='Round engine.')
  model = ChoiceField('logreg', ('logreg', 'quadratic'),
      help='Loss model.')
  dataset = ChoiceField('mnist', ('mnist', 'synthetic'),
      help='Training data for the logreg model.')
  data_dir = StringField('',
      help='Directory of the MNIST IDX files; empty uses $CYBER0_MNIST_DIR.')

  num_clients = IntField(12, lower_bound=1, help='m')
  alpha = FloatField(0.0, lower_bound=0.0, upper_bound=0.5,
      help='Byzantine fraction; floor(alpha m) attackers.')
  beta = FloatField(0.25, lower_bound=0.0, upper_bound=0.5,
      help='Trim fraction of the trimmed mean.')
  attack = ChoiceField(AttackKind.NONE, AttackKind.ALL)
  distribution = ChoiceField('iid', ('iid', 'noniid'))

  mu = FloatField(1e-3, lower_bound=0.0, help='Perturbation step.')
  mu_zero = BoolField(False, help='Use exact gradient projections (mu = 0).')
  k = IntField(64, lower_bound=1, help='Directions per step.')
  direction_mode = ChoiceField(DirectionMode.GAUSSIAN, DirectionMode.ALL)
  eta = FloatField(0.01, lower_bound=0.0, help='Learning rate.')
  steps = IntField(400, lower_bound=0, help='T')
  local_epochs = IntField(1, lower_bound=1, help='E')
  batch_size = IntField(64, lower_bound=1)
  full_local_data = BoolField(False,
      help='Evaluate on the whole local shard instead of a batch.')

  seed = IntField(0, lower_bound=0, help='Root seed of the direction streams.')
  data_seed = IntField(0, lower_bound=0,
      help='Seed of partitioning, shuffling and synthetic data.')
  eval_every = IntField(10, lower_bound=1)
  broadcast = ChoiceField('coefficients', ('coefficients', 'model'))
  project_radius = FloatField(0.0, lower_bound=0.0,
      help='L2 ball radius of the feasible set; 0 disables projection.')
  init_scale = FloatField(0.0, lower_bound=0.0,
      help='Std-dev of the initial model; 0 starts from zeros.')

  synth_n = IntField(2400, lower_bound=1)
  synth_test_n = IntField(600, lower_bound=1)
  synth_p = IntField(16, lower_bound=1)
  synth_classes = IntField(4, lower_bound=1)

  quad_dim = IntField(16, lower_bound=1)
  quad_lambda = FloatField(1.0, lower_bound=0.0)
  quad_optimum = ChoiceField('random', ('zero', 'random'))
  quad_skew = FloatField(0.0, lower_bound=0.0,
      help='Third-derivative scale a of the quadratic; 0 keeps it quadratic.')

  check_replicas = BoolField(False,
      help='Assert client replicas equal the federator model every step.')
  cache_directions = BoolField(True,
      help='Materialize each step direction once and share it.')

  def __init__(self, **kwargs):
    self._values = {}
    for name, field in self.fields.items():
      self._values[name] = field.default
    for name, value in kwargs.items():
      self.Set(name, value)

  def __getattr__(self, name):
    fields = type(self).fields
    if name in fields:
      return self._values[name]
    raise AttributeError('No such config field: %s' % name)

  def __setattr__(self, name, value):
    if name in self.fields:
      self.Set(name, value)
    else:
      super(ExperimentConfig, self).__setattr__(name, value)

  def __eq__(self, other):
    return isinstance(other, ExperimentConfig) and self._values == other._values

  def __ne__(self, other):
    return not self == other

  def __str__(self):
    return '<ExperimentConfig engine=%s m=%i k=%i T=%i>' % (self.engine,
        self.num_clients, self.k, self.steps)

  def Set(self, name, value):
    if name not in self.fields:
      raise errors.ConfigError('Unknown config key: %s' % name)
    field = self.fields[name]
    if isinstance(field, FloatField) and isinstance(value, int) and \
        not isinstance(value, bool):
      value = float(value)
    try:
      field.Check(value)
    except ValueError as e:
      raise errors.ConfigError('%s: %s' % (name, e))
    self._values[name] = value

  def SetFromText(self, name, text):
    if name not in self.fields:
      raise errors.ConfigError('Unknown config key: %s' % name)
    try:
      value = self.fields[name].Parse(text)
    except ValueError as e:
      raise errors.ConfigError('%s: %s' % (name, e))
    self.Set(name, value)

  def Copy(self, **overrides):
    ret = ExperimentConfig()
    ret._values = dict(self._values)
    for name, value in overrides.items():
      ret.Set(name, value)
    return ret

  def ToDict(self):
    return dict(self._values)

  def NumByzantine(self):
    if self.attack == AttackKind.NONE:
      return 0
    return int(math.floor(self.alpha * self.num_clients))

  def Validate(self):
    """Checks constraints spanning several fields."""
    m = self.num_clients
    if m - 2 * int(math.floor(self.beta * m)) < 1:
      raise errors.ConfigError('beta=%r trims away all %i clients' % (
          self.beta, m))
    if (self.mu > 0) == self.mu_zero:
      raise errors.ConfigError('Exactly one of mu > 0 and mu_zero must hold')
    if self.engine in Engine.BASELINES and self.attack not in (
        AttackKind.NONE, AttackKind.LABEL_FLIPPING):
      raise errors.ConfigError('Engine %s supports only attack = none or '
          'label_flipping, got %s' % (self.engine, self.attack))
    if self.engine in Engine.BASELINES and self.local_epochs != 1:
      raise errors.ConfigError('Engine %s has no local epochs' % self.engine)
    if self.model == 'quadratic' and self.attack == AttackKind.LABEL_FLIPPING:
      raise errors.ConfigError('label_flipping needs labelled data')
    if self.model == 'quadratic' and self.quad_lambda <= 0:
      raise errors.ConfigError('quad_lambda must be positive')
    return self

  def Dump(self):
    """Renders the config in the file format; Parse(Dump()) == self."""
    lines = []
    for name, field in self.fields.items():
      lines.append('%s = %s' % (name, field.Format(self._values[name])))
    return '\n'.join(lines) + '\n'


def _Column(line, token, start=0):
  return line.index(token, start) + 1


def Parse(text, base=None):
  """Parses config text on top of `base` (defaults when None)."""
  config = base.Copy() if base is not None else ExperimentConfig()
  seen = {}
  for lineno, raw_line in enumerate(text.splitlines(), 1):
    comment = _COMMENT_RE.search(raw_line)
    line = raw_line[:comment.start()] if comment else raw_line
    if not line.strip():
      continue
    if '=' not in line:
      column = len(line) - len(line.lstrip()) + 1
      raise errors.ConfigError('expected "key = value"', lineno, column)
    key_part, value_part = line.split('=', 1)
    key = key_part.strip()
    value = value_part.strip()
    if not key:
      raise errors.ConfigError('missing key', lineno, 1)
    key_column = _Column(line, key)
    if key not in ExperimentConfig.fields:
      raise errors.ConfigError('unknown key %r' % key, lineno, key_column)
    if key in seen:
      raise errors.ConfigError('duplicate key %r (first set on line %i)' % (
          key, seen[key]), lineno, key_column)
    seen[key] = lineno
    value_column = _Column(line, value, len(key_part) + 1) if value else \
        len(line) + 1
    if not value and not isinstance(ExperimentConfig.fields[key], StringField):
      raise errors.ConfigError('missing value for %r' % key, lineno,
          value_column)
    try:
      config.SetFromText(key, value)
    except errors.ConfigError as e:
      raise errors.ConfigError(str(e), lineno, value_column)
  return config


def ParseFile(path):
  with open(path, encoding='utf-8') as f:
    return Parse(f.read())


def ListProfiles():
  names = [n[:-len(PROFILE_SUFFIX)] for n in os.listdir(PROFILE_DIR)
      if n.endswith(PROFILE_SUFFIX)]
  return sorted(names)


def Load(name_or_path):
  """Loads a config file, or a bundled profile by name."""
  if os.path.exists(name_or_path):
    return ParseFile(name_or_path).Validate()
  name = PROFILE_ALIASES.get(name_or_path, name_or_path)
  profile = os.path.join(PROFILE_DIR, name + PROFILE_SUFFIX)
  if os.path.exists(profile):
    return ParseFile(profile).Validate()
  raise errors.ConfigError('No config file or profile named %r (profiles: %s)'
      % (name_or_path, ', '.join(ListProfiles())))
