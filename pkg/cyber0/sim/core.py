"""Dense parameter vectors and the update arithmetic shared by all modules.

A parameter vector is a one-dimensional float64 numpy array.  Its length is
the model dimension d and never changes; public operations reject NaN and
infinite entries.
"""

import numpy as np

from . import errors


def ParamVector(entries):
  """Builds a finite float64 parameter vector from `entries` (copied)."""
  w = np.array(entries, dtype=np.float64)
  if w.ndim != 1:
    raise errors.ShapeError('Parameter vector must be one-dimensional, got shape %s'
        % (w.shape,))
  CheckFinite(w, 'parameter vector')
  return w


def Zeros(d):
  return np.zeros(int(d), dtype=np.float64)


def CheckFinite(w, what='vector'):
  if not np.all(np.isfinite(w)):
    bad = int(np.flatnonzero(~np.isfinite(w))[0])
    raise errors.NonFiniteError('Non-finite entry in %s at index %i: %r'
        % (what, bad, w[bad]))


# Vectors whose computed norm exceeds the radius by at most this relative
# amount count as inside the ball, which keeps projection idempotent.
BALL_SLACK = 4 * np.finfo(np.float64).eps


def ProjectBall(w, radius):
  """Projects `w` onto the L2 ball of the given radius.

  Returns `w` itself when it already lies inside the ball, otherwise a new
  vector w * (radius / ||w||) whose norm is at most radius * (1 + BALL_SLACK).
  """
  if not radius > 0:
    raise ValueError('radius must be positive, got %r' % (radius,))
  CheckFinite(w, 'projection input')
  limit = radius * (1.0 + BALL_SLACK)
  norm = float(np.linalg.norm(w))
  if norm <= limit:
    return w
  out = (w * radius) / norm
  for _ in range(4):
    norm = float(np.linalg.norm(out))
    if norm <= limit:
      break
    out = (out * radius) / norm
  return out


def Axpy(w, scale, v):
  """Returns w + scale * v elementwise."""
  if w.shape != v.shape:
    raise errors.ShapeError('Length mismatch: %s vs %s' % (w.shape, v.shape))
  return w + scale * v


class ModelState(object):
  """The federator's training state: parameters and completed step count."""

  def __init__(self, w, step=0):
    self.w = w
    self._step = int(step)

  def __str__(self):
    return '<ModelState d=%i step=%i norm=%.6g>' % (len(self.w), self._step,
        float(np.linalg.norm(self.w)))

  def GetStep(self):
    return self._step

  def Advance(self):
    self._step += 1
    return self._step

  def Copy(self):
    return ModelState(self.w.copy(), self._step)
