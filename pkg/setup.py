"""CyBeR-0 Byzantine-resilient zero-order federated learning simulator.

A deterministic simulator and library for federated zero-order optimization:
clients upload scalar finite-difference coefficients along shared-seed
perturbation directions, the federator aggregates them with a per-direction
trimmed mean, and every party rebuilds the model update by replaying seeds.
"""
from setuptools import setup, find_packages

DOCLINES = __doc__.split('\n')

VERSION = '0.5.0'
SHORT_DESCRIPTION = DOCLINES[0]
LONG_DESCRIPTION = '\n'.join(DOCLINES[2:])

setup(
  name = 'cyber0',
  version = VERSION,
  description = SHORT_DESCRIPTION,
  long_description = LONG_DESCRIPTION,
  author='The CyBeR-0 Simulator Contributors',
  license='MIT',
  packages = find_packages(exclude=['testdata']),
  install_requires = [
    'numpy >= 1.21',
    'python-gflags >= 3.1',
    'requests >= 2.20',
  ],
  scripts = [
    'bin/cyber0.py',
    'bin/fetch_mnist.py',
  ],
  package_data = {
    'cyber0.sim': ['profiles/*.cfg'],
  },
  include_package_data = True,
)
