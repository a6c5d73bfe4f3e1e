"""Various constants used within the simulator."""

VERSION = '0.5.0'

### Model-related constants

# MNIST geometry: 28x28 pixels, ten digit classes.
MNIST_FEATURES = 784
MNIST_CLASSES = 10

# Logistic regression dimension for MNIST, bias folded in as a constant-1
# feature: (784 + 1) * 10.
MNIST_DIMENSION = (MNIST_FEATURES + 1) * MNIST_CLASSES

# Pixel bytes are divided by this to land in [0, 1].
PIXEL_MAX = 255.0

MNIST_FILES = {
  'train_images': 'train-images-idx3-ubyte',
  'train_labels': 'train-labels-idx1-ubyte',
  'test_images': 't10k-images-idx3-ubyte',
  'test_labels': 't10k-labels-idx1-ubyte',
}

### IDX format

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

### Random streams

# Number of coordinates generated per chunk when a direction is streamed into
# a parameter vector.  Part of the frozen stream identity for sphere norms.
DIRECTION_CHUNK = 4096

# Uniform pairs drawn per polar-method block.  Fixed so that the i-th
# Gaussian of a stream never depends on how many values were requested.
POLAR_PAIRS_PER_BLOCK = 2048

# Monte-Carlo draws per verification shard.
MONTE_CARLO_SHARD = 50000

### Output

LOG_CSV_NAME = 'log.csv'
MANIFEST_NAME = 'manifest'
SUMMARY_CSV_NAME = 'summary.csv'

# Frozen column order of log.csv.
LOG_COLUMNS = (
  'step',
  'train_loss',
  'test_acc',
  'uplink_scalars',
  'downlink_scalars',
  'wall_ms',
)

SUMMARY_COLUMNS = (
  'param',
  'value',
  'final_step',
  'train_loss',
  'test_acc',
  'uplink_scalars',
  'downlink_scalars',
)

### Environment

ENV_THREADS = 'CYBER0_THREADS'
ENV_MNIST_DIR = 'CYBER0_MNIST_DIR'

### Exit codes

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_INTERRUPTED = 130
