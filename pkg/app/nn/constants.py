"""Constants used throughout the nn module."""

import numpy as np

DTYPE = np.float64

ACTIVATIONS = ("tanh", "identity")

# Adam defaults
DEFAULT_LR = 5e-5
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
