"""Constants used throughout the agent module."""

# Action grid
DEFAULT_MAX_VF = 16
DEFAULT_MAX_IF = 8
LIMIT_MAX_VF = 64
LIMIT_MAX_IF = 16

# Policy network
DEFAULT_HIDDEN = (64, 64)
POLICY_HEAD_SCALE = 0.01

# PPO defaults
DEFAULT_CLIP_EPS = 0.2
DEFAULT_EPOCHS = 4
DEFAULT_BATCH_SIZE = 500
DEFAULT_ENTROPY_COEF = 0.01
DEFAULT_VALUE_COEF = 0.5
ADVANTAGE_STD_FLOOR = 1e-12

# Action selection modes
MODE_SAMPLE = "sample"
MODE_GREEDY = "greedy"

# Checkpoint
CHECKPOINT_FORMAT_VERSION = 1
