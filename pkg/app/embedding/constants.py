"""Constants used throughout the embedding module."""

# Network dimensions
DEFAULT_TOKEN_DIM = 64
DEFAULT_PATH_DIM = 64
DEFAULT_CODE_DIM = 340

# Path-context extraction limits
DEFAULT_MAX_PATH_LEN = 8
DEFAULT_MAX_WIDTH = 2
DEFAULT_MAX_CONTEXTS = 200

# Open path vocabulary: hashed paths land in a prime number of buckets
DEFAULT_PATH_BUCKETS = 50021
PATH_HASH_BYTES = 8

# Parameter initialization range
DEFAULT_INIT_SCALE = 0.05

# Token vocabulary
UNK_TOKEN = "<unk>"
UNK_ID = 0

# Path rendering
UP = "up"
DOWN = "down"
UP_ARROW = "↑"
DOWN_ARROW = "↓"
