"""Constants used throughout the baselines module."""

DEFAULT_K = 5
DEFAULT_TREE_MAX_DEPTH = 12
DEFAULT_TREE_MIN_LEAF = 1
DEFAULT_RANDOM_TRIALS = 1

# Supervised FCNN
DEFAULT_SUPERVISED_LR = 1e-3
DEFAULT_EPOCHS = 200
DEFAULT_MINIBATCH = 32
DEFAULT_VALIDATION_FRACTION = 0.2

LABELS_FILE = "labels.jsonl"

MODEL_KNN = "knn"
MODEL_TREE = "tree"
MODEL_SUPERVISED = "supervised"
