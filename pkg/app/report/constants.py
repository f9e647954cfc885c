"""Constants used throughout the report module."""

METHOD_BASELINE = "baseline"
METHOD_RL = "rl"
METHOD_BRUTEFORCE = "bruteforce"
METHOD_RANDOM = "random"
METHOD_KNN = "knn"
METHOD_TREE = "tree"
METHOD_SUPERVISED = "supervised"

ALL_METHODS = (
    METHOD_BASELINE,
    METHOD_RL,
    METHOD_BRUTEFORCE,
    METHOD_RANDOM,
    METHOD_KNN,
    METHOD_TREE,
    METHOD_SUPERVISED,
)
DEFAULT_METHODS = (METHOD_BASELINE, METHOD_RL, METHOD_BRUTEFORCE, METHOD_RANDOM)

DEFAULT_TRAIN_STEPS = 20_000
DEFAULT_BEST_OF = 1
DEFAULT_CURVE_BUDGETS = (500, 1_000, 2_000, 5_000, 10_000)

# File names under a run directory
RUN_SUMMARY_FILE = "run.json"
CHECKPOINT_FILE = "checkpoint.json"
TRAINING_LOG_FILE = "training_log.csv"
BENCH_CSV_FILE = "bench.csv"
BENCH_JSON_FILE = "bench.json"
CURVE_CSV_FILE = "efficiency_curve.csv"
SUMMARY_CSV_FILE = "summary.csv"
SUMMARY_JSON_FILE = "summary.json"
SUMMARY_MD_FILE = "summary.md"
HISTOGRAM_CSV_FILE = "optimum_distribution.csv"
