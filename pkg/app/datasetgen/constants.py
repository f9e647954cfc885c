"""Constants used throughout the datasetgen module."""

# Parameter ranges sampled by the templates
INNER_TRIP_COUNTS = (64, 128, 256, 512, 1024, 4096)
OUTER_TRIP_COUNTS = (8, 16, 32)
STRIDES = (1, 2, 4)
ELEM_WIDTHS = (8, 16, 32, 64)

# C element types per width in bits
INT_TYPES = {8: "char", 16: "short", 32: "int", 64: "long"}
FLOAT_TYPES = {32: "float", 64: "double"}

ARITH_OPS = ("+", "-", "*")
BITWISE_OPS = ("&", "|", "^")

# Identifier pools mutated per program
ARRAY_NAMES = (
    "a", "b", "c", "d", "e", "f", "g", "h", "x", "y", "z", "src", "dst", "buf",
    "vec", "arr", "lhs", "rhs", "data", "res", "out", "in0", "in1", "tmp",
    "coef", "weight", "left", "right", "acc_v", "mat",
)
SCALAR_NAMES = ("s", "t", "u", "w", "alpha", "beta", "scale", "bias", "val", "acc", "sum", "total")
INDEX_NAMES = ("i", "j", "k", "ii", "jj", "kk", "p", "q", "n", "m")

# Program harness
KERNEL_NAME = "kernel"
REPS_MACRO = "REPS"
DEFAULT_REPS = 100
PROGRAM_DIR = "programs"
PROGRAM_FILE = "{program_id}.c"
PROGRAM_ID = "p{index:05d}"
MANIFEST_FILE = "manifest.json"

# Splits
DEFAULT_TRAIN_FRACTION = 0.8
SPLIT_TRAIN = "train"
SPLIT_TEST = "test"
