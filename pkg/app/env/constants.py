"""Constants used throughout the environment module."""

# Reward
TIMEOUT_PENALTY = -9.0

# Timeout policy
DEFAULT_TIMEOUT_MULTIPLIER = 10.0

# Real backend protocol
DEFAULT_RUNS = 5
DEFAULT_WARMUPS = 1

# Simulator
ELEM_WIDTHS = frozenset({8, 16, 32, 64})
SIM_VECTOR_BITS = 128
SIM_MAX_VF = 64
SIM_SECONDS_PER_OP = 1e-9
SIM_IF_PENALTY = 0.15
SIM_PREDICATE_FACTOR = 1.3
SIM_OVERVECTORIZE_PENALTY = 0.02
SIM_IF_REDUCTION = 4
SIM_IF_DEFAULT = 2
SIM_BASE_COMPILE_SECONDS = 0.05

# The compiler's default choice on the simulated backend
BASELINE_VF = 4
BASELINE_IF = 2

# Backend names
BACKEND_SIM = "sim"
BACKEND_CLANG = "clang"
