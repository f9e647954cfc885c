# Training loop, benchmarking and report assembly
