# Loop vectorization autotuning package
