# Comparison methods: brute-force oracle, random search, kNN, CART tree, supervised FCNN
