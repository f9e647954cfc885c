# Synthetic loop corpus: templates, generation and optimum histograms
