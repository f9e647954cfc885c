# Path-context code embedding
