# Numpy neural-network substrate shared by the embedding, the agent and the supervised baseline
