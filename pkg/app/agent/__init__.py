# Contextual-bandit PPO agent over (VF, IF) pragmas
