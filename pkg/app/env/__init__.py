# Measurement environment: rewards, backends and the evaluation cache
