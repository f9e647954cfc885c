# Inference service behind the HTTP API
