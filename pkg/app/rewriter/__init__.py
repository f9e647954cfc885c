# Source-to-source pragma injection
