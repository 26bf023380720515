"""Problem configuration and the per-mode solver."""
