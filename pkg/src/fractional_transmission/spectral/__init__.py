"""Eigenpairs of the spatial operator and jump data."""
