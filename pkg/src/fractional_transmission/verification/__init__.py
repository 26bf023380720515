"""Finite-difference oracle and verification report."""
