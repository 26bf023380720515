"""Mittag-Leffler functions."""
