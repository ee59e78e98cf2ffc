"""Algorithmic-complexity sequence prediction lab."""
