"""Entropic protection of topological defects: exact chains, toric-code KMC, BKT flow."""
__version__ = "0.1.0"
