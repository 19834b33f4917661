"""Exact lattice discretization and discretized N=2 supersymmetric quantum mechanics."""
