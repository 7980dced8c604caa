"""Geometry-dependent Gibbs point processes."""
