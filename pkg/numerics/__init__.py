"""Quadrature, assembly and eigensolvers."""
