"""Analytical eigenpairs of circular sectors."""
