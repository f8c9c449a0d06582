"""Univariate B-spline and rational tensor-product bases."""
