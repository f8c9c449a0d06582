"""Tensor-product and hierarchical NURBS approximation spaces."""
