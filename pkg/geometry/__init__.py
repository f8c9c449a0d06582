"""Sector parameterization and Bézier meshes."""
